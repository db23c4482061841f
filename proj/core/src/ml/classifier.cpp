#include "scada/ml/classifier.hpp"

#include "scada/error.hpp"
#include "scada/ml/knn.hpp"
#include "scada/ml/logistic.hpp"
#include "scada/ml/naive_bayes.hpp"
#include "scada/ml/svm.hpp"
#include "scada/ml/tree.hpp"

#include <algorithm>
#include <cmath>

namespace scada::ml {

namespace {
constexpr std::array<std::string_view, algorithm_count> tags{"lr", "nb", "knn", "svm", "dt", "rf"};
}

std::string_view to_string(algorithm a) { return tags[static_cast<std::size_t>(a)]; }

std::optional<algorithm> parse_algorithm(std::string_view text) {
    for (std::size_t i = 0; i < tags.size(); ++i) {
        if (text == tags[i]) return static_cast<algorithm>(i);
    }
    return std::nullopt;
}

const std::array<algorithm, algorithm_count>& all_algorithms() {
    static constexpr std::array<algorithm, algorithm_count> all{
        algorithm::logistic_regression, algorithm::naive_bayes,   algorithm::knn,
        algorithm::svm,                 algorithm::decision_tree, algorithm::random_forest};
    return all;
}

void train_config::validate() const {
    auto positive = [](bool ok, const char* field) {
        if (!ok) throw config_error(std::string("train config: ") + field + " must be positive");
    };
    positive(knn_k > 0, "knn_k");
    positive(rf_trees > 0, "rf_trees");
    positive(dt_min_leaf > 0, "dt_min_leaf");
    positive(lr_learning_rate > 0, "lr_learning_rate");
    positive(lr_epochs > 0, "lr_epochs");
    positive(lr_l2 >= 0, "lr_l2");
    positive(svm_c > 0, "svm_c");
    positive(svm_learning_rate > 0, "svm_learning_rate");
    positive(svm_epochs > 0, "svm_epochs");
    positive(nb_variance_floor > 0, "nb_variance_floor");
}

nlohmann::json train_config::to_json() const {
    return {{"knn_k", knn_k},
            {"rf_trees", rf_trees},
            {"rf_max_depth", rf_max_depth},
            {"rf_sampling", rf_sampling == feature_sampling::per_tree ? "per_tree" : "per_split"},
            {"dt_max_depth", dt_max_depth},
            {"dt_min_leaf", dt_min_leaf},
            {"lr_learning_rate", lr_learning_rate},
            {"lr_epochs", lr_epochs},
            {"lr_l2", lr_l2},
            {"svm_c", svm_c},
            {"svm_learning_rate", svm_learning_rate},
            {"svm_epochs", svm_epochs},
            {"nb_variance_floor", nb_variance_floor},
            {"seed", seed}};
}

train_config train_config::from_json(const nlohmann::json& j) {
    train_config c;
    try {
        c.knn_k = j.value("knn_k", c.knn_k);
        c.rf_trees = j.value("rf_trees", c.rf_trees);
        c.rf_max_depth = j.value("rf_max_depth", c.rf_max_depth);
        const auto sampling = j.value("rf_sampling", std::string("per_split"));
        if (sampling == "per_tree") {
            c.rf_sampling = feature_sampling::per_tree;
        } else if (sampling == "per_split") {
            c.rf_sampling = feature_sampling::per_split;
        } else {
            throw config_error("train config: rf_sampling must be per_tree or per_split");
        }
        c.dt_max_depth = j.value("dt_max_depth", c.dt_max_depth);
        c.dt_min_leaf = j.value("dt_min_leaf", c.dt_min_leaf);
        c.lr_learning_rate = j.value("lr_learning_rate", c.lr_learning_rate);
        c.lr_epochs = j.value("lr_epochs", c.lr_epochs);
        c.lr_l2 = j.value("lr_l2", c.lr_l2);
        c.svm_c = j.value("svm_c", c.svm_c);
        c.svm_learning_rate = j.value("svm_learning_rate", c.svm_learning_rate);
        c.svm_epochs = j.value("svm_epochs", c.svm_epochs);
        c.nb_variance_floor = j.value("nb_variance_floor", c.nb_variance_floor);
        c.seed = j.value("seed", c.seed);
    } catch (const nlohmann::json::exception& e) {
        throw config_error(std::string("train config: ") + e.what());
    }
    c.validate();
    return c;
}

std::size_t classifier::predict(std::span<const double> x) const { return argmax(predict_proba(x)); }

void classifier::check_fit_input(const matrix& x, std::span<const std::size_t> y, std::size_t n_classes,
                                 bool require_two_classes) {
    if (x.rows() != y.size()) throw dimension_error("fit: feature rows and labels differ in length");
    if (x.empty()) throw training_error("fit: empty training set");
    if (n_classes < 2) throw training_error("fit: need at least two classes");
    std::vector<bool> seen(n_classes, false);
    for (std::size_t label : y) {
        if (label >= n_classes) throw training_error("fit: label index out of range");
        seen[label] = true;
    }
    if (require_two_classes && std::count(seen.begin(), seen.end(), true) < 2) throw training_error("fit: training set has a single class");
    for (double v : x.data()) {
        if (!std::isfinite(v)) throw training_error("fit: non-finite feature value");
    }
    n_features_ = x.cols();
    n_classes_ = n_classes;
}

void classifier::check_query(std::span<const double> x) const {
    if (n_classes_ == 0) throw error("classifier used before fit");
    if (x.size() != n_features_) {
        throw dimension_error("query has " + std::to_string(x.size()) + " features, model expects " +
                              std::to_string(n_features_));
    }
}

std::unique_ptr<classifier> make_classifier(algorithm a, const train_config& cfg) {
    switch (a) {
        case algorithm::logistic_regression: return std::make_unique<logistic_regression>(cfg);
        case algorithm::naive_bayes: return std::make_unique<naive_bayes>(cfg);
        case algorithm::knn: return std::make_unique<knn>(cfg);
        case algorithm::svm: return std::make_unique<linear_svm>(cfg);
        case algorithm::decision_tree: return std::make_unique<decision_tree>(cfg);
        case algorithm::random_forest: return std::make_unique<random_forest>(cfg);
    }
    throw error("unknown algorithm");
}

std::size_t argmax(std::span<const double> values) {
    if (values.empty()) throw validation_error("argmax of an empty distribution");
    std::size_t best = 0;
    for (std::size_t i = 1; i < values.size(); ++i) {
        if (values[i] > values[best]) best = i;
    }
    return best;
}

}  // namespace scada::ml
