#include "scada/ml/model.hpp"

#include "scada/error.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>

namespace scada::ml {

namespace {
constexpr std::string_view model_format = "scada-siem-model";
}

std::vector<double> model::predict_proba(std::span<const double> x) const { return impl_->predict_proba(x); }

std::size_t model::predict(std::span<const double> x) const { return impl_->predict(x); }

std::vector<double> model::predict_proba_raw(std::span<const double> raw) const {
    if (!scaler) throw error("model has no scaler; pass scaled features");
    std::vector<double> x(raw.begin(), raw.end());
    scaler->transform_row(x);
    return predict_proba(x);
}

std::optional<std::size_t> model::class_index(std::string_view label) const {
    auto it = std::find(classes_.begin(), classes_.end(), label);
    if (it == classes_.end()) return std::nullopt;
    return static_cast<std::size_t>(it - classes_.begin());
}

std::vector<std::size_t> model::encode(const dataset::labeled_set& set) const {
    std::vector<std::size_t> y;
    y.reserve(set.size());
    for (const auto& label : set.labels(task_)) {
        auto k = class_index(label);
        if (!k) throw validation_error("label '" + label + "' is not a class of this model");
        y.push_back(*k);
    }
    return y;
}

model train(algorithm a, const dataset::labeled_set& set, dataset::task view, const train_config& cfg) {
    cfg.validate();
    if (set.size() == 0) throw training_error("train: empty set");
    const auto labels = set.labels(view);
    const std::set<std::string> present(labels.begin(), labels.end());
    model m;
    m.task_ = view;
    m.config_ = cfg;
    for (const auto& label : dataset::all_labels(view)) {
        if (present.count(label)) m.classes_.push_back(label);
    }
    if (m.classes_.size() < 2) throw training_error("train: set has a single class under view " + std::string(dataset::to_string(view)));
    auto impl = make_classifier(a, cfg);
    impl->fit(set.x, m.encode(set), m.classes_.size());
    m.impl_ = std::move(impl);
    m.feature_names = set.feature_names;
    return m;
}

nlohmann::json model::to_json() const {
    nlohmann::json j{{"format", model_format},
                     {"version", 1},
                     {"algorithm", to_string(kind())},
                     {"task", dataset::to_string(task_)},
                     {"classes", classes_},
                     {"feature_names", feature_names},
                     {"config", config_.to_json()},
                     {"dataset_sha256", dataset_sha256},
                     {"params", impl_->params_to_json()}};
    j["scaler"] = scaler ? scaler->to_json() : nlohmann::json(nullptr);
    j["scaler_id"] = scaler ? nlohmann::json(scaler->id()) : nlohmann::json(nullptr);
    j["pipeline"] = pipeline ? pipeline->to_json() : nlohmann::json(nullptr);
    return j;
}

model model::from_json(const nlohmann::json& j) {
    try {
        if (j.at("format").get<std::string>() != model_format) throw config_error("not a model document");
        if (j.at("version").get<int>() != 1) {
            throw config_error("unsupported model version " + j.at("version").dump() + " (expected 1)");
        }
        model m;
        const auto algo = parse_algorithm(j.at("algorithm").get<std::string>());
        if (!algo) throw config_error("unknown algorithm '" + j.at("algorithm").get<std::string>() + "'");
        const auto view = dataset::parse_task(j.at("task").get<std::string>());
        if (!view) throw config_error("unknown task '" + j.at("task").get<std::string>() + "'");
        m.task_ = *view;
        m.classes_ = j.at("classes").get<std::vector<std::string>>();
        m.feature_names = j.value("feature_names", std::vector<std::string>{});
        m.config_ = train_config::from_json(j.at("config"));
        m.dataset_sha256 = j.value("dataset_sha256", std::string{});
        if (j.contains("scaler") && !j.at("scaler").is_null()) m.scaler = dataset::minmax_scaler::from_json(j.at("scaler"));
        if (j.contains("pipeline") && !j.at("pipeline").is_null()) {
            m.pipeline = dataset::pipeline_config::from_json(j.at("pipeline"));
        }
        auto impl = make_classifier(*algo, m.config_);
        impl->params_from_json(j.at("params"));
        if (impl->class_count() != m.classes_.size()) throw config_error("class list does not match parameters");
        if (m.scaler && m.scaler->min().size() != impl->feature_count()) {
            throw config_error("scaler does not match the feature count");
        }
        m.impl_ = std::move(impl);
        return m;
    } catch (const nlohmann::json::exception& e) {
        throw config_error(std::string("model document: ") + e.what());
    }
}

void model::save(const std::filesystem::path& path) const {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out) throw error("cannot write " + path.string());
    out << to_json().dump(1) << '\n';
}

model model::load(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw error("cannot open model " + path.string());
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(in);
    } catch (const nlohmann::json::exception& e) {
        throw config_error(path.string() + ": " + e.what());
    }
    return from_json(j);
}

}  // namespace scada::ml
