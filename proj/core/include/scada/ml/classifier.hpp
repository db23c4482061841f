#pragma once

#include "scada/matrix.hpp"

#include <nlohmann/json.hpp>

#include <array>
#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

namespace scada::ml {

enum class algorithm : std::uint8_t { logistic_regression, naive_bayes, knn, svm, decision_tree, random_forest };

inline constexpr std::size_t algorithm_count = 6;

/// Short tags: lr, nb, knn, svm, dt, rf.
std::string_view to_string(algorithm a);
std::optional<algorithm> parse_algorithm(std::string_view text);
const std::array<algorithm, algorithm_count>& all_algorithms();

enum class feature_sampling : std::uint8_t { per_tree, per_split };

struct train_config {
    std::size_t knn_k = 5;
    std::size_t rf_trees = 10;
    std::size_t rf_max_depth = 0;  ///< 0: unlimited
    feature_sampling rf_sampling = feature_sampling::per_split;
    std::size_t dt_max_depth = 0;  ///< 0: unlimited
    std::size_t dt_min_leaf = 1;
    double lr_learning_rate = 0.5;
    std::size_t lr_epochs = 2000;
    double lr_l2 = 0.0;
    double svm_c = 10.0;
    double svm_learning_rate = 0.5;
    std::size_t svm_epochs = 500;
    double nb_variance_floor = 1e-9;
    std::uint64_t seed = 42;

    /// Throws config_error naming the offending field.
    void validate() const;
    nlohmann::json to_json() const;
    static train_config from_json(const nlohmann::json& j);
};

/// Labels are class indices 0..n_classes-1; the class names live in the model.
class classifier {
public:
    virtual ~classifier() = default;

    virtual algorithm kind() const = 0;
    virtual void fit(const matrix& x, std::span<const std::size_t> y, std::size_t n_classes) = 0;
    virtual std::vector<double> predict_proba(std::span<const double> x) const = 0;

    /// Argmax of predict_proba; ties go to the lowest class index.
    virtual std::size_t predict(std::span<const double> x) const;

    virtual nlohmann::json params_to_json() const = 0;
    virtual void params_from_json(const nlohmann::json& j) = 0;

    std::size_t feature_count() const { return n_features_; }
    std::size_t class_count() const { return n_classes_; }

protected:
    void check_fit_input(const matrix& x, std::span<const std::size_t> y, std::size_t n_classes,
                         bool require_two_classes = true);
    void check_query(std::span<const double> x) const;

    std::size_t n_features_ = 0;
    std::size_t n_classes_ = 0;
};

std::unique_ptr<classifier> make_classifier(algorithm a, const train_config& cfg);

/// Index of the largest value, lowest index on ties.
std::size_t argmax(std::span<const double> values);

}  // namespace scada::ml
