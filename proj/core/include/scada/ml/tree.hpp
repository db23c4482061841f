#pragma once

#include "scada/ml/classifier.hpp"

#include <random>

namespace scada::ml {

struct tree_options {
    std::size_t max_depth = 0;  ///< 0: unlimited
    std::size_t min_leaf = 1;
    std::vector<std::size_t> features;  ///< candidate features; empty means all
    std::size_t split_features = 0;     ///< >0: sample this many candidates at every split
    std::uint64_t seed = 0;             ///< used only with split_features
    bool allow_single_class = false;    ///< bootstrap samples may hold one class
};

/// CART with Gini impurity. An impure node is always split while a valid split
/// exists, so an unlimited tree reproduces its training labels unless two rows
/// share features but not labels. Ties go to the lowest feature, then the lowest threshold.
class decision_tree final : public classifier {
public:
    explicit decision_tree(const train_config& cfg = {}) {
        opts_.max_depth = cfg.dt_max_depth;
        opts_.min_leaf = cfg.dt_min_leaf;
    }
    explicit decision_tree(tree_options opts) : opts_(std::move(opts)) {}

    algorithm kind() const override { return algorithm::decision_tree; }
    void fit(const matrix& x, std::span<const std::size_t> y, std::size_t n_classes) override;
    std::vector<double> predict_proba(std::span<const double> x) const override;

    nlohmann::json params_to_json() const override;
    void params_from_json(const nlohmann::json& j) override;

    std::size_t node_count() const { return nodes_.size(); }
    std::size_t depth() const;

private:
    struct node {
        std::int32_t feature = -1;  ///< -1 for a leaf
        double threshold = 0;       ///< go left when x[feature] <= threshold
        std::int32_t left = -1, right = -1;
        std::vector<std::size_t> counts;
    };

    std::int32_t grow(const matrix& x, std::span<const std::size_t> y, std::vector<std::size_t>& rows,
                      std::size_t depth, std::mt19937_64* rng);
    const node& leaf_for(std::span<const double> x) const;

    tree_options opts_;
    std::vector<node> nodes_;
};

/// Bagged CART trees; each tree votes its top class and probabilities are vote fractions.
class random_forest final : public classifier {
public:
    explicit random_forest(const train_config& cfg = {}) : cfg_(cfg) {}

    algorithm kind() const override { return algorithm::random_forest; }
    void fit(const matrix& x, std::span<const std::size_t> y, std::size_t n_classes) override;
    std::vector<double> predict_proba(std::span<const double> x) const override;

    nlohmann::json params_to_json() const override;
    void params_from_json(const nlohmann::json& j) override;

    const std::vector<decision_tree>& trees() const { return trees_; }

private:
    train_config cfg_;
    std::vector<decision_tree> trees_;
};

}  // namespace scada::ml
