#pragma once

#include "scada/ml/classifier.hpp"

namespace scada::ml {

struct neighbor {
    double distance2 = 0;  ///< squared Euclidean distance
    std::size_t index = 0;

    auto operator<=>(const neighbor&) const = default;
};

/// The k nearest rows by (distance, row index), nearest first. Brute force.
std::vector<neighbor> nearest_naive(const matrix& points, std::span<const double> query, std::size_t k);

/// Exact k-d tree over the rows of a matrix; results equal nearest_naive bit for bit.
class kd_tree {
public:
    kd_tree() = default;
    explicit kd_tree(matrix points, std::size_t leaf_size = 8);

    const matrix& points() const { return points_; }

    std::vector<neighbor> nearest(std::span<const double> query, std::size_t k) const;

private:
    struct node {
        std::size_t begin = 0, end = 0;  ///< range in order_
        std::size_t dim = 0;
        double split = 0;
        std::int32_t left = -1, right = -1;
    };

    std::int32_t build(std::size_t begin, std::size_t end);
    void search(std::int32_t id, std::span<const double> query, std::size_t k, std::vector<neighbor>& heap) const;

    matrix points_;
    std::size_t leaf_size_ = 8;
    std::vector<std::size_t> order_;
    std::vector<node> nodes_;
};

/// k-NN with vote fractions as probabilities.
class knn final : public classifier {
public:
    explicit knn(const train_config& cfg = {}) : k_(cfg.knn_k) {}

    algorithm kind() const override { return algorithm::knn; }
    void fit(const matrix& x, std::span<const std::size_t> y, std::size_t n_classes) override;
    std::vector<double> predict_proba(std::span<const double> x) const override;

    nlohmann::json params_to_json() const override;
    void params_from_json(const nlohmann::json& j) override;

    std::vector<neighbor> neighbors(std::span<const double> x) const;
    std::size_t k() const { return k_; }

private:
    std::size_t k_;
    std::vector<std::size_t> y_;
    kd_tree tree_;
};

}  // namespace scada::ml
