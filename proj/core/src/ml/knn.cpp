#include "scada/ml/knn.hpp"

#include "scada/error.hpp"

#include <algorithm>
#include <numeric>

namespace scada::ml {

namespace {

double squared_distance(std::span<const double> a, std::span<const double> b) {
    double s = 0;
    for (std::size_t j = 0; j < a.size(); ++j) {
        const double d = a[j] - b[j];
        s += d * d;
    }
    return s;
}

}  // namespace

std::vector<neighbor> nearest_naive(const matrix& points, std::span<const double> query, std::size_t k) {
    std::vector<neighbor> all(points.rows());
    for (std::size_t r = 0; r < points.rows(); ++r) all[r] = {squared_distance(points.row(r), query), r};
    k = std::min(k, all.size());
    std::partial_sort(all.begin(), all.begin() + static_cast<std::ptrdiff_t>(k), all.end());
    all.resize(k);
    return all;
}

kd_tree::kd_tree(matrix points, std::size_t leaf_size) : points_(std::move(points)), leaf_size_(std::max<std::size_t>(leaf_size, 1)) {
    order_.resize(points_.rows());
    std::iota(order_.begin(), order_.end(), 0);
    if (!order_.empty()) build(0, order_.size());
}

std::int32_t kd_tree::build(std::size_t begin, std::size_t end) {
    const auto id = static_cast<std::int32_t>(nodes_.size());
    nodes_.push_back({begin, end, 0, 0, -1, -1});
    if (end - begin <= leaf_size_) return id;

    std::size_t dim = 0;
    double widest = 0;
    for (std::size_t j = 0; j < points_.cols(); ++j) {
        double lo = points_(order_[begin], j), hi = lo;
        for (std::size_t i = begin + 1; i < end; ++i) {
            lo = std::min(lo, points_(order_[i], j));
            hi = std::max(hi, points_(order_[i], j));
        }
        if (hi - lo > widest) {
            widest = hi - lo;
            dim = j;
        }
    }
    if (widest == 0) return id;  // all points coincide

    const std::size_t mid = begin + (end - begin) / 2;
    auto before = [&](std::size_t a, std::size_t b) {
        const double va = points_(a, dim), vb = points_(b, dim);
        return va < vb || (va == vb && a < b);
    };
    std::nth_element(order_.begin() + static_cast<std::ptrdiff_t>(begin),
                     order_.begin() + static_cast<std::ptrdiff_t>(mid),
                     order_.begin() + static_cast<std::ptrdiff_t>(end), before);
    const double split = points_(order_[mid], dim);
    const auto left = build(begin, mid);
    const auto right = build(mid, end);
    auto& n = nodes_[static_cast<std::size_t>(id)];
    n.dim = dim;
    n.split = split;
    n.left = left;
    n.right = right;
    return id;
}

void kd_tree::search(std::int32_t id, std::span<const double> query, std::size_t k,
                     std::vector<neighbor>& heap) const {
    const node& n = nodes_[static_cast<std::size_t>(id)];
    if (n.left < 0) {
        for (std::size_t i = n.begin; i < n.end; ++i) {
            const neighbor cand{squared_distance(points_.row(order_[i]), query), order_[i]};
            if (heap.size() < k) {
                heap.push_back(cand);
                std::push_heap(heap.begin(), heap.end());
            } else if (cand < heap.front()) {
                std::pop_heap(heap.begin(), heap.end());
                heap.back() = cand;
                std::push_heap(heap.begin(), heap.end());
            }
        }
        return;
    }
    // Every point on the far side is at least |diff| away along `dim`.
    const double diff = query[n.dim] - n.split;
    const auto near = diff <= 0 ? n.left : n.right;
    const auto far = diff <= 0 ? n.right : n.left;
    search(near, query, k, heap);
    if (heap.size() < k || diff * diff <= heap.front().distance2) search(far, query, k, heap);
}

std::vector<neighbor> kd_tree::nearest(std::span<const double> query, std::size_t k) const {
    if (query.size() != points_.cols()) throw dimension_error("kd_tree: query dimension mismatch");
    std::vector<neighbor> heap;
    k = std::min(k, points_.rows());
    if (k == 0) return heap;
    heap.reserve(k);
    search(0, query, k, heap);
    std::sort_heap(heap.begin(), heap.end());
    return heap;
}

void knn::fit(const matrix& x, std::span<const std::size_t> y, std::size_t n_classes) {
    check_fit_input(x, y, n_classes);
    y_.assign(y.begin(), y.end());
    tree_ = kd_tree(x);
}

std::vector<neighbor> knn::neighbors(std::span<const double> x) const {
    check_query(x);
    return tree_.nearest(x, k_);
}

std::vector<double> knn::predict_proba(std::span<const double> x) const {
    const auto near = neighbors(x);
    std::vector<double> p(n_classes_, 0.0);
    for (const auto& n : near) p[y_[n.index]] += 1.0;
    for (auto& v : p) v /= static_cast<double>(near.size());
    return p;
}

nlohmann::json knn::params_to_json() const {
    return {{"k", k_},
            {"n_features", n_features_},
            {"n_classes", n_classes_},
            {"x", tree_.points().data()},
            {"y", y_}};
}

void knn::params_from_json(const nlohmann::json& j) {
    k_ = j.at("k").get<std::size_t>();
    n_features_ = j.at("n_features").get<std::size_t>();
    n_classes_ = j.at("n_classes").get<std::size_t>();
    const auto flat = j.at("x").get<std::vector<double>>();
    y_ = j.at("y").get<std::vector<std::size_t>>();
    if (k_ == 0 || n_features_ == 0 || flat.size() != y_.size() * n_features_) {
        throw config_error("knn: parameter size mismatch");
    }
    matrix x(0, n_features_);
    for (std::size_t r = 0; r < y_.size(); ++r) {
        x.append_row(std::span<const double>(flat.data() + r * n_features_, n_features_));
    }
    tree_ = kd_tree(std::move(x));
}

}  // namespace scada::ml
