#include "scada/ml/tree.hpp"

#include "scada/error.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace scada::ml {

namespace {

struct split_choice {
    std::int32_t feature = -1;
    double threshold = 0;
    double impurity = 0;  ///< n_left*gini_left + n_right*gini_right
};

std::size_t sum_squares(const std::vector<std::size_t>& counts) {
    std::size_t s = 0;
    for (auto c : counts) s += c * c;
    return s;
}

}  // namespace

void decision_tree::fit(const matrix& x, std::span<const std::size_t> y, std::size_t n_classes) {
    check_fit_input(x, y, n_classes, !opts_.allow_single_class);
    for (auto f : opts_.features) {
        if (f >= x.cols()) throw training_error("decision tree: candidate feature out of range");
    }
    nodes_.clear();
    std::vector<std::size_t> rows(x.rows());
    std::iota(rows.begin(), rows.end(), 0);
    std::mt19937_64 rng;
    if (opts_.split_features > 0) {
        std::seed_seq seq{opts_.seed, std::uint64_t{0x7ee}};
        rng.seed(seq);
    }
    grow(x, y, rows, 0, opts_.split_features > 0 ? &rng : nullptr);
}

std::int32_t decision_tree::grow(const matrix& x, std::span<const std::size_t> y, std::vector<std::size_t>& rows,
                                 std::size_t depth, std::mt19937_64* rng) {
    const auto id = static_cast<std::int32_t>(nodes_.size());
    nodes_.push_back({});
    std::vector<std::size_t> counts(n_classes_, 0);
    for (auto r : rows) ++counts[y[r]];
    const std::size_t n = rows.size();
    const bool pure = std::count_if(counts.begin(), counts.end(), [](auto c) { return c > 0; }) <= 1;
    nodes_[static_cast<std::size_t>(id)].counts = counts;

    if (pure || (opts_.max_depth && depth >= opts_.max_depth) || n < 2 * opts_.min_leaf) return id;

    std::vector<std::size_t> candidates = opts_.features;
    if (candidates.empty()) {
        candidates.resize(x.cols());
        std::iota(candidates.begin(), candidates.end(), 0);
    }
    // With split sampling, candidates are visited in random order and constant
    // features do not count towards the budget.
    const bool sampled = rng && opts_.split_features < candidates.size();
    if (sampled) std::shuffle(candidates.begin(), candidates.end(), *rng);

    split_choice best;
    std::size_t visited = 0;
    std::vector<std::size_t> sorted = rows;
    std::vector<std::size_t> left(n_classes_), right(n_classes_);
    for (auto f : candidates) {
        if (sampled && visited == opts_.split_features) break;
        std::sort(sorted.begin(), sorted.end(), [&](std::size_t a, std::size_t b) {
            return x(a, f) < x(b, f) || (x(a, f) == x(b, f) && a < b);
        });
        if (x(sorted.front(), f) == x(sorted.back(), f)) continue;
        ++visited;
        std::fill(left.begin(), left.end(), 0);
        right = counts;
        std::size_t sq_left = 0, sq_right = sum_squares(counts);
        for (std::size_t i = 0; i + 1 < n; ++i) {
            const std::size_t c = y[sorted[i]];
            sq_left += 2 * left[c] + 1;
            ++left[c];
            sq_right -= 2 * right[c] - 1;
            --right[c];
            const double a = x(sorted[i], f), b = x(sorted[i + 1], f);
            if (a == b) continue;
            const std::size_t nl = i + 1, nr = n - nl;
            if (nl < opts_.min_leaf || nr < opts_.min_leaf) continue;
            const double impurity = (static_cast<double>(nl) - static_cast<double>(sq_left) / static_cast<double>(nl)) +
                                    (static_cast<double>(nr) - static_cast<double>(sq_right) / static_cast<double>(nr));
            const auto fi = static_cast<std::int32_t>(f);
            const bool better = best.feature < 0 || impurity < best.impurity ||
                                (impurity == best.impurity && fi < best.feature);
            if (better) {
                double mid = a + (b - a) / 2;
                if (!(mid < b)) mid = a;
                best = {fi, mid, impurity};
            }
        }
    }
    if (best.feature < 0) return id;  // identical feature rows with mixed labels

    std::vector<std::size_t> lo, hi;
    for (auto r : rows) (x(r, static_cast<std::size_t>(best.feature)) <= best.threshold ? lo : hi).push_back(r);
    rows.clear();
    rows.shrink_to_fit();
    const auto l = grow(x, y, lo, depth + 1, rng);
    const auto r = grow(x, y, hi, depth + 1, rng);
    auto& node = nodes_[static_cast<std::size_t>(id)];
    node.feature = best.feature;
    node.threshold = best.threshold;
    node.left = l;
    node.right = r;
    return id;
}

const decision_tree::node& decision_tree::leaf_for(std::span<const double> x) const {
    const node* n = &nodes_.front();
    while (n->feature >= 0) {
        n = &nodes_[static_cast<std::size_t>(x[static_cast<std::size_t>(n->feature)] <= n->threshold ? n->left : n->right)];
    }
    return *n;
}

std::vector<double> decision_tree::predict_proba(std::span<const double> x) const {
    check_query(x);
    const auto& leaf = leaf_for(x);
    const double total = static_cast<double>(std::accumulate(leaf.counts.begin(), leaf.counts.end(), std::size_t{0}));
    std::vector<double> p(n_classes_);
    for (std::size_t k = 0; k < n_classes_; ++k) p[k] = static_cast<double>(leaf.counts[k]) / total;
    return p;
}

std::size_t decision_tree::depth() const {
    std::size_t deepest = 0;
    std::vector<std::pair<std::int32_t, std::size_t>> stack{{0, 0}};
    while (!stack.empty()) {
        auto [id, d] = stack.back();
        stack.pop_back();
        deepest = std::max(deepest, d);
        const auto& n = nodes_[static_cast<std::size_t>(id)];
        if (n.feature >= 0) {
            stack.emplace_back(n.left, d + 1);
            stack.emplace_back(n.right, d + 1);
        }
    }
    return deepest;
}

nlohmann::json decision_tree::params_to_json() const {
    nlohmann::json nodes = nlohmann::json::array();
    for (const auto& n : nodes_) {
        nodes.push_back({{"feature", n.feature},
                         {"threshold", n.threshold},
                         {"left", n.left},
                         {"right", n.right},
                         {"counts", n.counts}});
    }
    return {{"n_features", n_features_},
            {"n_classes", n_classes_},
            {"max_depth", opts_.max_depth},
            {"min_leaf", opts_.min_leaf},
            {"features", opts_.features},
            {"split_features", opts_.split_features},
            {"nodes", std::move(nodes)}};
}

void decision_tree::params_from_json(const nlohmann::json& j) {
    n_features_ = j.at("n_features").get<std::size_t>();
    n_classes_ = j.at("n_classes").get<std::size_t>();
    opts_.max_depth = j.at("max_depth").get<std::size_t>();
    opts_.min_leaf = j.at("min_leaf").get<std::size_t>();
    opts_.features = j.at("features").get<std::vector<std::size_t>>();
    opts_.split_features = j.at("split_features").get<std::size_t>();
    nodes_.clear();
    for (const auto& jn : j.at("nodes")) {
        node n;
        n.feature = jn.at("feature").get<std::int32_t>();
        n.threshold = jn.at("threshold").get<double>();
        n.left = jn.at("left").get<std::int32_t>();
        n.right = jn.at("right").get<std::int32_t>();
        n.counts = jn.at("counts").get<std::vector<std::size_t>>();
        nodes_.push_back(std::move(n));
    }
    const auto count = static_cast<std::int32_t>(nodes_.size());
    if (nodes_.empty()) throw config_error("dt: no nodes");
    for (std::int32_t i = 0; i < count; ++i) {
        const auto& n = nodes_[static_cast<std::size_t>(i)];
        if (n.counts.size() != n_classes_) throw config_error("dt: class count mismatch");
        if (n.feature >= 0 && (static_cast<std::size_t>(n.feature) >= n_features_ || n.left <= i || n.right <= i ||
                               n.left >= count || n.right >= count)) {
            throw config_error("dt: malformed node " + std::to_string(i));
        }
    }
}

void random_forest::fit(const matrix& x, std::span<const std::size_t> y, std::size_t n_classes) {
    check_fit_input(x, y, n_classes);
    const std::size_t d = x.cols();
    const auto m = std::max<std::size_t>(1, static_cast<std::size_t>(std::lround(std::sqrt(static_cast<double>(d)))));
    trees_.clear();
    for (std::size_t t = 0; t < cfg_.rf_trees; ++t) {
        std::seed_seq seq{cfg_.seed, std::uint64_t{t}, std::uint64_t{0xf0}};
        std::mt19937_64 rng(seq);
        std::uniform_int_distribution<std::size_t> draw(0, x.rows() - 1);
        std::vector<std::size_t> sample(x.rows());
        for (auto& s : sample) s = draw(rng);

        tree_options opts;
        opts.max_depth = cfg_.rf_max_depth;
        opts.min_leaf = 1;
        opts.allow_single_class = true;
        if (cfg_.rf_sampling == feature_sampling::per_tree) {
            std::vector<std::size_t> all(d);
            std::iota(all.begin(), all.end(), 0);
            std::shuffle(all.begin(), all.end(), rng);
            all.resize(m);
            std::sort(all.begin(), all.end());
            opts.features = std::move(all);
        } else {
            opts.split_features = m;
            opts.seed = rng();
        }

        std::vector<std::size_t> yb(sample.size());
        for (std::size_t i = 0; i < sample.size(); ++i) yb[i] = y[sample[i]];
        decision_tree tree(std::move(opts));
        tree.fit(x.select_rows(sample), yb, n_classes);
        trees_.push_back(std::move(tree));
    }
}

std::vector<double> random_forest::predict_proba(std::span<const double> x) const {
    check_query(x);
    std::vector<double> p(n_classes_, 0.0);
    for (const auto& t : trees_) p[t.predict(x)] += 1.0;
    for (auto& v : p) v /= static_cast<double>(trees_.size());
    return p;
}

nlohmann::json random_forest::params_to_json() const {
    nlohmann::json trees = nlohmann::json::array();
    for (const auto& t : trees_) trees.push_back(t.params_to_json());
    return {{"n_features", n_features_}, {"n_classes", n_classes_}, {"trees", std::move(trees)}};
}

void random_forest::params_from_json(const nlohmann::json& j) {
    n_features_ = j.at("n_features").get<std::size_t>();
    n_classes_ = j.at("n_classes").get<std::size_t>();
    trees_.clear();
    for (const auto& jt : j.at("trees")) {
        decision_tree t;
        t.params_from_json(jt);
        if (t.feature_count() != n_features_ || t.class_count() != n_classes_) throw config_error("rf: tree shape mismatch");
        trees_.push_back(std::move(t));
    }
    if (trees_.empty()) throw config_error("rf: no trees");
}

}  // namespace scada::ml
