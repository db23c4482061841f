#include "scada/error.hpp"
#include "scada/ml/classifier.hpp"
#include "scada/ml/knn.hpp"
#include "scada/ml/logistic.hpp"
#include "scada/ml/model.hpp"
#include "scada/ml/naive_bayes.hpp"
#include "scada/ml/svm.hpp"
#include "scada/ml/tree.hpp"

#include "test_support.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>

using namespace scada;
using namespace scada::ml;

namespace {

struct toy {
    matrix x;
    std::vector<std::size_t> y;
};

toy blobs(std::size_t per_class, std::size_t classes, std::size_t dims, double spread, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> noise(0, spread);
    toy t{matrix(0, dims), {}};
    for (std::size_t c = 0; c < classes; ++c) {
        for (std::size_t i = 0; i < per_class; ++i) {
            std::vector<double> row(dims);
            for (std::size_t d = 0; d < dims; ++d) row[d] = (d == c % dims ? 1.0 : 0.0) * (1.0 + double(c / dims)) + noise(rng);
            t.x.append_row(row);
            t.y.push_back(c);
        }
    }
    return t;
}

matrix rows(std::initializer_list<std::vector<double>> r) {
    matrix m;
    for (const auto& row : r) m.append_row(row);
    return m;
}

std::vector<neighbor> brute_force(const matrix& pts, std::span<const double> q, std::size_t k) {
    std::vector<std::pair<double, std::size_t>> all;
    for (std::size_t i = 0; i < pts.rows(); ++i) {
        double d = 0;
        for (std::size_t j = 0; j < q.size(); ++j) d += (pts(i, j) - q[j]) * (pts(i, j) - q[j]);
        all.emplace_back(d, i);
    }
    std::sort(all.begin(), all.end());
    std::vector<neighbor> out;
    for (std::size_t i = 0; i < std::min(k, all.size()); ++i) out.push_back({all[i].first, all[i].second});
    return out;
}

train_config fast_config() {
    train_config c;
    c.lr_epochs = 500;
    c.svm_epochs = 300;
    return c;
}

}  // namespace

class EveryAlgorithm : public ::testing::TestWithParam<algorithm> {};

TEST_P(EveryAlgorithm, SeparatesWellSeparatedBlobs) {
    const auto t = blobs(30, 2, 2, 0.05, 1);
    auto clf = make_classifier(GetParam(), fast_config());
    clf->fit(t.x, t.y, 2);
    for (std::size_t i = 0; i < t.x.rows(); ++i) EXPECT_EQ(clf->predict(t.x.row(i)), t.y[i]) << i;
}

TEST_P(EveryAlgorithm, ProbabilitySimplexAndArgmaxConsistency) {
    const auto t = blobs(25, 4, 3, 0.4, 2);
    auto clf = make_classifier(GetParam(), fast_config());
    clf->fit(t.x, t.y, 4);
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(-1, 3);
    for (int i = 0; i < 300; ++i) {
        std::vector<double> q{u(rng), u(rng), u(rng)};
        const auto p = clf->predict_proba(q);
        ASSERT_EQ(p.size(), 4u);
        EXPECT_NEAR(std::accumulate(p.begin(), p.end(), 0.0), 1.0, 1e-9);
        for (double v : p) EXPECT_GE(v, 0.0);
        if (GetParam() != algorithm::svm) EXPECT_EQ(clf->predict(q), argmax(p));
    }
}

TEST_P(EveryAlgorithm, RejectsBadTrainingInput) {
    auto clf = make_classifier(GetParam(), fast_config());
    const auto t = blobs(5, 2, 2, 0.1, 4);
    EXPECT_THROW(clf->fit(t.x, std::vector<std::size_t>(t.y.size(), 0), 2), training_error);
    auto nan = t.x;
    nan(3, 1) = std::numeric_limits<double>::quiet_NaN();
    EXPECT_THROW(clf->fit(nan, t.y, 2), training_error);
    EXPECT_THROW(clf->fit(t.x, std::vector<std::size_t>{0, 1}, 2), dimension_error);
    clf->fit(t.x, t.y, 2);
    EXPECT_THROW(clf->predict_proba(std::vector<double>{1, 2, 3}), dimension_error);
}

TEST_P(EveryAlgorithm, SameSeedSameSerializedModel) {
    const auto data = test::small_dataset(30, 9);
    const auto a = train(GetParam(), data.train, dataset::task::scenario, fast_config());
    const auto b = train(GetParam(), data.train, dataset::task::scenario, fast_config());
    EXPECT_EQ(a.to_json().dump(), b.to_json().dump());
}

TEST_P(EveryAlgorithm, ModelJsonRoundTripPredictsIdentically) {
    const auto data = test::small_dataset(30, 10);
    auto m = train(GetParam(), data.train, dataset::task::component, fast_config());
    m.scaler = data.scaler;
    const auto back = model::from_json(m.to_json());
    EXPECT_EQ(back.to_json().dump(), m.to_json().dump());
    EXPECT_EQ(back.classes(), m.classes());
    for (std::size_t i = 0; i < data.test.size(); ++i) {
        EXPECT_EQ(back.predict_proba(data.test.x.row(i)), m.predict_proba(data.test.x.row(i)));
    }
}

INSTANTIATE_TEST_SUITE_P(Classifiers, EveryAlgorithm, ::testing::ValuesIn(all_algorithms()),
                         [](const auto& info) { return std::string(to_string(info.param)); });

TEST(Algorithms, TagsRoundTrip) {
    for (auto a : all_algorithms()) EXPECT_EQ(parse_algorithm(to_string(a)), a);
    EXPECT_FALSE(parse_algorithm("xgboost"));
}

TEST(TrainConfig, JsonAndValidation) {
    train_config c;
    c.knn_k = 7;
    c.rf_sampling = feature_sampling::per_tree;
    EXPECT_EQ(train_config::from_json(c.to_json()).to_json(), c.to_json());
    EXPECT_THROW(train_config::from_json({{"knn_k", 0}}), config_error);
    EXPECT_THROW(train_config::from_json({{"rf_sampling", "per_leaf"}}), config_error);
    EXPECT_THROW(train_config::from_json({{"svm_c", "big"}}), config_error);
}

TEST(Argmax, LowestIndexWinsTies) {
    EXPECT_EQ(argmax(std::vector<double>{0.25, 0.5, 0.5}), 1u);
    EXPECT_EQ(argmax(std::vector<double>{0.5, 0.5}), 0u);
    EXPECT_THROW(argmax(std::vector<double>{}), validation_error);
}

// Hand-computed oracle: class 0 = {1, 2, 6} on one feature, class 1 = {10, 12}.
TEST(NaiveBayes, MeansVariancesAndPosteriorMatchHandComputation) {
    naive_bayes nb;
    nb.fit(rows({{1}, {2}, {6}, {10}, {12}}), std::vector<std::size_t>{0, 0, 0, 1, 1}, 2);
    EXPECT_DOUBLE_EQ(nb.mean(0, 0), 3.0);
    EXPECT_DOUBLE_EQ(nb.variance(0, 0), 14.0 / 3.0);  // ((1-3)^2 + (2-3)^2 + (6-3)^2) / 3
    EXPECT_DOUBLE_EQ(nb.mean(1, 0), 11.0);
    EXPECT_DOUBLE_EQ(nb.variance(1, 0), 1.0);
    EXPECT_DOUBLE_EQ(nb.prior(0), 0.6);
    auto gauss = [](double x, double m, double v) { return std::exp(-(x - m) * (x - m) / (2 * v)) / std::sqrt(2 * M_PI * v); };
    const double x = 7.0;
    const double a = 0.6 * gauss(x, 3, 14.0 / 3.0), b = 0.4 * gauss(x, 11, 1);
    const auto p = nb.predict_proba(std::vector<double>{x});
    EXPECT_NEAR(p[0], a / (a + b), 1e-12);
    EXPECT_NEAR(p[1], b / (a + b), 1e-12);
}

TEST(NaiveBayes, VarianceFloorSurvivesConstantFeature) {
    naive_bayes nb;
    nb.fit(rows({{1, 5}, {2, 5}, {8, 5}, {9, 5}}), std::vector<std::size_t>{0, 0, 1, 1}, 2);
    EXPECT_DOUBLE_EQ(nb.variance(0, 1), 1e-9);
    const auto p = nb.predict_proba(std::vector<double>{1.5, 5});
    EXPECT_TRUE(std::isfinite(p[0]) && std::isfinite(p[1]));
    EXPECT_GT(p[0], 0.99);
}

TEST(Knn, VoteFractions) {
    train_config c;
    c.knn_k = 3;
    knn k(c);
    k.fit(rows({{0.0}, {0.1}, {0.3}, {5.0}}), std::vector<std::size_t>{0, 0, 1, 1}, 2);
    const auto p = k.predict_proba(std::vector<double>{0.05});
    EXPECT_DOUBLE_EQ(p[0], 2.0 / 3.0);
    EXPECT_DOUBLE_EQ(p[1], 1.0 / 3.0);
}

TEST(KnnProperty, TreeEqualsBruteForceOn500Points) {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> u(0, 1);
    std::uniform_int_distribution<int> grid(0, 4);
    matrix pts(0, 4);
    for (int i = 0; i < 500; ++i) {
        // Half the points on a coarse grid so exact distance ties are common.
        if (i % 2) {
            pts.append_row(std::vector<double>{u(rng), u(rng), u(rng), u(rng)});
        } else {
            pts.append_row(std::vector<double>{grid(rng) / 4.0, grid(rng) / 4.0, grid(rng) / 4.0, grid(rng) / 4.0});
        }
    }
    const kd_tree tree(pts, 8);
    for (int q = 0; q < 300; ++q) {
        std::vector<double> query(4);
        for (auto& v : query) v = q % 3 ? u(rng) : grid(rng) / 4.0;
        for (std::size_t k : {1u, 5u, 17u}) {
            const auto expected = brute_force(pts, query, k);
            EXPECT_EQ(tree.nearest(query, k), expected);
            EXPECT_EQ(nearest_naive(pts, query, k), expected);
        }
    }
}

TEST(KnnProperty, SupportNeverExceedsK) {
    const auto t = blobs(40, 6, 3, 0.8, 12);
    for (std::size_t k : {1u, 3u, 5u}) {
        train_config c;
        c.knn_k = k;
        knn m(c);
        m.fit(t.x, t.y, 6);
        for (std::size_t i = 0; i < t.x.rows(); ++i) {
            const auto p = m.predict_proba(t.x.row(i));
            EXPECT_LE(static_cast<std::size_t>(std::count_if(p.begin(), p.end(), [](double v) { return v > 0; })), k);
        }
    }
}

TEST(DecisionTree, FitsXorExactly) {
    decision_tree dt;
    const auto x = rows({{0, 0}, {0, 1}, {1, 0}, {1, 1}});
    const std::vector<std::size_t> y{0, 1, 1, 0};
    dt.fit(x, y, 2);
    for (std::size_t i = 0; i < 4; ++i) {
        EXPECT_EQ(dt.predict(x.row(i)), y[i]);
        const auto p = dt.predict_proba(x.row(i));
        EXPECT_EQ(p[y[i]], 1.0);
    }
    EXPECT_GE(dt.depth(), 2u);
}

TEST(DecisionTree, DepthLimitAndJson) {
    const auto t = blobs(30, 3, 2, 0.5, 13);
    train_config c;
    c.dt_max_depth = 1;
    decision_tree dt(c);
    dt.fit(t.x, t.y, 3);
    EXPECT_LE(dt.depth(), 1u);
    decision_tree back;
    back.params_from_json(dt.params_to_json());
    EXPECT_EQ(back.params_to_json(), dt.params_to_json());
    auto broken = dt.params_to_json();
    broken["nodes"][0]["left"] = 99;
    EXPECT_THROW(back.params_from_json(broken), error);
}

TEST(DecisionTreeProperty, PureTreeIsOneHotOnDistinctRows) {
    const auto t = blobs(50, 5, 3, 0.6, 14);
    decision_tree dt;
    dt.fit(t.x, t.y, 5);
    for (std::size_t i = 0; i < t.x.rows(); ++i) {
        const auto p = dt.predict_proba(t.x.row(i));
        EXPECT_EQ(std::count(p.begin(), p.end(), 0.0), 4);
        EXPECT_EQ(dt.predict(t.x.row(i)), t.y[i]);
    }
}

TEST(RandomForestProperty, VoteFractionsBoundedByTreeCount) {
    const auto t = blobs(40, 6, 3, 0.9, 15);
    for (std::size_t trees : {2u, 4u, 10u}) {
        for (auto sampling : {feature_sampling::per_tree, feature_sampling::per_split}) {
            train_config c;
            c.rf_trees = trees;
            c.rf_sampling = sampling;
            random_forest rf(c);
            rf.fit(t.x, t.y, 6);
            ASSERT_EQ(rf.trees().size(), trees);
            for (std::size_t i = 0; i < t.x.rows(); i += 3) {
                const auto p = rf.predict_proba(t.x.row(i));
                std::size_t support = 0;
                for (double v : p) {
                    if (v > 0) ++support;
                    const double votes = v * double(trees);
                    EXPECT_NEAR(votes, std::round(votes), 1e-12);
                }
                EXPECT_LE(support, trees);
            }
        }
    }
}

TEST(RandomForest, FourTreeVoteExample) {
    // Four trees voting A, A, B, C give {A:.5, B:.25, C:.25}: recover each tree's vote
    // and check the forest output is their fraction.
    const auto t = blobs(30, 3, 3, 1.2, 16);
    train_config c;
    c.rf_trees = 4;
    random_forest rf(c);
    rf.fit(t.x, t.y, 3);
    for (std::size_t i = 0; i < t.x.rows(); ++i) {
        std::vector<double> expected(3, 0.0);
        for (const auto& tree : rf.trees()) expected[tree.predict(t.x.row(i))] += 0.25;
        EXPECT_EQ(rf.predict_proba(t.x.row(i)), expected);
    }
}

TEST(LogisticProperty, GradientMatchesCentralDifferences) {
    std::mt19937_64 rng(17);
    std::normal_distribution<double> g(0, 1);
    for (int trial = 0; trial < 20; ++trial) {
        const std::size_t n = 12, d = 4, k = 3;
        matrix x(0, d);
        std::vector<std::size_t> y;
        for (std::size_t i = 0; i < n; ++i) {
            x.append_row(std::vector<double>{g(rng), g(rng), g(rng), g(rng)});
            y.push_back(i % k);
        }
        std::vector<double> w(k * (d + 1));
        for (auto& v : w) v = g(rng);
        const double l2 = trial % 2 ? 0.1 : 0.0;
        const auto analytic = softmax_loss_and_gradient(x, y, k, w, l2);
        for (std::size_t j = 0; j < w.size(); ++j) {
            const double h = 1e-5;
            auto wp = w, wm = w;
            wp[j] += h;
            wm[j] -= h;
            const double numeric =
                (softmax_loss_and_gradient(x, y, k, wp, l2).loss - softmax_loss_and_gradient(x, y, k, wm, l2).loss) / (2 * h);
            EXPECT_LE(std::abs(analytic.gradient[j] - numeric), 1e-5 * std::max(1.0, std::abs(numeric)))
                << "trial " << trial << " weight " << j;
        }
    }
}

TEST(Svm, OneHotProbabilityAtDecisionArgmax) {
    const auto t = blobs(20, 3, 3, 0.2, 18);
    linear_svm svm(fast_config());
    svm.fit(t.x, t.y, 3);
    for (std::size_t i = 0; i < t.x.rows(); ++i) {
        const auto p = svm.predict_proba(t.x.row(i));
        const auto dv = svm.decision_values(t.x.row(i));
        EXPECT_EQ(p[argmax(dv)], 1.0);
        EXPECT_EQ(svm.predict(t.x.row(i)), argmax(dv));
    }
}

TEST(Model, ClassesFollowCatalogOrderAndEncode) {
    const auto data = test::small_dataset(25, 19);
    const auto m = train(algorithm::knn, data.train, dataset::task::binary);
    EXPECT_EQ(m.classes(), (std::vector<std::string>{"normal", "anomaly"}));
    EXPECT_EQ(m.class_index("anomaly"), 1u);
    EXPECT_FALSE(m.class_index("spoofing"));
    const auto enc = m.encode(data.test);
    for (std::size_t i = 0; i < enc.size(); ++i) EXPECT_EQ(enc[i] == 1, plant::is_anomaly(data.test.y_scenario[i]));
    EXPECT_THROW(m.predict_proba_raw(std::vector<double>(10, 0.0)), error);  // no scaler attached
}

TEST(Model, SaveLoadAndVersionCheck) {
    test::temp_dir dir("model");
    const auto data = test::small_dataset(25, 20);
    auto m = train(algorithm::random_forest, data.train, dataset::task::scenario);
    m.scaler = data.scaler;
    m.pipeline = data.config;
    m.dataset_sha256 = data.content_hash();
    m.save(dir / "m.json");
    const auto back = model::load(dir / "m.json");
    EXPECT_EQ(back.dataset_sha256, m.dataset_sha256);
    EXPECT_EQ(back.scaler->id(), data.scaler.id());
    auto j = m.to_json();
    j["version"] = 99;
    EXPECT_THROW(model::from_json(j), error);
    j = m.to_json();
    j["algorithm"] = "perceptron";
    EXPECT_THROW(model::from_json(j), error);
    EXPECT_THROW(model::load(dir / "missing.json"), error);
}
