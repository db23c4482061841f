#include "scada/error.hpp"
#include "scada/ml/model.hpp"
#include "scada/siem/alert.hpp"
#include "scada/siem/eval.hpp"

#include "test_support.hpp"

#include <gtest/gtest.h>

#include <random>

using namespace scada;
using namespace scada::siem;

namespace {

const std::vector<std::string> three{"normal", "plastic_bag", "spoofing"};

std::vector<std::string> labels_of(const alert_report& r) {
    std::vector<std::string> out;
    for (const auto& p : r.predictions) out.push_back(p.label);
    return out;
}

// Brute-force oracle written from the four bucket definitions.
double oracle_accuracy(const std::vector<std::string>& pred, const std::vector<std::string>& truth) {
    double tp = 0, tn = 0, fp = 0, fn = 0, other = 0;
    for (std::size_t i = 0; i < pred.size(); ++i) {
        const bool truth_normal = truth[i] == "normal", pred_normal = pred[i] == "normal";
        if (truth_normal && pred_normal) tn += 1;
        else if (truth_normal) fp += 1;
        else if (pred_normal) fn += 1;
        else if (pred[i] == truth[i]) tp += 1;
        else other += 1;
    }
    return (tp + tn) / (tp + tn + fp + fn + other);
}

}  // namespace

TEST(Policy, ParseFormatAndJson) {
    EXPECT_EQ(parse_policy("top2"), alert_policy::top2());
    EXPECT_EQ(parse_policy("confidence:0.75"), alert_policy::confidence(0.75));
    EXPECT_EQ(parse_policy("confidence"), alert_policy::confidence(0.85));
    EXPECT_EQ(to_string(alert_policy::confidence(0.75)), "confidence:0.75");
    EXPECT_THROW(parse_policy("confidence:1.0"), validation_error);
    EXPECT_THROW(parse_policy("confidence:0"), validation_error);
    EXPECT_THROW(parse_policy("top3"), validation_error);
    for (const auto& p : {alert_policy::binary(), alert_policy::component(), alert_policy::top1(),
                          alert_policy::top2(), alert_policy::confidence(0.6)}) {
        EXPECT_EQ(policy_from_json(to_json(p)), p);
        EXPECT_EQ(parse_policy(to_string(p)), p);
    }
    EXPECT_EQ(alert_policy::binary().required_task(), dataset::task::binary);
    EXPECT_EQ(alert_policy::confidence(0.5).required_task(), dataset::task::scenario);
}

TEST(Report, SpecExamples) {
    const std::vector<double> p{0.1, 0.3, 0.6};
    auto r = make_report(p, three, dataset::task::scenario, alert_policy::top2());
    EXPECT_EQ(labels_of(r), (std::vector<std::string>{"spoofing", "plastic_bag"}));
    EXPECT_TRUE(r.is_anomaly);
    EXPECT_EQ(r.affected_component, "network");

    r = make_report(std::vector<double>{0.05, 0.05, 0.9}, three, dataset::task::scenario, alert_policy::confidence(0.85));
    EXPECT_EQ(labels_of(r), (std::vector<std::string>{"spoofing"}));
    r = make_report(p, three, dataset::task::scenario, alert_policy::confidence(0.85));
    EXPECT_EQ(labels_of(r), (std::vector<std::string>{"spoofing", "plastic_bag"}));
    r = make_report(p, three, dataset::task::scenario, alert_policy::top1());
    EXPECT_EQ(labels_of(r), (std::vector<std::string>{"spoofing"}));
}

TEST(Report, EdgeCases) {
    // Second label only when it has non-zero probability.
    auto r = make_report(std::vector<double>{0, 1, 0}, three, dataset::task::scenario, alert_policy::top2());
    EXPECT_EQ(labels_of(r), (std::vector<std::string>{"plastic_bag"}));
    // Ties keep class order.
    r = make_report(std::vector<double>{0.5, 0.0, 0.5}, three, dataset::task::scenario, alert_policy::top2());
    EXPECT_EQ(labels_of(r), (std::vector<std::string>{"normal", "spoofing"}));
    EXPECT_FALSE(r.is_anomaly);
    EXPECT_THROW(make_report(std::vector<double>{0, 0, 0}, three, dataset::task::scenario, alert_policy::top1()),
                 validation_error);
    EXPECT_THROW(make_report(std::vector<double>{1, -0.1, 0.1}, three, dataset::task::scenario, alert_policy::top1()),
                 validation_error);
    EXPECT_THROW(make_report(std::vector<double>{1, 0}, three, dataset::task::scenario, alert_policy::top1()),
                 validation_error);
    r = make_report(std::vector<double>{0.2, 0.8}, {"normal", "anomaly"}, dataset::task::binary, alert_policy::binary());
    EXPECT_TRUE(r.is_anomaly);
    EXPECT_FALSE(r.affected_component);
    r = make_report(std::vector<double>{0.2, 0.8}, {"none", "network"}, dataset::task::component,
                    alert_policy::component());
    EXPECT_EQ(r.affected_component, "network");
}

TEST(Emitter, SequenceAndRounding) {
    alert_emitter e;
    const auto r = make_report(std::vector<double>{0.0, 1.0 / 3.0, 2.0 / 3.0}, three, dataset::task::scenario,
                               alert_policy::top2(), modbus::default_log_epoch());
    std::uint64_t last = 0;
    for (int i = 0; i < 50; ++i) {
        const auto j = e.emit(r);
        EXPECT_GT(j.at("seq").get<std::uint64_t>(), last);
        last = j.at("seq").get<std::uint64_t>();
    }
    const auto j = e.emit(r);
    EXPECT_EQ(j.at("timestamp"), "2018-03-01T10:00:00.0Z");
    EXPECT_DOUBLE_EQ(j.at("predictions")[0].at("probability").get<double>(), 0.6667);
    EXPECT_EQ(j.at("predictions")[1].at("label"), "plastic_bag");
    EXPECT_EQ(j.at("affected_component"), "network");
    EXPECT_EQ(round4(0.12345), 0.1235);
}

TEST(Accuracy, Examples) {
    std::vector<std::string> truth(8, "spoofing");
    truth.insert(truth.end(), 2, "normal");
    EXPECT_DOUBLE_EQ(overall_accuracy(truth, truth, "normal"), 1.0);
    const std::vector<std::string> pred{"normal", "spoofing", "dos", "normal"};
    const std::vector<std::string> tr{"normal", "normal", "spoofing", "spoofing"};
    const auto c = count_outcomes(pred, tr, "normal");
    EXPECT_EQ(c, (outcome_counts{0, 1, 1, 1, 1}));
    EXPECT_DOUBLE_EQ(overall_accuracy(c), 0.25);
    EXPECT_DOUBLE_EQ(overall_accuracy(c, accuracy_mode::strict_paper_buckets), 1.0 / 3.0);
    EXPECT_THROW(overall_accuracy(pred, {"normal"}, "normal"), validation_error);
    EXPECT_THROW(overall_accuracy({}, {}, "normal"), validation_error);
}

TEST(AccuracyProperty, MatchesBruteForceOracle) {
    std::mt19937_64 rng(21);
    const std::vector<std::string> labels{"normal", "a", "b", "c", "d"};
    std::uniform_int_distribution<std::size_t> pick(0, labels.size() - 1), size(1, 60);
    for (int trial = 0; trial < 50; ++trial) {
        const auto n = size(rng);
        std::vector<std::string> pred, truth;
        for (std::size_t i = 0; i < n; ++i) {
            truth.push_back(labels[pick(rng)]);
            pred.push_back(rng() % 3 ? truth.back() : labels[pick(rng)]);
        }
        EXPECT_EQ(overall_accuracy(pred, truth, "normal"), oracle_accuracy(pred, truth));
        const auto c = count_outcomes(pred, truth, "normal");
        EXPECT_EQ(c.total(), n);
    }
}

class Evaluated : public ::testing::Test {
protected:
    static void SetUpTestSuite() { data_ = new dataset::prepared_dataset(test::small_dataset(50, 23)); }
    static void TearDownTestSuite() { delete data_; }
    static dataset::prepared_dataset* data_;
};
dataset::prepared_dataset* Evaluated::data_ = nullptr;

TEST_F(Evaluated, MetricsInvariants) {
    for (auto algo : ml::all_algorithms()) {
        ml::train_config cfg;
        cfg.lr_epochs = 300;
        cfg.svm_epochs = 200;
        const auto m = ml::train(algo, data_->train, dataset::task::scenario, cfg);
        for (const auto& policy : {alert_policy::top1(), alert_policy::top2(), alert_policy::confidence(0.75)}) {
            const auto e = policy_accuracy(m, data_->test, policy);
            EXPECT_EQ(e.counts.total(), data_->test.size());
            EXPECT_EQ(e.histogram[0] + e.histogram[1] + e.histogram[2] + e.histogram[3], data_->test.size());
            std::size_t confusion_total = 0;
            for (const auto& row : e.confusion) for (auto v : row) confusion_total += v;
            EXPECT_EQ(confusion_total, data_->test.size());
            for (const auto& [cls, row] : e.rescue) EXPECT_LE(row.rescued, row.misclassified) << cls;
            const auto j = e.to_json();
            EXPECT_EQ(j.at("test_size"), data_->test.size());
        }
        EXPECT_THROW(policy_accuracy(m, data_->test, alert_policy::binary()), validation_error);
    }
}

TEST_F(Evaluated, SupportBoundsInHistograms) {
    ml::train_config cfg;
    cfg.knn_k = 3;
    cfg.rf_trees = 2;
    const auto knn = ml::train(ml::algorithm::knn, data_->train, dataset::task::scenario, cfg);
    const auto h = probable_count_histogram(knn, data_->test);
    EXPECT_EQ(h[3], 0u);
    const auto rf = ml::train(ml::algorithm::random_forest, data_->train, dataset::task::scenario, cfg);
    const auto hr = probable_count_histogram(rf, data_->test);
    EXPECT_EQ(hr[2] + hr[3], 0u);
}

TEST_F(Evaluated, PerfectModelHasEmptyRescueTable) {
    // 1-NN evaluated on its own training rows is always right.
    ml::train_config cfg;
    cfg.knn_k = 1;
    const auto m = ml::train(ml::algorithm::knn, data_->train, dataset::task::scenario, cfg);
    auto unique_rows = data_->train;
    const auto table = rescue_analysis(m, unique_rows);
    ASSERT_EQ(table.size(), m.classes().size());
    std::size_t misclassified = 0;
    for (const auto& [cls, row] : table) misclassified += row.misclassified;
    // Duplicate feature rows with different labels are the only way 1-NN can miss here.
    const auto e = policy_accuracy(m, unique_rows, alert_policy::top1());
    EXPECT_EQ(misclassified, e.test_size - static_cast<std::size_t>(std::llround(e.accuracy * double(e.test_size))));
}

TEST(Rescue, TwoClassOverlapHandBuilt) {
    // Overlapping 1-D classes; 3-NN with votes split 2:1 in the overlap.
    dataset::labeled_set train;
    train.feature_names = {"f"};
    auto add = [&](dataset::labeled_set& s, double v, plant::scenario_kind k) {
        s.append(std::vector<double>{v}, k, "f", s.size());
    };
    for (double v : {0.0, 0.1, 0.2, 0.45, 0.55}) add(train, v, plant::scenario_kind::normal);
    for (double v : {0.5, 0.6, 0.8, 0.9, 1.0}) add(train, v, plant::scenario_kind::spoofing);
    ml::train_config cfg;
    cfg.knn_k = 3;
    const auto m = ml::train(ml::algorithm::knn, train, dataset::task::scenario, cfg);
    dataset::labeled_set test;
    test.feature_names = {"f"};
    add(test, 0.5, plant::scenario_kind::normal);    // neighbours 0.5 S, 0.45 N, 0.55 N -> N (right)
    add(test, 0.56, plant::scenario_kind::spoofing);  // 0.55 N, 0.6 S, 0.5 S -> S (right)
    add(test, 0.47, plant::scenario_kind::spoofing);  // 0.45 N, 0.5 S, 0.55 N -> N (wrong, rescued)
    const auto table = rescue_analysis(m, test);
    const auto& spoof = table[1].second;
    EXPECT_EQ(table[1].first, "spoofing");
    EXPECT_EQ(spoof.misclassified, 1u);
    EXPECT_EQ(spoof.rescued, 1u);
    EXPECT_EQ(spoof.misdirected_to.at("normal"), 1u);
    EXPECT_EQ(table[0].second.misclassified, 0u);
}

// Sandwich: Top1 <= Confidence(tau) <= Top2 over many random models and test sets.
TEST(PolicyProperty, Sandwich) {
    const auto files = test::simulated_features(40, 31);
    std::mt19937_64 rng(32);
    const auto algos = ml::all_algorithms();
    std::size_t violations = 0;
    for (int trial = 0; trial < 30; ++trial) {
        dataset::pipeline_config pc;
        pc.seed = rng();
        const auto data = dataset::prepare(files, pc);
        ml::train_config cfg;
        cfg.seed = rng();
        cfg.knn_k = 1 + rng() % 7;
        cfg.rf_trees = 1 + rng() % 12;
        cfg.lr_epochs = 100;
        cfg.svm_epochs = 100;
        const auto m = ml::train(algos[static_cast<std::size_t>(trial) % algos.size()], data.train,
                                 dataset::task::scenario, cfg);
        const double top1 = policy_accuracy(m, data.test, alert_policy::top1()).accuracy;
        const double top2 = policy_accuracy(m, data.test, alert_policy::top2()).accuracy;
        for (double tau : {0.75, 0.85}) {
            const double c = policy_accuracy(m, data.test, alert_policy::confidence(tau)).accuracy;
            if (!(top1 <= c && c <= top2)) ++violations;
        }
    }
    EXPECT_EQ(violations, 0u);
}

TEST(Output, TableAndCsv) {
    eval_metrics m;
    m.algorithm = "knn";
    m.policy = alert_policy::top2();
    m.accuracy = 0.95;
    m.test_size = 10;
    const auto table = format_table({m});
    EXPECT_NE(table.find("knn"), std::string::npos);
    EXPECT_NE(table.find("95.00%"), std::string::npos);
    const auto csv = bar_chart_csv({{"trial2", m}});
    EXPECT_EQ(csv.substr(0, csv.find('\n')), "experiment,algorithm,policy,accuracy");
    EXPECT_NE(csv.find("trial2,knn,top2,0.95"), std::string::npos);
}
