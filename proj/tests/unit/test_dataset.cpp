#include "scada/dataset/features.hpp"
#include "scada/dataset/labels.hpp"
#include "scada/dataset/pipeline.hpp"
#include "scada/error.hpp"

#include "test_support.hpp"

#include <gtest/gtest.h>

#include <fstream>
#include <random>
#include <set>
#include <sstream>

using namespace scada;
using namespace scada::dataset;
using plant::scenario_kind;

namespace {

std::vector<instance> series(const std::vector<std::uint16_t>& reg4, double dt = 0.1) {
    std::vector<instance> out;
    for (std::size_t i = 0; i < reg4.size(); ++i) {
        instance inst;
        inst.time.tenths = static_cast<std::int64_t>(std::llround(i * dt * 10));
        inst.reg4 = reg4[i];
        out.push_back(inst);
    }
    return out;
}

std::vector<modbus::log_row> rows_with_reg4(std::size_t n, std::uint16_t start) {
    std::vector<modbus::log_row> rows;
    for (std::size_t i = 0; i < n; ++i) {
        modbus::register_file rf;
        rf.regs[4] = static_cast<std::uint16_t>(start + i);
        const auto r = modbus::rows_for(rf, {modbus::default_log_epoch().tenths + static_cast<std::int64_t>(i)});
        rows.insert(rows.end(), r.begin(), r.end());
    }
    return rows;
}

per_file_features toy_files(const std::vector<std::pair<scenario_kind, std::size_t>>& spec) {
    per_file_features out;
    for (auto [kind, n] : spec) {
        const auto name = plant::episode_file_name(kind);
        auto inst = extract_instances(rows_with_reg4(n + rate_window, static_cast<std::uint16_t>(100 * (int(kind) + 1))),
                                      name, kind);
        out[name] = featurize(inst);
    }
    return out;
}

std::string csv_of(const labeled_set& s) {
    std::ostringstream out;
    write_labeled_set(out, s);
    return out.str();
}

}  // namespace

TEST(Instances, ThirtyRowsAreThreeInstances) {
    const auto inst = extract_instances(rows_with_reg4(3, 50), "f.csv", scenario_kind::humidity);
    ASSERT_EQ(inst.size(), 3u);
    EXPECT_EQ(inst[2].reg4, 52);
    EXPECT_EQ(inst[0].scenario, scenario_kind::humidity);
    EXPECT_EQ(inst[0].source_file, "f.csv");
}

TEST(Instances, NormalEpisodeGivesItsCount) {
    const auto log = plant::run_episode(scenario_kind::normal, 5519, 42);
    EXPECT_EQ(log.rows.size(), 55190u);
    EXPECT_EQ(extract_instances(log.rows).size(), 5519u);
}

TEST(Instances, MissingRegisterNamesTimestamp) {
    auto rows = rows_with_reg4(2, 0);
    rows.erase(rows.begin() + 14);  // register 4 of the second instance
    try {
        extract_instances(rows);
        FAIL();
    } catch (const structural_error& e) {
        EXPECT_NE(std::string(e.what()).find("10:00:00.1"), std::string::npos) << e.what();
    }
}

TEST(Rate, Examples) {
    std::vector<std::uint16_t> ramp;
    for (int i = 0; i <= 10; ++i) ramp.push_back(static_cast<std::uint16_t>(2000 + 100 * i));
    EXPECT_DOUBLE_EQ(rate_of_change(series(ramp), 10), 1000.0);
    EXPECT_DOUBLE_EQ(rate_of_change(series(std::vector<std::uint16_t>(20, 4321)), 15), 0.0);
    EXPECT_THROW(rate_of_change(series(ramp), 9), validation_error);
    auto frozen = series(ramp);
    for (auto& f : frozen) f.time.tenths = 0;
    EXPECT_THROW(rate_of_change(frozen, 10), structural_error);
}

TEST(Rate, DosWindowIsFlat) {
    std::vector<std::uint16_t> stale(40, 3100);
    const auto inst = series(stale);
    for (std::size_t i = 10; i < inst.size(); ++i) EXPECT_EQ(rate_of_change(inst, i), 0.0);
}

// Oracle: the quotient recomputed independently in long double.
TEST(RateProperty, MatchesIndependentRecomputation) {
    std::mt19937_64 rng(3);
    std::uniform_int_distribution<int> step(0, 10000), gap(1, 5);
    for (int trial = 0; trial < 200; ++trial) {
        std::vector<instance> inst;
        std::int64_t t = 0;
        for (int i = 0; i < 60; ++i) {
            t += gap(rng);
            instance x;
            x.time.tenths = t;
            x.reg4 = static_cast<std::uint16_t>(step(rng));
            inst.push_back(x);
        }
        for (std::size_t i = 10; i < inst.size(); ++i) {
            const long double num = static_cast<long double>(inst[i].reg4) - inst[i - 10].reg4;
            const long double den = (static_cast<long double>(inst[i].time.tenths) - inst[i - 10].time.tenths) / 10.0L;
            const double expected = static_cast<double>(num / den);
            const double got = rate_of_change(inst, i);
            EXPECT_LE(std::abs(got - expected), 1e-12 * std::max(1.0, std::abs(expected)));
        }
    }
}

TEST(Features, OrderAndFirstTenDropped) {
    EXPECT_EQ(feature_names()[0], "s0");
    EXPECT_EQ(feature_names()[8], "depth");
    EXPECT_EQ(feature_names()[9], "rate");
    instance inst;
    inst.reg2 = modbus::reg2_ds0 | modbus::reg2_ds2;
    inst.reg3 = modbus::reg3_pump1 | modbus::reg3_pump2_valve;
    inst.reg4 = 4444;
    const auto f = make_features(inst, 12.5);
    EXPECT_EQ(f, (feature_vector{1, 0, 1, 0, 1, 0, 0, 1, 4444, 12.5}));
    const auto featured = featurize(extract_instances(rows_with_reg4(25, 0)));
    ASSERT_EQ(featured.size(), 15u);
    EXPECT_EQ(featured.front().index, 10u);
    EXPECT_DOUBLE_EQ(featured.front().features[9], 10.0);
}

TEST(Labels, Views) {
    EXPECT_EQ(relabel(scenario_kind::spoofing, task::binary), "anomaly");
    EXPECT_EQ(relabel(scenario_kind::spoofing, task::component), "network");
    EXPECT_EQ(relabel(scenario_kind::normal, task::binary), "normal");
    EXPECT_EQ(relabel(scenario_kind::normal, task::component), "none");
    EXPECT_EQ(relabel(scenario_kind::hit_medium, task::component), "whole_subsystem");
    EXPECT_EQ(relabel(scenario_kind::hit_medium, task::scenario), "hit_medium");
    EXPECT_EQ(all_labels(task::binary), (std::vector<std::string>{"normal", "anomaly"}));
    EXPECT_EQ(all_labels(task::component).size(), 6u);
    EXPECT_EQ(all_labels(task::scenario).size(), 15u);
    EXPECT_EQ(parse_task("component"), task::component);
    EXPECT_FALSE(parse_task("regression"));
}

TEST(LabelsProperty, ViewsAreConsistent) {
    const auto data = test::small_dataset(40, 1);
    const auto& s = data.serialized;
    const auto bin = s.labels(task::binary), comp = s.labels(task::component), scen = s.labels(task::scenario);
    for (std::size_t i = 0; i < s.size(); ++i) {
        EXPECT_EQ(bin[i] == "anomaly", s.y_scenario[i] != scenario_kind::normal);
        EXPECT_EQ(comp[i], plant::to_string(plant::info(s.y_scenario[i]).component));
        EXPECT_EQ(scen[i], plant::to_string(s.y_scenario[i]));
    }
}

TEST(Threshold, Examples) {
    std::map<std::string, std::vector<int>> files{{"a", std::vector<int>(226)}, {"b", std::vector<int>(144)},
                                                  {"c", std::vector<int>(307)}};
    for (const auto& [name, v] : apply_threshold(files, 144)) EXPECT_EQ(v.size(), 144u) << name;
    const auto same = apply_threshold(files, 1000000000);
    for (const auto& [name, v] : same) EXPECT_EQ(v.size(), files[name].size());
    EXPECT_THROW(apply_threshold(files, 0), validation_error);
    std::map<std::string, std::vector<int>> ordered{{"x", {5, 6, 7, 8}}};
    EXPECT_EQ(apply_threshold(ordered, 2)["x"], (std::vector<int>{5, 6}));
}

TEST(Threshold, DefaultIsSmallestFileAndBalancesClasses) {
    const auto files = toy_files({{scenario_kind::normal, 30}, {scenario_kind::dos, 12}, {scenario_kind::humidity, 20}});
    EXPECT_EQ(default_threshold(files), 12u);
    const auto data = prepare(files, {});
    std::map<scenario_kind, int> counts;
    for (auto k : data.serialized.y_scenario) ++counts[k];
    for (auto [k, n] : counts) EXPECT_EQ(n, 12) << plant::to_string(k);
}

TEST(Serialize, FileOrderAndFeatureMask) {
    const auto files = toy_files({{scenario_kind::spoofing, 3}, {scenario_kind::normal, 3}});
    const auto s = serialize(files);
    ASSERT_EQ(s.size(), 6u);
    EXPECT_EQ(s.y_scenario.front(), scenario_kind::normal);  // "01_normal.csv" sorts first
    EXPECT_EQ(s.source_index.front(), 10u);
    const auto masked = serialize(files, {"depth", "rate"});
    EXPECT_EQ(masked.x.cols(), 2u);
    EXPECT_EQ(masked.feature_names, (std::vector<std::string>{"depth", "rate"}));
    EXPECT_EQ(masked.x(0, 0), s.x(0, 8));
    EXPECT_THROW(serialize(files, {"depth", "colour"}), config_error);
}

TEST(Scaler, Examples) {
    matrix train(0, 2);
    train.append_row(std::vector<double>{2000, 5});
    train.append_row(std::vector<double>{3000, 5});
    auto sc = minmax_scaler::fit(train);
    matrix test(0, 2);
    test.append_row(std::vector<double>{2500, 5});
    test.append_row(std::vector<double>{9000, -3});
    test.append_row(std::vector<double>{-10, 5});
    const auto t = sc.transform(test);
    EXPECT_DOUBLE_EQ(t(0, 0), 0.5);
    EXPECT_DOUBLE_EQ(t(0, 1), 0.0);  // constant feature
    EXPECT_DOUBLE_EQ(t(1, 0), 1.0);
    EXPECT_DOUBLE_EQ(t(1, 1), 0.0);
    EXPECT_DOUBLE_EQ(t(2, 0), 0.0);
    EXPECT_THROW(minmax_scaler::fit(matrix(0, 2)), error);
    const auto back = minmax_scaler::from_json(sc.to_json());
    EXPECT_EQ(back.id(), sc.id());
    EXPECT_EQ(back.transform(test), t);
}

TEST(ScalerProperty, AdversarialTestStaysInUnitBox) {
    std::mt19937_64 rng(4);
    std::normal_distribution<double> wide(0, 1e4);
    matrix train(0, 3), test(0, 3);
    for (int i = 0; i < 50; ++i) train.append_row(std::vector<double>{wide(rng) / 100, wide(rng) / 100, 1.0});
    for (int i = 0; i < 500; ++i) test.append_row(std::vector<double>{wide(rng), wide(rng), wide(rng)});
    const auto t = minmax_scaler::fit(train).transform(test);
    for (double v : t.data()) {
        EXPECT_GE(v, 0.0);
        EXPECT_LE(v, 1.0);
    }
}

TEST(Split, SizesStratificationAndDeterminism) {
    std::vector<scenario_kind> labels;
    for (const auto& row : plant::scenario_catalog()) labels.insert(labels.end(), 144, row.kind);
    ASSERT_EQ(labels.size(), 2160u);
    const auto s = stratified_split(labels, 0.8, 9);
    EXPECT_EQ(s.train.size(), 1728u);
    EXPECT_EQ(s.test.size(), 432u);
    std::set<std::size_t> all(s.train.begin(), s.train.end());
    for (auto i : s.test) EXPECT_TRUE(all.insert(i).second);
    EXPECT_EQ(all.size(), labels.size());
    const auto again = stratified_split(labels, 0.8, 9);
    EXPECT_EQ(again.train, s.train);
    EXPECT_NE(stratified_split(labels, 0.8, 10).train, s.train);
}

TEST(SplitProperty, PerClassShareWithinOneRow) {
    std::mt19937_64 rng(6);
    std::uniform_int_distribution<int> cls(0, 14), size(20, 400);
    std::uniform_real_distribution<double> ratio(0.5, 0.95);
    for (int trial = 0; trial < 100; ++trial) {
        std::vector<scenario_kind> labels(static_cast<std::size_t>(size(rng)));
        for (auto& l : labels) l = static_cast<scenario_kind>(cls(rng));
        const double r = ratio(rng);
        const auto s = stratified_split(labels, r, static_cast<std::uint64_t>(trial));
        EXPECT_EQ(s.train.size(), static_cast<std::size_t>(std::llround(r * labels.size())));
        std::map<scenario_kind, double> total, train;
        for (auto l : labels) total[l] += 1;
        for (auto i : s.train) train[labels[i]] += 1;
        for (auto [k, n] : total) EXPECT_LE(std::abs(train[k] - r * n), 1.0) << trial;
    }
}

TEST(Prepare, ScalerFitsTrainOnlyByDefault) {
    const auto data = test::small_dataset(40, 2);
    EXPECT_EQ(data.train.size() + data.test.size(), data.serialized.size());
    const auto train_rows = data.serialized.subset(stratified_split(data.serialized.y_scenario, 0.8, data.config.seed).train);
    EXPECT_EQ(data.scaler.id(), minmax_scaler::fit(train_rows.x).id());
    for (double v : data.train.x.data()) {
        EXPECT_GE(v, 0.0);
        EXPECT_LE(v, 1.0);
    }
    auto cfg = data.config;
    cfg.paper_faithful_order = true;
    const auto leaky = prepare(test::simulated_features(40, 2), cfg);
    EXPECT_EQ(leaky.scaler.id(), minmax_scaler::fit(data.serialized.x).id());
}

TEST(Prepare, DeterministicContentHash) {
    const auto a = test::small_dataset(40, 3);
    const auto b = test::small_dataset(40, 3);
    EXPECT_EQ(a.content_hash(), b.content_hash());
    EXPECT_EQ(csv_of(a.train), csv_of(b.train));
    EXPECT_NE(a.content_hash(), test::small_dataset(40, 4).content_hash());
    EXPECT_EQ(sha256_hex("abc"), "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}

TEST(Prepare, ConfigJsonRoundTrip) {
    pipeline_config c;
    c.threshold = 99;
    c.train_ratio = 0.75;
    c.seed = 5;
    c.paper_faithful_order = true;
    c.features = {"depth", "rate"};
    EXPECT_EQ(pipeline_config::from_json(c.to_json()).to_json(), c.to_json());
    EXPECT_THROW(pipeline_config::from_json({{"train_ratio", 1.5}}), config_error);
}

TEST(Persist, SaveAndLoadPrepared) {
    test::temp_dir dir("prep");
    const auto data = test::small_dataset(30, 5);
    save_prepared(data, dir / "d.csv");
    ASSERT_TRUE(std::filesystem::exists(dir / "d.json"));
    const auto back = load_prepared(dir / "d.csv");
    EXPECT_EQ(back.train.x, data.train.x);
    EXPECT_EQ(back.test.y_scenario, data.test.y_scenario);
    EXPECT_EQ(back.test.source_file, data.test.source_file);
    EXPECT_EQ(back.scaler.id(), data.scaler.id());
    EXPECT_EQ(back.threshold_used, data.threshold_used);
}

TEST(Directory, LoadsNativeAndMappedNames) {
    test::temp_dir dir("logs");
    modbus::write_log(dir / "11_spoofing.csv", rows_with_reg4(15, 10));
    modbus::write_log(dir / "humidity.csv", rows_with_reg4(15, 10));
    modbus::write_log(dir / "mystery.csv", rows_with_reg4(15, 10));
    modbus::log_mapping m;
    m.file_labels = {{"mystery.csv", "dos"}};
    const auto logs = load_log_directory(dir.path(), m);
    ASSERT_EQ(logs.size(), 3u);
    EXPECT_EQ(logs.at("mystery.csv").scenario, scenario_kind::dos);
    EXPECT_EQ(logs.at("humidity.csv").scenario, scenario_kind::humidity);
    EXPECT_EQ(load_log_directory(dir.path()).size(), 2u);  // unknown file skipped
    test::temp_dir empty("empty");
    EXPECT_THROW(load_log_directory(empty.path()), error);
}
