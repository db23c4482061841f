#include "scada/dataset/features.hpp"
#include "scada/dataset/pipeline.hpp"
#include "scada/ml/knn.hpp"
#include "scada/ml/model.hpp"
#include "scada/ml/tree.hpp"
#include "scada/modbus/frame.hpp"
#include "scada/plant/episode.hpp"

#include <benchmark/benchmark.h>

#include <random>

using namespace scada;

namespace {

matrix random_points(std::size_t n, std::size_t d, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(0, 1);
    matrix m(0, d);
    std::vector<double> row(d);
    for (std::size_t i = 0; i < n; ++i) {
        for (auto& v : row) v = u(rng);
        m.append_row(row);
    }
    return m;
}

const dataset::prepared_dataset& synthetic() {
    static const auto data = [] {
        std::map<std::string, dataset::labeled_log> logs;
        for (const auto& row : plant::scenario_catalog()) {
            auto log = plant::run_episode(row.kind, 300, 1);
            logs.emplace(plant::episode_file_name(row.kind), dataset::labeled_log{row.kind, std::move(log.rows)});
        }
        return dataset::prepare(dataset::featurize_logs(logs), {});
    }();
    return data;
}

}  // namespace

static void BM_KdTreeQuery(benchmark::State& state) {
    const auto pts = random_points(static_cast<std::size_t>(state.range(0)), dataset::feature_count, 1);
    const ml::kd_tree tree(pts);
    const auto queries = random_points(256, dataset::feature_count, 2);
    std::size_t q = 0;
    for (auto _ : state) {
        benchmark::DoNotOptimize(tree.nearest(queries.row(q++ % queries.rows()), 5));
    }
}
BENCHMARK(BM_KdTreeQuery)->Arg(1000)->Arg(10000)->Arg(50000);

static void BM_NaiveQuery(benchmark::State& state) {
    const auto pts = random_points(static_cast<std::size_t>(state.range(0)), dataset::feature_count, 1);
    const auto queries = random_points(256, dataset::feature_count, 2);
    std::size_t q = 0;
    for (auto _ : state) {
        benchmark::DoNotOptimize(ml::nearest_naive(pts, queries.row(q++ % queries.rows()), 5));
    }
}
BENCHMARK(BM_NaiveQuery)->Arg(1000)->Arg(10000);

// Plant features are mostly binary bits, far from uniform in 10-D.
static void BM_KnnPredictSynthetic(benchmark::State& state) {
    const auto& data = synthetic();
    const auto model = ml::train(ml::algorithm::knn, data.train, dataset::task::scenario);
    std::size_t q = 0;
    for (auto _ : state) benchmark::DoNotOptimize(model.predict_proba(data.test.x.row(q++ % data.test.size())));
}
BENCHMARK(BM_KnnPredictSynthetic);

static void BM_DecisionTreeFit(benchmark::State& state) {
    const auto& data = synthetic();
    for (auto _ : state) {
        benchmark::DoNotOptimize(ml::train(ml::algorithm::decision_tree, data.train, dataset::task::scenario));
    }
    state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(data.train.size()));
}
BENCHMARK(BM_DecisionTreeFit)->Unit(benchmark::kMillisecond);

static void BM_FrameRoundTrip(benchmark::State& state) {
    modbus::read_response resp{7, 1, {1, 2, 3, 4, 5, 6, 7, 8, 9, 10}};
    for (auto _ : state) {
        const auto bytes = modbus::build_response(resp);
        benchmark::DoNotOptimize(modbus::parse_response(bytes));
    }
}
BENCHMARK(BM_FrameRoundTrip);

static void BM_Featurize(benchmark::State& state) {
    const auto log = plant::run_episode(plant::scenario_kind::spoofing, 5000, 3);
    const auto inst = dataset::extract_instances(log.rows);
    for (auto _ : state) benchmark::DoNotOptimize(dataset::featurize(inst));
    state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(inst.size()));
}
BENCHMARK(BM_Featurize)->Unit(benchmark::kMicrosecond);
BENCHMARK_MAIN();
