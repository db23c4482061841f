#pragma once

#include "scada/dataset/pipeline.hpp"
#include "scada/ml/model.hpp"
#include "scada/plant/scenario.hpp"
#include "scada/siem/eval.hpp"

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace scada::service {

struct simulate_options {
    std::vector<plant::scenario_kind> scenarios;  ///< empty: all 15
    std::optional<std::size_t> count;             ///< override every per-scenario count
    std::uint64_t seed = 42;
    std::filesystem::path config;  ///< optional simulation_config JSON
    std::filesystem::path out_dir;
    bool gap_mode = false;
};

struct simulated_file {
    plant::scenario_kind scenario;
    std::filesystem::path path;
    std::size_t instances = 0;
    std::string sha256;
};

/// One "NN_<id>.csv" per scenario plus manifest.json (seed, config, file hashes).
std::vector<simulated_file> cmd_simulate(const simulate_options& opts);

/// A directory of logs is featurized and prepared with `pipeline`; a prepared
/// dataset CSV is loaded as saved (its own pipeline config wins).
dataset::prepared_dataset load_data(const std::filesystem::path& data, const std::filesystem::path& mapping,
                                    const dataset::pipeline_config& pipeline);

struct ingest_options {
    std::filesystem::path input_dir;
    std::filesystem::path mapping;  ///< empty: native simulator layout
    dataset::pipeline_config pipeline;
    std::filesystem::path out_csv;
};

dataset::prepared_dataset cmd_ingest(const ingest_options& opts);

struct train_options {
    std::filesystem::path data;
    std::filesystem::path mapping;
    dataset::task task = dataset::task::scenario;
    ml::algorithm algorithm = ml::algorithm::knn;
    ml::train_config config;
    dataset::pipeline_config pipeline;
    std::filesystem::path model_out;  ///< empty: do not write
};

/// Train on the training split. Writes the model and "<model>.pipeline.json".
ml::model cmd_train(const train_options& opts);

/// Policies evaluated by default for a model's label view.
std::vector<siem::alert_policy> default_policies(dataset::task view);

struct eval_options {
    std::filesystem::path model;
    std::filesystem::path data;
    std::filesystem::path mapping;
    std::vector<siem::alert_policy> policies;  ///< empty: default_policies
    siem::accuracy_mode mode = siem::accuracy_mode::exact_label;
    std::filesystem::path out_dir;  ///< empty: do not write
};

/// Evaluate on the held-out split the model's pipeline produces from `data`.
std::vector<siem::eval_metrics> cmd_eval(const eval_options& opts);

/// Evaluate an in-memory model on a test set under several policies.
std::vector<siem::eval_metrics> evaluate(const ml::model& model, const dataset::labeled_set& test,
                                         const std::vector<siem::alert_policy>& policies,
                                         siem::accuracy_mode mode = siem::accuracy_mode::exact_label);

struct experiments_options {
    std::filesystem::path data;
    std::filesystem::path mapping;
    dataset::pipeline_config pipeline;
    ml::train_config config;
    std::vector<ml::algorithm> algorithms;  ///< empty: all six
    std::vector<double> taus{0.75, 0.85};
    siem::accuracy_mode mode = siem::accuracy_mode::exact_label;
    std::filesystem::path out_dir;  ///< empty: do not write
};

struct experiments_result {
    std::string dataset_sha256;
    /// (experiment name, metrics); experiments are binary, component, top1, top2, confidence.
    std::vector<std::pair<std::string, siem::eval_metrics>> runs;
    /// SHA-256 of each serialized model, keyed "<algorithm>/<task>".
    std::map<std::string, std::string> model_sha256;

    nlohmann::json to_json() const;
};

/// Every algorithm on the three label views and every alert policy, on one split.
experiments_result cmd_experiments(const experiments_options& opts);

}  // namespace scada::service
