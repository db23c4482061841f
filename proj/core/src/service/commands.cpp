#include "scada/service/commands.hpp"

#include "scada/error.hpp"
#include "scada/plant/config.hpp"
#include "scada/plant/episode.hpp"

#include <spdlog/spdlog.h>

#include <fstream>
#include <sstream>

namespace scada::service {

namespace {

void write_file(const std::filesystem::path& p, const std::string& content) {
    if (p.has_parent_path()) std::filesystem::create_directories(p.parent_path());
    std::ofstream out(p, std::ios::binary);
    if (!out) throw error("cannot write " + p.string());
    out << content;
}

modbus::log_mapping mapping_for(const std::filesystem::path& mapping) {
    return mapping.empty() ? modbus::log_mapping::native() : modbus::log_mapping::load(mapping);
}

std::filesystem::path sidecar_path(const std::filesystem::path& model) {
    auto p = model;
    p.replace_extension(".pipeline.json");
    return p;
}

}  // namespace

std::vector<simulated_file> cmd_simulate(const simulate_options& opts) {
    if (opts.out_dir.empty()) throw config_error("simulate: no output directory");
    const auto sim = opts.config.empty() ? plant::simulation_config{} : plant::simulation_config::load(opts.config);
    if (opts.count && *opts.count == 0) throw validation_error("simulate: count must be > 0");
    std::vector<plant::scenario_kind> kinds = opts.scenarios;
    if (kinds.empty()) {
        for (const auto& row : plant::scenario_catalog()) kinds.push_back(row.kind);
    }
    std::filesystem::create_directories(opts.out_dir);

    plant::episode_options eo;
    eo.params = sim.plant;
    eo.models = sim.models;
    eo.gap_mode = opts.gap_mode;

    std::vector<simulated_file> out;
    nlohmann::json files = nlohmann::json::array();
    for (auto kind : kinds) {
        const std::size_t n = opts.count ? *opts.count : sim.instances[static_cast<std::size_t>(kind)];
        const auto log = plant::run_episode(kind, n, opts.seed, eo);
        std::ostringstream text;
        modbus::write_log(text, log.rows);
        const auto path = opts.out_dir / plant::episode_file_name(kind);
        write_file(path, text.str());
        simulated_file f{kind, path, n, dataset::sha256_hex(text.str())};
        files.push_back({{"file", path.filename().string()},
                         {"scenario", plant::to_string(kind)},
                         {"instances", n},
                         {"sha256", f.sha256}});
        spdlog::info("{}: {} instances", path.filename().string(), n);
        out.push_back(std::move(f));
    }
    nlohmann::json manifest{{"seed", opts.seed}, {"gap_mode", opts.gap_mode}, {"config", sim.to_json()}, {"files", files}};
    write_file(opts.out_dir / "manifest.json", manifest.dump(2) + "\n");
    return out;
}

dataset::prepared_dataset load_data(const std::filesystem::path& data, const std::filesystem::path& mapping,
                                    const dataset::pipeline_config& pipeline) {
    if (std::filesystem::is_directory(data)) {
        const auto logs = dataset::load_log_directory(data, mapping_for(mapping));
        return dataset::prepare(dataset::featurize_logs(logs), pipeline);
    }
    if (std::filesystem::is_regular_file(data)) return dataset::load_prepared(data);
    throw error("no such data directory or dataset file: " + data.string());
}

dataset::prepared_dataset cmd_ingest(const ingest_options& opts) {
    if (!std::filesystem::is_directory(opts.input_dir)) throw error("not a directory: " + opts.input_dir.string());
    auto data = load_data(opts.input_dir, opts.mapping, opts.pipeline);
    if (!opts.out_csv.empty()) {
        if (opts.out_csv.has_parent_path()) std::filesystem::create_directories(opts.out_csv.parent_path());
        dataset::save_prepared(data, opts.out_csv);
    }
    spdlog::info("ingested {} train / {} test instances, threshold {}", data.train.size(), data.test.size(),
                 data.threshold_used);
    return data;
}

ml::model cmd_train(const train_options& opts) {
    const auto data = load_data(opts.data, opts.mapping, opts.pipeline);
    auto model = ml::train(opts.algorithm, data.train, opts.task, opts.config);
    model.scaler = data.scaler;
    model.pipeline = data.config;
    model.dataset_sha256 = data.content_hash();
    if (!opts.model_out.empty()) {
        if (opts.model_out.has_parent_path()) std::filesystem::create_directories(opts.model_out.parent_path());
        model.save(opts.model_out);
        nlohmann::json side{{"pipeline", data.config.to_json()},
                            {"threshold_used", data.threshold_used},
                            {"scaler", data.scaler.to_json()},
                            {"scaler_id", data.scaler.id()},
                            {"dataset_sha256", model.dataset_sha256},
                            {"train_rows", data.train.size()},
                            {"test_rows", data.test.size()}};
        write_file(sidecar_path(opts.model_out), side.dump(2) + "\n");
    }
    return model;
}

std::vector<siem::alert_policy> default_policies(dataset::task view) {
    switch (view) {
    case dataset::task::binary: return {siem::alert_policy::binary()};
    case dataset::task::component: return {siem::alert_policy::component()};
    case dataset::task::scenario:
        return {siem::alert_policy::top1(), siem::alert_policy::top2(), siem::alert_policy::confidence(0.75),
                siem::alert_policy::confidence(0.85)};
    }
    return {};
}

std::vector<siem::eval_metrics> evaluate(const ml::model& model, const dataset::labeled_set& test,
                                         const std::vector<siem::alert_policy>& policies, siem::accuracy_mode mode) {
    std::vector<siem::eval_metrics> out;
    for (const auto& p : policies.empty() ? default_policies(model.task()) : policies) {
        out.push_back(siem::policy_accuracy(model, test, p, mode));
    }
    return out;
}

std::vector<siem::eval_metrics> cmd_eval(const eval_options& opts) {
    const auto model = ml::model::load(opts.model);
    const auto pipeline = model.pipeline.value_or(dataset::pipeline_config{});
    const auto data = load_data(opts.data, opts.mapping, pipeline);
    if (model.scaler && model.scaler->id() != data.scaler.id()) {
        throw validation_error("dataset scaling differs from the model's; evaluate on the data the model was trained from");
    }
    if (!model.dataset_sha256.empty() && std::filesystem::is_directory(opts.data) &&
        model.dataset_sha256 != data.content_hash()) {
        spdlog::warn("dataset hash differs from the one recorded in the model");
    }
    auto metrics = evaluate(model, data.test, opts.policies, opts.mode);
    if (!opts.out_dir.empty()) {
        std::filesystem::create_directories(opts.out_dir);
        nlohmann::json j = nlohmann::json::array();
        std::vector<std::pair<std::string, siem::eval_metrics>> rows;
        for (const auto& m : metrics) {
            j.push_back(m.to_json());
            rows.emplace_back(siem::to_string(m.policy), m);
        }
        write_file(opts.out_dir / "metrics.json", j.dump(2) + "\n");
        write_file(opts.out_dir / "metrics.txt", siem::format_table(metrics));
        write_file(opts.out_dir / "accuracy.csv", siem::bar_chart_csv(rows));
    }
    return metrics;
}

nlohmann::json experiments_result::to_json() const {
    nlohmann::json runs_json = nlohmann::json::array();
    for (const auto& [name, m] : runs) {
        auto j = m.to_json();
        j["experiment"] = name;
        runs_json.push_back(std::move(j));
    }
    return {{"dataset_sha256", dataset_sha256}, {"models", model_sha256}, {"runs", std::move(runs_json)}};
}

experiments_result cmd_experiments(const experiments_options& opts) {
    const auto data = load_data(opts.data, opts.mapping, opts.pipeline);
    experiments_result result;
    result.dataset_sha256 = data.content_hash();

    std::vector<ml::algorithm> algos = opts.algorithms;
    if (algos.empty()) algos.assign(ml::all_algorithms().begin(), ml::all_algorithms().end());

    std::vector<siem::alert_policy> scenario_policies{siem::alert_policy::top1(), siem::alert_policy::top2()};
    for (double tau : opts.taus) scenario_policies.push_back(siem::alert_policy::confidence(tau));

    for (auto algo : algos) {
        for (auto view : {dataset::task::binary, dataset::task::component, dataset::task::scenario}) {
            auto model = ml::train(algo, data.train, view, opts.config);
            model.scaler = data.scaler;
            model.pipeline = data.config;
            model.dataset_sha256 = result.dataset_sha256;
            const auto text = model.to_json().dump();
            result.model_sha256[std::string(ml::to_string(algo)) + "/" + std::string(dataset::to_string(view))] =
                dataset::sha256_hex(text);
            if (!opts.out_dir.empty()) {
                model.save(opts.out_dir / "models" /
                           (std::string(ml::to_string(algo)) + "_" + std::string(dataset::to_string(view)) + ".json"));
            }
            const auto policies = view == dataset::task::scenario ? scenario_policies : default_policies(view);
            for (const auto& m : evaluate(model, data.test, policies, opts.mode)) {
                const std::string name = view == dataset::task::scenario ? siem::to_string(m.policy)
                                                                         : std::string(dataset::to_string(view));
                result.runs.emplace_back(name, m);
            }
        }
        spdlog::info("{}: done", ml::to_string(algo));
    }

    if (!opts.out_dir.empty()) {
        std::vector<siem::eval_metrics> all;
        for (const auto& r : result.runs) all.push_back(r.second);
        write_file(opts.out_dir / "metrics.json", result.to_json().dump(2) + "\n");
        write_file(opts.out_dir / "metrics.txt", siem::format_table(all));
        write_file(opts.out_dir / "accuracy.csv", siem::bar_chart_csv(result.runs));
    }
    return result;
}

}  // namespace scada::service
