#include "scada/error.hpp"
#include "scada/service/commands.hpp"
#include "scada/service/server.hpp"

#include <CLI11.hpp>
#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include <fstream>
#include <iostream>

namespace {

using namespace scada;

struct pipeline_flags {
    std::size_t threshold = 0;
    double train_ratio = 0.8;
    std::uint64_t seed = 42;
    bool paper_order = false;

    void add(CLI::App* app) {
        app->add_option("--threshold", threshold, "instances kept per file (0: smallest file count)");
        app->add_option("--train-ratio", train_ratio, "fraction of each class used for training")->check(CLI::Range(0.0, 1.0));
        app->add_option("--split-seed", seed, "seed for the stratified split");
        app->add_flag("--paper-order", paper_order, "fit the scaler on all rows before splitting");
    }

    dataset::pipeline_config get() const {
        dataset::pipeline_config c;
        if (threshold) c.threshold = threshold;
        c.train_ratio = train_ratio;
        c.seed = seed;
        c.paper_faithful_order = paper_order;
        return c;
    }
};

nlohmann::json read_json(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw config_error("cannot open " + path);
    try {
        return nlohmann::json::parse(in);
    } catch (const nlohmann::json::exception& e) {
        throw config_error(path + ": " + e.what());
    }
}

ml::algorithm algorithm_arg(const std::string& text) {
    auto a = ml::parse_algorithm(text);
    if (!a) throw config_error("unknown algorithm '" + text + "' (lr, nb, knn, svm, dt, rf)");
    return *a;
}

siem::accuracy_mode mode_arg(const std::string& text) {
    if (text == "exact") return siem::accuracy_mode::exact_label;
    if (text == "strict") return siem::accuracy_mode::strict_paper_buckets;
    throw config_error("accuracy mode must be exact or strict");
}

plant::scenario_kind scenario_arg(const std::string& text) {
    auto k = plant::parse_scenario(text);
    if (!k) throw config_error("unknown scenario '" + text + "'");
    return *k;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Water-treatment SCADA anomaly classifier"};
    app.require_subcommand(1);
    app.fallthrough();
    std::string log_level = "info";
    app.add_option("--log-level", log_level, "trace, debug, info, warn, error, off");

    // simulate
    auto* sim = app.add_subcommand("simulate", "generate one log file per scenario");
    std::string sim_out, sim_config;
    std::vector<std::string> sim_scenarios;
    std::size_t sim_count = 0;
    std::uint64_t sim_seed = 42;
    bool sim_gap = false;
    sim->add_option("-o,--out", sim_out, "output directory")->required();
    sim->add_option("-s,--scenario", sim_scenarios, "scenario (slug, name or number); repeatable, default all");
    sim->add_option("-n,--count", sim_count, "instances per scenario (default: per-scenario counts)");
    sim->add_option("--seed", sim_seed, "random seed");
    sim->add_option("-c,--config", sim_config, "simulation config JSON")->check(CLI::ExistingFile);
    sim->add_flag("--gap-mode", sim_gap, "DoS drops instances instead of logging a timeout row");

    // ingest
    auto* ing = app.add_subcommand("ingest", "featurize, balance, split and normalize a log directory");
    std::string ing_in, ing_mapping, ing_out;
    pipeline_flags ing_pipe;
    ing->add_option("-i,--input", ing_in, "directory of log CSVs")->required()->check(CLI::ExistingDirectory);
    ing->add_option("-m,--mapping", ing_mapping, "column/label mapping JSON for foreign logs")->check(CLI::ExistingFile);
    ing->add_option("-o,--out", ing_out, "prepared dataset CSV (a .json sidecar is written next to it)")->required();
    ing_pipe.add(ing);

    // train
    auto* tr = app.add_subcommand("train", "train one classifier");
    std::string tr_data, tr_mapping, tr_out, tr_task = "scenario", tr_algo = "knn", tr_cfg;
    pipeline_flags tr_pipe;
    std::optional<std::size_t> tr_k, tr_trees;
    std::optional<std::uint64_t> tr_seed;
    tr->add_option("-d,--data", tr_data, "log directory or prepared dataset CSV")->required()->check(CLI::ExistingPath);
    tr->add_option("-m,--mapping", tr_mapping, "mapping JSON for foreign logs")->check(CLI::ExistingFile);
    tr->add_option("-t,--task", tr_task, "binary, component or scenario");
    tr->add_option("-a,--algorithm", tr_algo, "lr, nb, knn, svm, dt or rf");
    tr->add_option("--train-config", tr_cfg, "hyperparameter JSON")->check(CLI::ExistingFile);
    tr->add_option("--k", tr_k, "k-NN neighbours");
    tr->add_option("--trees", tr_trees, "random forest size");
    tr->add_option("--seed", tr_seed, "training seed");
    tr->add_option("-o,--out", tr_out, "model JSON")->required();
    tr_pipe.add(tr);

    // eval
    auto* ev = app.add_subcommand("eval", "evaluate a model on its held-out split");
    std::string ev_model, ev_data, ev_mapping, ev_out, ev_mode = "exact";
    std::vector<std::string> ev_policies;
    ev->add_option("--model", ev_model, "model JSON")->required()->check(CLI::ExistingFile);
    ev->add_option("-d,--data", ev_data, "log directory or prepared dataset CSV")->required()->check(CLI::ExistingPath);
    ev->add_option("-m,--mapping", ev_mapping, "mapping JSON for foreign logs")->check(CLI::ExistingFile);
    ev->add_option("-p,--policy", ev_policies, "binary, component, top1, top2, confidence:TAU; repeatable");
    ev->add_option("--mode", ev_mode, "exact or strict");
    ev->add_option("-o,--out", ev_out, "directory for metrics.json, metrics.txt, accuracy.csv");

    // experiments
    auto* ex = app.add_subcommand("experiments", "all algorithms on every label view and alert policy");
    std::string ex_data, ex_mapping, ex_out, ex_mode = "exact", ex_cfg;
    std::vector<std::string> ex_algos;
    std::vector<double> ex_taus{0.75, 0.85};
    pipeline_flags ex_pipe;
    ex->add_option("-d,--data", ex_data, "log directory or prepared dataset CSV")->required()->check(CLI::ExistingPath);
    ex->add_option("-m,--mapping", ex_mapping, "mapping JSON for foreign logs")->check(CLI::ExistingFile);
    ex->add_option("-a,--algorithm", ex_algos, "restrict to these algorithms; repeatable");
    ex->add_option("--tau", ex_taus, "confidence thresholds");
    ex->add_option("--train-config", ex_cfg, "hyperparameter JSON")->check(CLI::ExistingFile);
    ex->add_option("--mode", ex_mode, "exact or strict");
    ex->add_option("-o,--out", ex_out, "output directory");
    ex_pipe.add(ex);

    // serve
    auto* sv = app.add_subcommand("serve", "run the live loop with HTTP, WebSocket and Modbus endpoints");
    std::string sv_config, sv_model, sv_policy, sv_bind, sv_plant, sv_out;
    std::vector<std::string> sv_schedule;
    std::optional<std::uint16_t> sv_http, sv_modbus;
    std::optional<std::uint64_t> sv_seed;
    std::optional<double> sv_speed;
    std::optional<std::size_t> sv_ticks;
    bool sv_headless = false;
    sv->add_option("-c,--config", sv_config, "run config JSON; flags override it")->check(CLI::ExistingFile);
    sv->add_option("--model", sv_model, "model JSON");
    sv->add_option("-p,--policy", sv_policy, "alert policy");
    sv->add_option("--plant-config", sv_plant, "simulation config JSON")->check(CLI::ExistingFile);
    sv->add_option("--http-port", sv_http, "HTTP/WebSocket port");
    sv->add_option("--modbus-port", sv_modbus, "Modbus/TCP port");
    sv->add_option("--bind", sv_bind, "bind address");
    sv->add_option("--seed", sv_seed, "simulation seed");
    sv->add_option("--speed", sv_speed, "simulated seconds per wall-clock second");
    sv->add_option("--max-ticks", sv_ticks, "stop after this many 0.1 s cycles");
    sv->add_option("--schedule", sv_schedule, "TIME:SCENARIO injection; repeatable");
    sv->add_option("-o,--output-dir", sv_out, "where alerts (and headless envelopes) are written");
    sv->add_flag("--headless", sv_headless, "no networking; print envelopes as JSON lines");

    CLI11_PARSE(app, argc, argv);
    spdlog::set_level(spdlog::level::from_str(log_level));
    spdlog::set_pattern("%^%l%$: %v");

    try {
        if (*sim) {
            service::simulate_options o;
            for (const auto& s : sim_scenarios) o.scenarios.push_back(scenario_arg(s));
            if (sim_count) o.count = sim_count;
            o.seed = sim_seed;
            o.config = sim_config;
            o.out_dir = sim_out;
            o.gap_mode = sim_gap;
            for (const auto& f : service::cmd_simulate(o)) {
                fmt::print("{}  {}  {}\n", f.sha256, f.instances, f.path.filename().string());
            }
        } else if (*ing) {
            service::ingest_options o{ing_in, ing_mapping, ing_pipe.get(), ing_out};
            const auto data = service::cmd_ingest(o);
            fmt::print("{} train, {} test, threshold {}, sha256 {}\n", data.train.size(), data.test.size(),
                       data.threshold_used, data.content_hash());
        } else if (*tr) {
            service::train_options o;
            o.data = tr_data;
            o.mapping = tr_mapping;
            auto task = dataset::parse_task(tr_task);
            if (!task) throw config_error("task must be binary, component or scenario");
            o.task = *task;
            o.algorithm = algorithm_arg(tr_algo);
            if (!tr_cfg.empty()) o.config = ml::train_config::from_json(read_json(tr_cfg));
            if (tr_k) o.config.knn_k = *tr_k;
            if (tr_trees) o.config.rf_trees = *tr_trees;
            if (tr_seed) o.config.seed = *tr_seed;
            o.config.validate();
            o.pipeline = tr_pipe.get();
            o.model_out = tr_out;
            const auto model = service::cmd_train(o);
            fmt::print("trained {} ({} classes) -> {}\n", ml::to_string(model.kind()), model.classes().size(), tr_out);
        } else if (*ev) {
            service::eval_options o;
            o.model = ev_model;
            o.data = ev_data;
            o.mapping = ev_mapping;
            for (const auto& p : ev_policies) o.policies.push_back(siem::parse_policy(p));
            o.mode = mode_arg(ev_mode);
            o.out_dir = ev_out;
            fmt::print("{}", siem::format_table(service::cmd_eval(o)));
        } else if (*ex) {
            service::experiments_options o;
            o.data = ex_data;
            o.mapping = ex_mapping;
            o.pipeline = ex_pipe.get();
            if (!ex_cfg.empty()) o.config = ml::train_config::from_json(read_json(ex_cfg));
            for (const auto& a : ex_algos) o.algorithms.push_back(algorithm_arg(a));
            o.taus = ex_taus;
            o.mode = mode_arg(ex_mode);
            o.out_dir = ex_out;
            const auto result = service::cmd_experiments(o);
            std::vector<siem::eval_metrics> all;
            for (const auto& r : result.runs) all.push_back(r.second);
            fmt::print("{}", siem::format_table(all));
        } else if (*sv) {
            service::run_config cfg;
            if (!sv_config.empty()) cfg = service::run_config::from_json(read_json(sv_config));
            if (sv_headless) cfg.run_mode = service::run_config::mode::headless;
            if (!sv_model.empty()) cfg.model_path = sv_model;
            if (!sv_policy.empty()) cfg.policy = siem::parse_policy(sv_policy);
            if (!sv_plant.empty()) cfg.plant_config = sv_plant;
            if (sv_http) cfg.http_port = *sv_http;
            if (sv_modbus) cfg.modbus_port = *sv_modbus;
            if (!sv_bind.empty()) cfg.bind_address = sv_bind;
            if (sv_seed) cfg.seed = *sv_seed;
            if (sv_speed) cfg.speed = *sv_speed;
            if (sv_ticks) cfg.max_ticks = *sv_ticks;
            if (!sv_out.empty()) cfg.output_dir = sv_out;
            if (!sv_schedule.empty()) {
                cfg.schedule.clear();
                for (const auto& item : sv_schedule) {
                    const auto colon = item.find(':');
                    if (colon == std::string::npos) throw config_error("schedule entries look like 30:spoofing");
                    cfg.schedule.push_back({std::stod(item.substr(0, colon)), scenario_arg(item.substr(colon + 1))});
                }
            }
            cfg.validate();
            if (cfg.run_mode == service::run_config::mode::headless) {
                const auto envelopes = service::run_headless(cfg, service::load_run_model(cfg));
                std::ofstream file;
                if (!cfg.output_dir.empty()) {
                    std::filesystem::create_directories(cfg.output_dir);
                    file.open(cfg.output_dir / "events.jsonl");
                }
                std::ostream& out = file.is_open() ? static_cast<std::ostream&>(file) : std::cout;
                for (const auto& e : envelopes) out << e.to_json().dump() << '\n';
            } else {
                service::serve(cfg);
            }
        }
    } catch (const scada::error& e) {
        spdlog::error("{}", e.what());
        return 1;
    } catch (const std::exception& e) {
        spdlog::error("{}", e.what());
        return 2;
    }
    return 0;
}
