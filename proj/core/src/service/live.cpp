#include "scada/service/live.hpp"

#include "scada/error.hpp"
#include "scada/plant/config.hpp"

#include <cmath>

namespace scada::service {

namespace {

using action_kind = plant::mitigation_action::kind;

constexpr std::array<std::pair<std::string_view, action_kind>, 7> action_names{{
    {"stop_pump1", action_kind::stop_pump1},
    {"stop_pump2", action_kind::stop_pump2},
    {"start_pump", action_kind::start_pump},
    {"open_valve", action_kind::open_valve},
    {"close_valve", action_kind::close_valve},
    {"clear_scenario", action_kind::clear_scenario},
    {"reset_sensor", action_kind::reset_sensor},
}};

std::string_view kind_name(action_kind k) {
    for (const auto& [name, kind] : action_names) {
        if (kind == k) return name;
    }
    return "unknown";
}

const nlohmann::json& require(const nlohmann::json& j, const char* key) {
    if (!j.contains(key)) throw validation_error(std::string("missing field '") + key + "'");
    return j.at(key);
}

std::string require_string(const nlohmann::json& j, const char* key) {
    const auto& v = require(j, key);
    if (!v.is_string()) throw validation_error(std::string("field '") + key + "' must be a string");
    return v.get<std::string>();
}

nlohmann::json request_json(const operator_message& m) {
    return std::visit(
        [](const auto& r) -> nlohmann::json {
            using T = std::decay_t<decltype(r)>;
            if constexpr (std::is_same_v<T, inject_request>) {
                return {{"type", "inject"}, {"scenario", plant::to_string(r.scenario)}};
            } else if constexpr (std::is_same_v<T, mitigate_request>) {
                return {{"type", "mitigate"}, {"action", to_json(r.action)}};
            } else {
                return {{"type", "set_policy"}, {"policy", siem::to_json(r.policy)}};
            }
        },
        m.request);
}

}  // namespace

nlohmann::json to_json(const plant::mitigation_action& a) {
    nlohmann::json j{{"kind", kind_name(a.type)}};
    switch (a.type) {
    case action_kind::start_pump: j["pump"] = a.pump; break;
    case action_kind::open_valve:
    case action_kind::close_valve: j["valve"] = plant::to_string(a.valve); break;
    case action_kind::reset_sensor: j["sensor"] = plant::to_string(a.sensor); break;
    default: break;
    }
    return j;
}

plant::mitigation_action mitigation_from_json(const nlohmann::json& j) {
    const std::string name = j.is_string() ? j.get<std::string>() : (j.is_object() ? require_string(j, "kind") : "");
    if (name.empty()) throw validation_error("action must be a string or an object with 'kind'");
    plant::mitigation_action a;
    bool known = false;
    for (const auto& [n, kind] : action_names) {
        if (n == name) {
            a.type = kind;
            known = true;
        }
    }
    if (!known) throw validation_error("unknown action '" + name + "'");
    switch (a.type) {
    case action_kind::start_pump: {
        if (!j.is_object()) throw validation_error("start_pump needs 'pump'");
        const auto& p = require(j, "pump");
        if (!p.is_number_integer() || (p.get<long long>() != 1 && p.get<long long>() != 2)) {
            throw validation_error("pump must be 1 or 2");
        }
        a.pump = static_cast<int>(p.get<long long>());
        break;
    }
    case action_kind::open_valve:
    case action_kind::close_valve: {
        if (!j.is_object()) throw validation_error(name + " needs 'valve'");
        const auto v = plant::parse_valve(require_string(j, "valve"));
        if (!v) throw validation_error("unknown valve");
        a.valve = *v;
        break;
    }
    case action_kind::reset_sensor: {
        if (!j.is_object()) throw validation_error("reset_sensor needs 'sensor'");
        const auto s = plant::parse_sensor(require_string(j, "sensor"));
        if (!s) throw validation_error("unknown sensor");
        a.sensor = *s;
        break;
    }
    default: break;
    }
    return a;
}

parse_result parse_operator_message(std::string_view text) {
    parse_result out;
    const auto j = nlohmann::json::parse(text.begin(), text.end(), nullptr, false);
    if (j.is_discarded()) {
        out.error = "message is not valid JSON";
        return out;
    }
    if (!j.is_object()) {
        out.error = "message must be a JSON object";
        return out;
    }
    if (j.contains("id")) out.id = j.at("id");
    try {
        const auto type = require_string(j, "type");
        operator_message m;
        m.id = out.id;
        if (type == "inject") {
            const auto name = require_string(j, "scenario");
            const auto kind = plant::parse_scenario(name);
            if (!kind) throw validation_error("unknown scenario '" + name + "'");
            m.request = inject_request{*kind};
        } else if (type == "mitigate") {
            m.request = mitigate_request{mitigation_from_json(require(j, "action"))};
        } else if (type == "set_policy") {
            m.request = set_policy_request{siem::policy_from_json(require(j, "policy"))};
        } else {
            throw validation_error("unknown message type '" + type + "'");
        }
        out.message = std::move(m);
    } catch (const std::exception& e) {
        out.error = e.what();
    }
    return out;
}

void run_config::validate() const {
    if (!(speed > 0) || !std::isfinite(speed)) throw config_error("run config: speed must be > 0");
    double prev = -1;
    for (const auto& e : schedule) {
        if (!(e.time_s >= 0) || e.time_s <= prev) {
            throw config_error("run config: schedule times must be >= 0 and strictly increasing");
        }
        prev = e.time_s;
    }
    if (model_path.empty()) throw config_error("run config: no model given");
    if (!std::filesystem::is_regular_file(model_path)) throw config_error("model not found: " + model_path.string());
    if (!plant_config.empty() && !std::filesystem::is_regular_file(plant_config)) {
        throw config_error("plant config not found: " + plant_config.string());
    }
    policy.validate();
}

run_config run_config::from_json(const nlohmann::json& j) {
    run_config c;
    try {
        const auto m = j.value("mode", std::string("serve"));
        if (m == "serve") {
            c.run_mode = mode::serve;
        } else if (m == "headless") {
            c.run_mode = mode::headless;
        } else {
            throw config_error("run config: mode must be serve or headless");
        }
        c.plant_config = j.value("plant_config", std::string{});
        c.model_path = j.value("model", std::string{});
        if (j.contains("policy")) c.policy = siem::policy_from_json(j.at("policy"));
        c.http_port = j.value("http_port", c.http_port);
        c.modbus_port = j.value("modbus_port", c.modbus_port);
        c.bind_address = j.value("bind_address", c.bind_address);
        c.seed = j.value("seed", c.seed);
        c.output_dir = j.value("output_dir", std::string{});
        c.speed = j.value("speed", c.speed);
        c.max_ticks = j.value("max_ticks", c.max_ticks);
        for (const auto& e : j.value("schedule", nlohmann::json::array())) {
            const auto name = e.at("scenario").get<std::string>();
            const auto kind = plant::parse_scenario(name);
            if (!kind) throw config_error("run config: unknown scenario '" + name + "'");
            c.schedule.push_back({e.at("time_s").get<double>(), *kind});
        }
    } catch (const nlohmann::json::exception& e) {
        throw config_error(std::string("run config: ") + e.what());
    } catch (const validation_error& e) {
        throw config_error(std::string("run config: ") + e.what());
    }
    return c;
}

nlohmann::json run_config::to_json() const {
    nlohmann::json sched = nlohmann::json::array();
    for (const auto& e : schedule) sched.push_back({{"time_s", e.time_s}, {"scenario", plant::to_string(e.scenario)}});
    return {{"mode", run_mode == mode::serve ? "serve" : "headless"},
            {"plant_config", plant_config.string()},
            {"model", model_path.string()},
            {"policy", siem::to_json(policy)},
            {"http_port", http_port},
            {"modbus_port", modbus_port},
            {"bind_address", bind_address},
            {"seed", seed},
            {"output_dir", output_dir.string()},
            {"speed", speed},
            {"max_ticks", max_ticks},
            {"schedule", std::move(sched)}};
}

live_loop::live_loop(std::shared_ptr<const ml::model> model, live_options options)
    : model_(std::move(model)),
      options_(options),
      loop_(options.params, options.seed, options.models),
      source_(loop_.channel()),
      poller_(source_),
      policy_(options.policy) {
    if (!model_) throw config_error("live loop: no model loaded");
    if (!model_->scaler) throw config_error("live loop: model has no scaler");
    if (model_->feature_count() != dataset::feature_count) {
        throw config_error("live loop: model expects " + std::to_string(model_->feature_count()) +
                           " features; the live path produces all " + std::to_string(dataset::feature_count));
    }
    policy_.validate();
    if (policy_.required_task() != model_->task()) {
        throw config_error("live loop: policy " + siem::to_string(policy_) + " needs a " +
                           std::string(dataset::to_string(policy_.required_task())) + " model");
    }
    lead_in_ticks_ = static_cast<std::uint64_t>(std::llround(options_.params.lead_in_s / options_.params.poll_dt_s));
    for (std::uint64_t i = 0; i < lead_in_ticks_; ++i) loop_.tick();
}

double live_loop::sim_time_s() const { return static_cast<double>(ticks()) * options_.params.poll_dt_s; }

envelope live_loop::make(std::string type, nlohmann::json payload) {
    return {std::move(type), ++seq_, std::move(payload)};
}

envelope live_loop::reject(const nlohmann::json& id, const std::string& reason) {
    return make("ack", {{"ok", false}, {"id", id}, {"reason", reason}});
}

std::optional<envelope> live_loop::submit(operator_message message) {
    if (const auto* p = std::get_if<set_policy_request>(&message.request)) {
        if (p->policy.required_task() != model_->task()) {
            return reject(message.id, "policy " + siem::to_string(p->policy) + " needs a " +
                                          std::string(dataset::to_string(p->policy.required_task())) +
                                          " model; loaded model is " + std::string(dataset::to_string(model_->task())));
        }
    }
    pending_.push_back(std::move(message));
    return std::nullopt;
}

nlohmann::json live_loop::state_json() const {
    const auto& s = loop_.state();
    const auto& c = loop_.command();
    return {{"tick", ticks()},
            {"scenario", plant::to_string(loop_.scenario())},
            {"policy", siem::to_json(policy_)},
            {"command",
             {{"pump1", c.pump1_on},
              {"pump2", c.pump2_on},
              {"pump1_valve", c.pump1_valve_open},
              {"pump2_valve", c.pump2_valve_open},
              {"drain_main", c.drain_main_open},
              {"drain_secondary", c.drain_secondary_open}}},
            {"volumes_l",
             {{"main", s.main_volume_l},
              {"secondary", s.secondary_volume_l},
              {"recovery", s.recovery_volume_l},
              {"spilled", s.spilled_l}}}};
}

std::vector<envelope> live_loop::step() {
    std::vector<envelope> out;

    std::vector<operator_message> applied;
    applied.swap(pending_);
    for (const auto& m : applied) {
        if (const auto* r = std::get_if<inject_request>(&m.request)) {
            loop_.request_scenario(r->scenario);
        } else if (const auto* r = std::get_if<mitigate_request>(&m.request)) {
            loop_.request_mitigation(r->action);
        } else if (const auto* r = std::get_if<set_policy_request>(&m.request)) {
            policy_ = r->policy;
        }
    }

    const auto cycle = loop_.tick();
    const bool flood = loop_.scenario() == plant::scenario_kind::dos;
    if (flood != flooded_) {
        flooded_ = flood;
        source_.set_flooded(flood);
        if (flood_callback_) flood_callback_(flood);
    }

    const auto tenths = static_cast<std::int64_t>(std::llround(options_.params.poll_dt_s * 10));
    const std::uint64_t tick = cycle.tick - lead_in_ticks_;
    const modbus::log_time now{options_.epoch.tenths + static_cast<std::int64_t>(tick) * tenths};
    std::optional<double> rate;
    if (poller_.poll_tick(now)) {
        const auto& regs = poller_.last_logged().regs;
        window_.push_back({now, regs[2], regs[3], regs[4], {}, plant::scenario_kind::normal});
        while (window_.size() > dataset::rate_window + 1) window_.pop_front();
    }

    for (const auto& m : applied) {
        out.push_back(make("ack", {{"ok", true}, {"id", m.id}, {"request", request_json(m)}, {"state", state_json()}}));
    }

    nlohmann::json registers = nlohmann::json::array();
    for (auto v : poller_.last_logged().regs) registers.push_back(v);
    std::optional<siem::alert_report> report;
    if (window_.size() == dataset::rate_window + 1) {
        const std::vector<dataset::instance> w(window_.begin(), window_.end());
        rate = dataset::rate_of_change(w, dataset::rate_window);
        const auto features = dataset::make_features(w.back(), *rate);
        const auto proba = model_->predict_proba_raw(features);
        report = siem::make_report(proba, model_->classes(), model_->task(), policy_, now);
    }

    const auto& s = cycle.state;
    const auto& c = cycle.command;
    out.push_back(make("telemetry",
                       {{"tick", tick},
                        {"t_s", sim_time_s()},
                        {"timestamp", modbus::format_iso8601(now)},
                        {"scenario", plant::to_string(loop_.scenario())},
                        {"true",
                         {{"main_l", s.main_volume_l},
                          {"secondary_l", s.secondary_volume_l},
                          {"recovery_l", s.recovery_volume_l},
                          {"spilled_l", s.spilled_l},
                          {"ultrasound_step", cycle.truth.ultrasound_step},
                          {"discrete", cycle.truth.discrete}}},
                        {"sensed",
                         {{"ultrasound_step", cycle.sensed.ultrasound_step},
                          {"discrete", cycle.sensed.discrete},
                          {"registers", std::move(registers)}}},
                        {"command",
                         {{"pump1", c.pump1_on},
                          {"pump2", c.pump2_on},
                          {"pump1_valve", c.pump1_valve_open},
                          {"pump2_valve", c.pump2_valve_open},
                          {"drain_main", c.drain_main_open},
                          {"drain_secondary", c.drain_secondary_open}}},
                        {"rate", rate ? nlohmann::json(*rate) : nlohmann::json(nullptr)},
                        {"classified", report.has_value()},
                        {"policy", siem::to_json(policy_)}}));

    if (report && report->is_anomaly) {
        auto event = emitter_.emit(*report);
        event["tick"] = tick;
        out.push_back(make("alert", std::move(event)));
    }
    return out;
}

std::vector<envelope> run_headless(const run_config& cfg, std::shared_ptr<const ml::model> model) {
    live_options opts;
    if (!cfg.plant_config.empty()) {
        const auto sim = plant::simulation_config::load(cfg.plant_config);
        opts.params = sim.plant;
        opts.models = sim.models;
    }
    opts.seed = cfg.seed;
    opts.policy = cfg.policy;
    live_loop loop(std::move(model), opts);

    std::size_t ticks = cfg.max_ticks;
    if (ticks == 0) {
        const double end = cfg.schedule.empty() ? 0.0 : cfg.schedule.back().time_s;
        ticks = static_cast<std::size_t>(std::llround((end + 10.0) / opts.params.poll_dt_s));
    }
    std::vector<envelope> out;
    std::size_t next = 0;
    for (std::size_t t = 0; t < ticks; ++t) {
        // A scheduled scenario is submitted before the first cycle at or after its time.
        while (next < cfg.schedule.size() && cfg.schedule[next].time_s <= loop.sim_time_s() + 1e-9) {
            operator_message m{inject_request{cfg.schedule[next].scenario}, nlohmann::json("schedule-" + std::to_string(next))};
            if (auto rejected = loop.submit(std::move(m))) out.push_back(std::move(*rejected));
            ++next;
        }
        auto step = loop.step();
        out.insert(out.end(), std::make_move_iterator(step.begin()), std::make_move_iterator(step.end()));
    }
    return out;
}

}  // namespace scada::service
