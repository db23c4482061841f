#pragma once

#include "scada/dataset/features.hpp"
#include "scada/ml/model.hpp"
#include "scada/modbus/poller.hpp"
#include "scada/plant/loop.hpp"
#include "scada/siem/alert.hpp"

#include <nlohmann/json.hpp>

#include <deque>
#include <filesystem>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace scada::service {

struct inject_request {
    plant::scenario_kind scenario;
};
struct mitigate_request {
    plant::mitigation_action action;
};
struct set_policy_request {
    siem::alert_policy policy;
};

/// A validated operator message. `id` is echoed back in the acknowledgement.
struct operator_message {
    std::variant<inject_request, mitigate_request, set_policy_request> request;
    nlohmann::json id;
};

/// Parse raw text from a client. Never throws: malformed input yields the reason.
struct parse_result {
    std::optional<operator_message> message;
    std::string error;
    nlohmann::json id;  ///< echoed even for rejected messages when it could be read
};
parse_result parse_operator_message(std::string_view text);

/// JSON form of an action, e.g. {"kind":"open_valve","valve":"drain_main"}.
nlohmann::json to_json(const plant::mitigation_action& a);
plant::mitigation_action mitigation_from_json(const nlohmann::json& j);

struct schedule_entry {
    double time_s = 0;  ///< simulated seconds since the loop started
    plant::scenario_kind scenario = plant::scenario_kind::normal;
};

struct run_config {
    enum class mode : std::uint8_t { serve, headless };

    mode run_mode = mode::serve;
    std::filesystem::path plant_config;  ///< optional simulation_config JSON
    std::vector<schedule_entry> schedule;
    std::filesystem::path model_path;
    siem::alert_policy policy = siem::alert_policy::top2();
    std::uint16_t http_port = 8080;
    std::uint16_t modbus_port = 1502;
    std::string bind_address = "127.0.0.1";
    std::uint64_t seed = 42;
    std::filesystem::path output_dir;
    double speed = 1.0;          ///< simulated seconds per wall-clock second
    std::size_t max_ticks = 0;   ///< headless: cycles to run (0 = until the schedule ends plus 10 s)

    /// Schedule times strictly increasing and >= 0, referenced files exist, speed > 0.
    void validate() const;
    static run_config from_json(const nlohmann::json& j);
    nlohmann::json to_json() const;
};

struct live_options {
    plant::plant_params params;
    plant::scenario_model_config models;
    std::uint64_t seed = 42;
    siem::alert_policy policy = siem::alert_policy::top2();
    modbus::log_time epoch = modbus::default_log_epoch();
};

/// One outbound message: {type, seq, payload}.
struct envelope {
    std::string type;  ///< telemetry | alert | ack
    std::uint64_t seq = 0;
    nlohmann::json payload;

    nlohmann::json to_json() const { return {{"type", type}, {"seq", seq}, {"payload", payload}}; }
};

/// The simulate -> poll -> featurize -> classify -> alert pipeline, one 0.1 s cycle
/// per step(). Single-threaded and deterministic: the same options, model and
/// message sequence give the same envelopes.
/// The plant first runs the same unlogged lead-in as a simulated episode, so the
/// first classified window matches the first training instance.
class live_loop {
public:
    live_loop(std::shared_ptr<const ml::model> model, live_options options);

    /// Queue an operator message; it is applied and acknowledged on the next step.
    /// A message the loop cannot serve (policy needing another label view) is
    /// rejected at once and the rejection returned.
    std::optional<envelope> submit(operator_message message);

    /// Immediate rejection for a message that could not be parsed or is incompatible.
    envelope reject(const nlohmann::json& id, const std::string& reason);

    /// Run one control cycle. Output order: acks, telemetry, then an alert if any.
    std::vector<envelope> step();

    /// Cycles run since construction, not counting the lead-in.
    std::uint64_t ticks() const { return loop_.ticks() - lead_in_ticks_; }
    double sim_time_s() const;
    plant::scenario_kind scenario() const { return loop_.scenario(); }
    const siem::alert_policy& policy() const { return policy_; }
    const ml::model& model() const { return *model_; }
    const modbus::snapshot_channel& channel() const { return loop_.channel(); }
    std::uint64_t alerts_emitted() const { return emitter_.last_seq(); }
    std::uint64_t last_seq() const { return seq_; }
    std::size_t poll_timeouts() const { return poller_.timeouts(); }

    /// Let an external Modbus server mirror the DoS flood state.
    void on_flood_change(std::function<void(bool)> callback) { flood_callback_ = std::move(callback); }

private:
    envelope make(std::string type, nlohmann::json payload);
    nlohmann::json state_json() const;

    std::shared_ptr<const ml::model> model_;
    live_options options_;
    plant::closed_loop loop_;
    modbus::channel_source source_;
    modbus::poller poller_;
    siem::alert_policy policy_;
    siem::alert_emitter emitter_;
    std::deque<dataset::instance> window_;
    std::vector<operator_message> pending_;
    std::uint64_t lead_in_ticks_ = 0;
    std::uint64_t seq_ = 0;
    bool flooded_ = false;
    std::function<void(bool)> flood_callback_;
};

/// Run a scripted schedule without networking; returns every envelope in order.
std::vector<envelope> run_headless(const run_config& cfg, std::shared_ptr<const ml::model> model);

}  // namespace scada::service
