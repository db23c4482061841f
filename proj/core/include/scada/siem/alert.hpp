#pragma once

#include "scada/dataset/labels.hpp"
#include "scada/modbus/log.hpp"

#include <nlohmann/json.hpp>

#include <optional>
#include <span>
#include <string>
#include <vector>

namespace scada::siem {

/// How a probability distribution becomes an operator alert.
struct alert_policy {
    enum class kind : std::uint8_t { binary, component, top1, top2, confidence };

    kind type = kind::top1;
    double tau = 0.85;  ///< confidence only: one label when the top probability reaches tau

    static alert_policy binary() { return {kind::binary, 0.85}; }
    static alert_policy component() { return {kind::component, 0.85}; }
    static alert_policy top1() { return {kind::top1, 0.85}; }
    static alert_policy top2() { return {kind::top2, 0.85}; }
    static alert_policy confidence(double tau);

    /// The label view a model must be trained on to serve this policy.
    dataset::task required_task() const;
    void validate() const;

    bool operator==(const alert_policy&) const = default;
};

/// "binary", "component", "top1", "top2", "confidence:0.85"
std::string to_string(const alert_policy& p);
/// Accepts the forms above; "confidence" alone means tau 0.85. Throws validation_error.
alert_policy parse_policy(std::string_view text);
nlohmann::json to_json(const alert_policy& p);
alert_policy policy_from_json(const nlohmann::json& j);

struct ranked_label {
    std::string label;
    double probability = 0;
};

struct alert_report {
    modbus::log_time timestamp;
    alert_policy policy;
    std::vector<ranked_label> predictions;  ///< 1 or 2 entries, most probable first
    std::optional<std::string> affected_component;  ///< unknown for binary reports on anomalies
    bool is_anomaly = false;

    bool contains(std::string_view label) const;
};

/// Class indices ordered by probability, highest first; ties keep class order.
std::vector<std::size_t> rank_classes(std::span<const double> proba);

/// Build the report for one predict_proba output. A second label is listed only when it has
/// non-zero probability. Throws validation_error for an all-zero, negative or mis-sized distribution.
alert_report make_report(std::span<const double> proba, const std::vector<std::string>& classes, dataset::task view,
                         const alert_policy& policy, modbus::log_time timestamp = {});

/// Turns reports into alert events with a strictly increasing sequence number.
class alert_emitter {
public:
    nlohmann::json emit(const alert_report& report);
    std::uint64_t last_seq() const { return seq_; }

private:
    std::uint64_t seq_ = 0;
};

/// Probability rounded to 4 decimals, as published in alert events.
double round4(double p);

}  // namespace scada::siem
