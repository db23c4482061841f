#include "scada/siem/alert.hpp"

#include "scada/error.hpp"
#include "scada/plant/scenario.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <numeric>

namespace scada::siem {

alert_policy alert_policy::confidence(double tau) {
    alert_policy p{kind::confidence, tau};
    p.validate();
    return p;
}

dataset::task alert_policy::required_task() const {
    switch (type) {
    case kind::binary: return dataset::task::binary;
    case kind::component: return dataset::task::component;
    default: return dataset::task::scenario;
    }
}

void alert_policy::validate() const {
    if (type == kind::confidence && !(tau > 0 && tau < 1)) {
        throw validation_error("confidence policy: tau must be in (0,1)");
    }
}

std::string to_string(const alert_policy& p) {
    switch (p.type) {
    case alert_policy::kind::binary: return "binary";
    case alert_policy::kind::component: return "component";
    case alert_policy::kind::top1: return "top1";
    case alert_policy::kind::top2: return "top2";
    case alert_policy::kind::confidence: {
        char buf[32];
        auto [end, ec] = std::to_chars(buf, buf + sizeof buf, p.tau);
        return "confidence:" + std::string(buf, end);
    }
    }
    return "unknown";
}

alert_policy parse_policy(std::string_view text) {
    if (text == "binary") return alert_policy::binary();
    if (text == "component") return alert_policy::component();
    if (text == "top1") return alert_policy::top1();
    if (text == "top2") return alert_policy::top2();
    if (text == "confidence") return alert_policy::confidence(0.85);
    constexpr std::string_view prefix = "confidence:";
    if (text.substr(0, prefix.size()) == prefix) {
        const auto num = text.substr(prefix.size());
        double tau = 0;
        auto [ptr, ec] = std::from_chars(num.data(), num.data() + num.size(), tau);
        if (ec != std::errc{} || ptr != num.data() + num.size()) {
            throw validation_error("bad confidence value '" + std::string(num) + "'");
        }
        return alert_policy::confidence(tau);
    }
    throw validation_error("unknown policy '" + std::string(text) + "' (binary, component, top1, top2, confidence:TAU)");
}

nlohmann::json to_json(const alert_policy& p) {
    nlohmann::json j{{"kind", to_string(p)}};
    if (p.type == alert_policy::kind::confidence) {
        j["kind"] = "confidence";
        j["tau"] = p.tau;
    }
    return j;
}

alert_policy policy_from_json(const nlohmann::json& j) {
    if (j.is_string()) return parse_policy(j.get<std::string>());
    if (!j.is_object() || !j.contains("kind") || !j.at("kind").is_string()) {
        throw validation_error("policy must be a string or an object with a string 'kind'");
    }
    const auto kind = j.at("kind").get<std::string>();
    if (kind == "confidence") {
        if (!j.contains("tau")) return alert_policy::confidence(0.85);
        if (!j.at("tau").is_number()) throw validation_error("policy tau must be a number");
        return alert_policy::confidence(j.at("tau").get<double>());
    }
    return parse_policy(kind);
}

bool alert_report::contains(std::string_view label) const {
    return std::any_of(predictions.begin(), predictions.end(), [&](const auto& p) { return p.label == label; });
}

std::vector<std::size_t> rank_classes(std::span<const double> proba) {
    std::vector<std::size_t> order(proba.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return proba[a] > proba[b]; });
    return order;
}

alert_report make_report(std::span<const double> proba, const std::vector<std::string>& classes, dataset::task view,
                         const alert_policy& policy, modbus::log_time timestamp) {
    policy.validate();
    if (proba.size() != classes.size() || proba.empty()) {
        throw validation_error("report: distribution has " + std::to_string(proba.size()) + " entries for " +
                               std::to_string(classes.size()) + " classes");
    }
    double total = 0;
    for (double p : proba) {
        if (!(p >= 0) || !std::isfinite(p)) throw validation_error("report: probabilities must be finite and >= 0");
        total += p;
    }
    if (total <= 0) throw validation_error("report: all-zero distribution");

    const auto order = rank_classes(proba);
    std::size_t count = 1;
    switch (policy.type) {
    case alert_policy::kind::binary:
    case alert_policy::kind::component:
    case alert_policy::kind::top1: count = 1; break;
    case alert_policy::kind::top2: count = 2; break;
    case alert_policy::kind::confidence: count = proba[order[0]] >= policy.tau ? 1 : 2; break;
    }
    if (count == 2 && (order.size() < 2 || proba[order[1]] <= 0)) count = 1;

    alert_report r;
    r.timestamp = timestamp;
    r.policy = policy;
    for (std::size_t i = 0; i < count; ++i) r.predictions.push_back({classes[order[i]], proba[order[i]]});

    const std::string& top = r.predictions.front().label;
    r.is_anomaly = top != dataset::relabel(plant::scenario_kind::normal, view);
    switch (view) {
    case dataset::task::binary:
        if (!r.is_anomaly) r.affected_component = std::string(plant::to_string(plant::affected_component::none));
        break;
    case dataset::task::component: r.affected_component = top; break;
    case dataset::task::scenario:
        if (auto kind = plant::parse_scenario(top)) {
            r.affected_component = std::string(plant::to_string(plant::info(*kind).component));
        }
        break;
    }
    return r;
}

double round4(double p) { return std::round(p * 1e4) / 1e4; }

nlohmann::json alert_emitter::emit(const alert_report& report) {
    nlohmann::json preds = nlohmann::json::array();
    for (const auto& p : report.predictions) preds.push_back({{"label", p.label}, {"probability", round4(p.probability)}});
    return {{"seq", ++seq_},
            {"timestamp", modbus::format_iso8601(report.timestamp)},
            {"policy", to_json(report.policy)},
            {"predictions", std::move(preds)},
            {"affected_component", report.affected_component ? nlohmann::json(*report.affected_component) : nlohmann::json(nullptr)},
            {"is_anomaly", report.is_anomaly}};
}

}  // namespace scada::siem
