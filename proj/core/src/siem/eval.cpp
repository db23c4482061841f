#include "scada/siem/eval.hpp"

#include "scada/error.hpp"

#include <fmt/format.h>

#include <algorithm>

namespace scada::siem {

std::string_view to_string(accuracy_mode m) {
    return m == accuracy_mode::exact_label ? "exact_label" : "strict_paper_buckets";
}

void count_outcome(outcome_counts& c, std::string_view truth, std::string_view top, bool reported,
                   std::string_view normal) {
    const bool truth_normal = truth == normal;
    if (reported) {
        ++(truth_normal ? c.tn : c.tp);
    } else if (truth_normal) {
        ++c.fp;
    } else if (top == normal) {
        ++c.fn;
    } else {
        ++c.misrouted;
    }
}

outcome_counts count_outcomes(const std::vector<std::string>& predictions, const std::vector<std::string>& truths,
                              std::string_view normal) {
    if (predictions.size() != truths.size()) {
        throw validation_error("accuracy: " + std::to_string(predictions.size()) + " predictions for " +
                               std::to_string(truths.size()) + " truths");
    }
    if (truths.empty()) throw validation_error("accuracy: empty input");
    outcome_counts c;
    for (std::size_t i = 0; i < truths.size(); ++i) {
        count_outcome(c, truths[i], predictions[i], predictions[i] == truths[i], normal);
    }
    return c;
}

double overall_accuracy(const outcome_counts& c, accuracy_mode mode) {
    const std::size_t denom = mode == accuracy_mode::exact_label ? c.total() : c.tp + c.tn + c.fp + c.fn;
    if (denom == 0) return 0.0;
    return static_cast<double>(c.tp + c.tn) / static_cast<double>(denom);
}

double overall_accuracy(const std::vector<std::string>& predictions, const std::vector<std::string>& truths,
                        std::string_view normal, accuracy_mode mode) {
    return overall_accuracy(count_outcomes(predictions, truths, normal), mode);
}

namespace {

void require_view(const ml::model& model, const alert_policy& policy) {
    if (model.task() != policy.required_task()) {
        throw validation_error("policy " + to_string(policy) + " needs a " +
                               std::string(dataset::to_string(policy.required_task())) + " model, got a " +
                               std::string(dataset::to_string(model.task())) + " model");
    }
}

std::size_t support(std::span<const double> p) {
    return static_cast<std::size_t>(std::count_if(p.begin(), p.end(), [](double v) { return v > 0; }));
}

}  // namespace

eval_metrics policy_accuracy(const ml::model& model, const dataset::labeled_set& test, const alert_policy& policy,
                             accuracy_mode mode) {
    require_view(model, policy);
    if (test.size() == 0) throw validation_error("evaluation: empty test set");
    const auto truth = model.encode(test);
    const auto& classes = model.classes();
    const std::string normal = dataset::relabel(plant::scenario_kind::normal, model.task());

    eval_metrics m;
    m.algorithm = std::string(ml::to_string(model.kind()));
    m.policy = policy;
    m.mode = mode;
    m.test_size = test.size();
    m.classes = classes;
    m.confusion.assign(classes.size(), std::vector<std::size_t>(classes.size(), 0));
    m.rescue.reserve(classes.size());
    for (const auto& c : classes) m.rescue.emplace_back(c, rescue_row{});

    for (std::size_t r = 0; r < test.size(); ++r) {
        const auto p = model.predict_proba(test.x.row(r));
        const auto report = make_report(p, classes, model.task(), policy);
        const auto& t = classes[truth[r]];
        const auto top = *model.class_index(report.predictions.front().label);
        count_outcome(m.counts, t, classes[top], report.contains(t), normal);
        ++m.confusion[truth[r]][top];

        const auto k = std::min<std::size_t>(support(p), 4);
        ++m.histogram[k - 1];

        if (top != truth[r]) {
            auto& row = m.rescue[truth[r]].second;
            ++row.misclassified;
            ++row.misdirected_to[classes[top]];
            const auto order = rank_classes(p);
            if (order.size() > 1 && p[order[1]] > 0 && order[1] == truth[r]) ++row.rescued;
        }
    }
    m.accuracy = overall_accuracy(m.counts, mode);
    return m;
}

probable_histogram probable_count_histogram(const ml::model& model, const dataset::labeled_set& test) {
    probable_histogram h{};
    for (std::size_t r = 0; r < test.size(); ++r) {
        const auto k = support(model.predict_proba(test.x.row(r)));
        if (k == 0) throw validation_error("histogram: all-zero distribution");
        ++h[std::min<std::size_t>(k, 4) - 1];
    }
    return h;
}

rescue_table rescue_analysis(const ml::model& model, const dataset::labeled_set& test) {
    alert_policy top1 = alert_policy::top1();
    if (model.task() != dataset::task::scenario) top1.type = model.task() == dataset::task::binary
                                                                  ? alert_policy::kind::binary
                                                                  : alert_policy::kind::component;
    return policy_accuracy(model, test, top1).rescue;
}

nlohmann::json eval_metrics::to_json() const {
    nlohmann::json rescue_json = nlohmann::json::array();
    for (const auto& [label, row] : rescue) {
        rescue_json.push_back({{"class", label},
                               {"misclassified", row.misclassified},
                               {"rescued_by_second", row.rescued},
                               {"misdirected_to", row.misdirected_to}});
    }
    return {{"algorithm", algorithm},
            {"policy", siem::to_json(policy)},
            {"accuracy_mode", to_string(mode)},
            {"test_size", test_size},
            {"accuracy", accuracy},
            {"counts",
             {{"tp", counts.tp}, {"tn", counts.tn}, {"fp", counts.fp}, {"fn", counts.fn}, {"misrouted", counts.misrouted}}},
            {"classes", classes},
            {"confusion", confusion},
            {"probable_count_histogram",
             {{"1", histogram[0]}, {"2", histogram[1]}, {"3", histogram[2]}, {"4+", histogram[3]}}},
            {"rescue", std::move(rescue_json)}};
}

std::string format_table(const std::vector<eval_metrics>& runs) {
    std::string out = fmt::format("{:<6} {:<18} {:>9} {:>6} {:>6} {:>6} {:>6} {:>6}   {:>6} {:>6} {:>6} {:>6}\n", "algo",
                                  "policy", "accuracy", "TP", "TN", "FP", "FN", "misr", "p=1", "p=2", "p=3", "p=4+");
    for (const auto& m : runs) {
        out += fmt::format("{:<6} {:<18} {:>8.2f}% {:>6} {:>6} {:>6} {:>6} {:>6}   {:>6} {:>6} {:>6} {:>6}\n",
                           m.algorithm, to_string(m.policy), 100.0 * m.accuracy, m.counts.tp, m.counts.tn, m.counts.fp,
                           m.counts.fn, m.counts.misrouted, m.histogram[0], m.histogram[1], m.histogram[2],
                           m.histogram[3]);
    }
    return out;
}

std::string bar_chart_csv(const std::vector<std::pair<std::string, eval_metrics>>& runs) {
    std::string out = "experiment,algorithm,policy,accuracy\n";
    for (const auto& [experiment, m] : runs) {
        out += fmt::format("{},{},{},{:.6f}\n", experiment, m.algorithm, to_string(m.policy), m.accuracy);
    }
    return out;
}

}  // namespace scada::siem
