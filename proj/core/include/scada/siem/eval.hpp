#pragma once

#include "scada/dataset/pipeline.hpp"
#include "scada/ml/model.hpp"
#include "scada/siem/alert.hpp"

#include <array>
#include <map>
#include <string>
#include <vector>

namespace scada::siem {

/// Four-bucket outcome counts plus the anomalies reported as a different anomaly.
struct outcome_counts {
    std::size_t tp = 0;  ///< anomaly, truth reported
    std::size_t tn = 0;  ///< normal, reported normal
    std::size_t fp = 0;  ///< normal, reported as an anomaly
    std::size_t fn = 0;  ///< anomaly, reported normal
    std::size_t misrouted = 0;  ///< anomaly, reported as other anomalies only

    std::size_t total() const { return tp + tn + fp + fn + misrouted; }
    bool operator==(const outcome_counts&) const = default;
};

enum class accuracy_mode : std::uint8_t {
    exact_label,          ///< (TP+TN) / all instances
    strict_paper_buckets  ///< (TP+TN) / (TP+TN+FP+FN); misrouted anomalies are left out
};

std::string_view to_string(accuracy_mode m);

/// Bucket one instance. `top` is the first reported label, `reported` whether the
/// truth is among the reported labels.
void count_outcome(outcome_counts& c, std::string_view truth, std::string_view top, bool reported,
                   std::string_view normal);

outcome_counts count_outcomes(const std::vector<std::string>& predictions, const std::vector<std::string>& truths,
                              std::string_view normal);

double overall_accuracy(const outcome_counts& c, accuracy_mode mode = accuracy_mode::exact_label);

/// Throws validation_error for empty or misaligned input.
double overall_accuracy(const std::vector<std::string>& predictions, const std::vector<std::string>& truths,
                        std::string_view normal, accuracy_mode mode = accuracy_mode::exact_label);

/// Instances by number of classes with probability > 0: buckets 1, 2, 3, 4+.
using probable_histogram = std::array<std::size_t, 4>;

struct rescue_row {
    std::size_t misclassified = 0;
    std::size_t rescued = 0;  ///< second-ranked (non-zero) class is the truth
    std::map<std::string, std::size_t> misdirected_to;
};

/// Per true class; every class of the model appears, in class order.
using rescue_table = std::vector<std::pair<std::string, rescue_row>>;

struct eval_metrics {
    std::string algorithm;
    alert_policy policy;
    accuracy_mode mode = accuracy_mode::exact_label;
    std::size_t test_size = 0;
    double accuracy = 0;
    outcome_counts counts;
    std::vector<std::string> classes;
    std::vector<std::vector<std::size_t>> confusion;  ///< [truth][top-1 prediction]
    probable_histogram histogram{};
    rescue_table rescue;

    nlohmann::json to_json() const;
};

/// A prediction is correct when the truth is among the report's labels. Throws
/// validation_error when the model's label view does not match the policy.
eval_metrics policy_accuracy(const ml::model& model, const dataset::labeled_set& test, const alert_policy& policy,
                             accuracy_mode mode = accuracy_mode::exact_label);

probable_histogram probable_count_histogram(const ml::model& model, const dataset::labeled_set& test);

rescue_table rescue_analysis(const ml::model& model, const dataset::labeled_set& test);

/// Fixed-width table for terminals.
std::string format_table(const std::vector<eval_metrics>& runs);

/// experiment,algorithm,policy,accuracy rows for external plotting.
std::string bar_chart_csv(const std::vector<std::pair<std::string, eval_metrics>>& runs);

}  // namespace scada::siem
