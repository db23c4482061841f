#pragma once

#include "scada/dataset/features.hpp"
#include "scada/dataset/labels.hpp"
#include "scada/matrix.hpp"
#include "scada/modbus/log.hpp"

#include <nlohmann/json.hpp>

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace scada::dataset {

/// Row-aligned features and labels. Component and binary labels are derived from
/// the scenario label, so the three views can never disagree.
struct labeled_set {
    std::vector<std::string> feature_names;
    matrix x;
    std::vector<plant::scenario_kind> y_scenario;
    std::vector<std::string> source_file;
    std::vector<std::size_t> source_index;

    std::size_t size() const { return y_scenario.size(); }
    std::vector<std::string> labels(task view) const;

    void append(std::span<const double> features, plant::scenario_kind label, std::string source, std::size_t index);
    labeled_set subset(std::span<const std::size_t> rows) const;
};

/// Instances per log file, keyed by file name (iteration order is lexicographic).
using per_file_features = std::map<std::string, std::vector<featured_instance>>;

/// Keep the first n entries of every list (warns about lists shorter than n).
template <typename T>
std::map<std::string, std::vector<T>> apply_threshold(std::map<std::string, std::vector<T>> per_file, std::size_t n);

/// Smallest list length: the default threshold, which balances the classes.
std::size_t default_threshold(const per_file_features& per_file);

/// One row-aligned set, files in key order, restricted to the named features.
labeled_set serialize(const per_file_features& per_file, const std::vector<std::string>& features = {});

/// Per-feature min-max scaling; constant features map to 0 and out-of-range values clip to [0,1].
class minmax_scaler {
public:
    minmax_scaler() = default;
    minmax_scaler(std::vector<double> lo, std::vector<double> hi) : min_(std::move(lo)), max_(std::move(hi)) {}

    static minmax_scaler fit(const matrix& x);
    matrix transform(const matrix& x) const;
    void transform_row(std::span<double> row) const;

    const std::vector<double>& min() const { return min_; }
    const std::vector<double>& max() const { return max_; }

    /// Content-derived identifier stored with models that depend on this scaler.
    std::string id() const;
    nlohmann::json to_json() const;
    static minmax_scaler from_json(const nlohmann::json& j);

private:
    std::vector<double> min_;
    std::vector<double> max_;
};

struct split_indices {
    std::vector<std::size_t> train;
    std::vector<std::size_t> test;
};

/// Stratified by scenario, deterministic under seed. The train size is
/// round(ratio * n) with per-class shares allotted by largest remainder.
split_indices stratified_split(const std::vector<plant::scenario_kind>& labels, double ratio, std::uint64_t seed);

struct pipeline_config {
    std::optional<std::size_t> threshold;  ///< unset: smallest per-file count
    double train_ratio = 0.8;
    std::uint64_t seed = 42;
    /// Fit the scaler on the whole set before splitting (literal order of the
    /// original procedure, leaks test statistics). Default fits on train only.
    bool paper_faithful_order = false;
    std::vector<std::string> features;  ///< empty: all ten

    nlohmann::json to_json() const;
    static pipeline_config from_json(const nlohmann::json& j);
};

struct prepared_dataset {
    pipeline_config config;
    std::size_t threshold_used = 0;
    labeled_set serialized;  ///< before splitting and scaling
    labeled_set train;       ///< scaled
    labeled_set test;        ///< scaled
    minmax_scaler scaler;
    /// Hash recorded when the dataset was saved; a loaded dataset has no serialized set.
    std::string recorded_sha256;

    /// SHA-256 over the canonical CSV of the serialized set (hex).
    std::string content_hash() const;
};

/// Threshold -> serialize -> split -> normalize.
prepared_dataset prepare(const per_file_features& per_file, const pipeline_config& cfg);

/// Scale a train/test pair with a scaler fitted on train only.
std::pair<labeled_set, labeled_set> normalize(const labeled_set& train, const labeled_set& test, minmax_scaler& scaler);

/// One log file's rows with its scenario label.
struct labeled_log {
    plant::scenario_kind scenario;
    std::vector<modbus::log_row> rows;
};

/// Scenario of a log file: mapping labels first, then "NN_<id>.csv", then the stem itself.
std::optional<plant::scenario_kind> scenario_for_file(const std::string& file_name, const modbus::log_mapping& mapping);

/// Every *.csv under `dir` whose scenario can be determined. Throws if none is found.
std::map<std::string, labeled_log> load_log_directory(const std::filesystem::path& dir,
                                                      const modbus::log_mapping& mapping = modbus::log_mapping::native());

/// extract_instances + featurize per file.
per_file_features featurize_logs(const std::map<std::string, labeled_log>& logs);

/// Canonical CSV: features, three label columns and provenance.
void write_labeled_set(std::ostream& out, const labeled_set& set, const std::vector<std::string>* split_column = nullptr);

/// Persist a prepared dataset: CSV with a split column plus a JSON sidecar (scaler, config, hash).
void save_prepared(const prepared_dataset& data, const std::filesystem::path& csv_path);
prepared_dataset load_prepared(const std::filesystem::path& csv_path);

std::string sha256_hex(std::string_view data);

}  // namespace scada::dataset

#include "scada/dataset/pipeline_impl.hpp"
