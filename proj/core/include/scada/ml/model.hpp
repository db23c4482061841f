#pragma once

#include "scada/dataset/labels.hpp"
#include "scada/dataset/pipeline.hpp"
#include "scada/ml/classifier.hpp"

#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace scada::ml {

/// A trained classifier with its label view, class order and preprocessing.
/// Immutable after training; copies share the fitted classifier.
class model {
public:
    model() = default;

    algorithm kind() const { return impl_->kind(); }
    dataset::task task() const { return task_; }
    const std::vector<std::string>& classes() const { return classes_; }
    const train_config& config() const { return config_; }
    std::size_t feature_count() const { return impl_->feature_count(); }
    const classifier& impl() const { return *impl_; }

    /// Inputs are already scaled.
    std::vector<double> predict_proba(std::span<const double> x) const;
    std::size_t predict(std::span<const double> x) const;
    const std::string& predict_label(std::span<const double> x) const { return classes_[predict(x)]; }

    /// Apply the stored scaler first (throws if the model has none).
    std::vector<double> predict_proba_raw(std::span<const double> raw) const;

    std::optional<std::size_t> class_index(std::string_view label) const;

    /// Class indices of a set's labels under this model's view; unknown labels throw.
    std::vector<std::size_t> encode(const dataset::labeled_set& set) const;

    std::optional<dataset::minmax_scaler> scaler;
    std::optional<dataset::pipeline_config> pipeline;
    std::vector<std::string> feature_names;
    std::string dataset_sha256;

    nlohmann::json to_json() const;
    static model from_json(const nlohmann::json& j);
    void save(const std::filesystem::path& path) const;
    static model load(const std::filesystem::path& path);

private:
    friend model train(algorithm, const dataset::labeled_set&, dataset::task, const train_config&);

    dataset::task task_ = dataset::task::scenario;
    std::vector<std::string> classes_;
    train_config config_;
    std::shared_ptr<const classifier> impl_;
};

/// Fit on a (scaled) labeled set under a label view. The class list is the view's
/// labels present in the set, in catalog order. Throws training_error for a
/// single-class set or non-finite features.
model train(algorithm a, const dataset::labeled_set& set, dataset::task view, const train_config& cfg = {});

}  // namespace scada::ml
