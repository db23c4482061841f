#pragma once

#include "scada/ml/classifier.hpp"

namespace scada::ml {

/// Gaussian naive Bayes; variances are population variances raised to the floor.
class naive_bayes final : public classifier {
public:
    explicit naive_bayes(const train_config& cfg = {}) : floor_(cfg.nb_variance_floor) {}

    algorithm kind() const override { return algorithm::naive_bayes; }
    void fit(const matrix& x, std::span<const std::size_t> y, std::size_t n_classes) override;
    std::vector<double> predict_proba(std::span<const double> x) const override;

    nlohmann::json params_to_json() const override;
    void params_from_json(const nlohmann::json& j) override;

    double mean(std::size_t cls, std::size_t feature) const { return mean_[cls * n_features_ + feature]; }
    double variance(std::size_t cls, std::size_t feature) const { return var_[cls * n_features_ + feature]; }
    double prior(std::size_t cls) const { return prior_[cls]; }

private:
    double floor_;
    std::vector<double> prior_;
    std::vector<double> mean_;
    std::vector<double> var_;
};

}  // namespace scada::ml
