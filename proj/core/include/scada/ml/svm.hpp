#pragma once

#include "scada/ml/classifier.hpp"

namespace scada::ml {

/// Linear one-vs-rest SVM trained by batch subgradient descent on
/// lambda/2 |w|^2 + mean hinge, lambda = 1 / (C n). Probabilities are one-hot.
class linear_svm final : public classifier {
public:
    explicit linear_svm(const train_config& cfg = {}) : cfg_(cfg) {}

    algorithm kind() const override { return algorithm::svm; }
    void fit(const matrix& x, std::span<const std::size_t> y, std::size_t n_classes) override;
    std::vector<double> predict_proba(std::span<const double> x) const override;
    std::size_t predict(std::span<const double> x) const override;

    std::vector<double> decision_values(std::span<const double> x) const;

    nlohmann::json params_to_json() const override;
    void params_from_json(const nlohmann::json& j) override;

private:
    train_config cfg_;
    std::vector<double> weights_;  ///< n_classes x (n_features + 1), bias last
};

}  // namespace scada::ml
