#pragma once

#include "scada/ml/classifier.hpp"

namespace scada::ml {

/// Weights are row-major n_classes x (n_features + 1); the last column is the bias.
struct loss_gradient {
    double loss = 0;
    std::vector<double> gradient;
};

/// Mean softmax cross-entropy plus (l2/2)*|W|^2 (bias excluded) and its gradient.
loss_gradient softmax_loss_and_gradient(const matrix& x, std::span<const std::size_t> y, std::size_t n_classes,
                                        std::span<const double> weights, double l2 = 0.0);

/// Multinomial logistic regression by full-batch gradient descent.
class logistic_regression final : public classifier {
public:
    explicit logistic_regression(const train_config& cfg = {}) : cfg_(cfg) {}

    algorithm kind() const override { return algorithm::logistic_regression; }
    void fit(const matrix& x, std::span<const std::size_t> y, std::size_t n_classes) override;
    std::vector<double> predict_proba(std::span<const double> x) const override;

    nlohmann::json params_to_json() const override;
    void params_from_json(const nlohmann::json& j) override;

    const std::vector<double>& weights() const { return weights_; }

private:
    train_config cfg_;
    std::vector<double> weights_;
};

}  // namespace scada::ml
