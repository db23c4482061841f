#include "scada/ml/logistic.hpp"

#include "scada/error.hpp"

#include <algorithm>
#include <cmath>

namespace scada::ml {

namespace {

// Softmax of W·[x,1] into `out`.
void class_probabilities(std::span<const double> w, std::span<const double> x, std::size_t n_classes,
                         std::span<double> out) {
    const std::size_t stride = x.size() + 1;
    for (std::size_t k = 0; k < n_classes; ++k) {
        const double* wk = w.data() + k * stride;
        double z = wk[x.size()];
        for (std::size_t j = 0; j < x.size(); ++j) z += wk[j] * x[j];
        out[k] = z;
    }
    const double top = *std::max_element(out.begin(), out.end());
    double total = 0;
    for (auto& v : out) {
        v = std::exp(v - top);
        total += v;
    }
    for (auto& v : out) v /= total;
}

}  // namespace

loss_gradient softmax_loss_and_gradient(const matrix& x, std::span<const std::size_t> y, std::size_t n_classes,
                                        std::span<const double> weights, double l2) {
    const std::size_t d = x.cols();
    const std::size_t stride = d + 1;
    if (weights.size() != n_classes * stride) throw dimension_error("softmax: weight vector has the wrong size");
    if (y.size() != x.rows() || x.empty()) throw dimension_error("softmax: labels and rows differ");

    loss_gradient out;
    out.gradient.assign(weights.size(), 0.0);
    std::vector<double> p(n_classes);
    for (std::size_t r = 0; r < x.rows(); ++r) {
        const auto row = x.row(r);
        class_probabilities(weights, row, n_classes, p);
        out.loss -= std::log(std::max(p[y[r]], 1e-300));
        for (std::size_t k = 0; k < n_classes; ++k) {
            const double err = p[k] - (k == y[r] ? 1.0 : 0.0);
            double* gk = out.gradient.data() + k * stride;
            for (std::size_t j = 0; j < d; ++j) gk[j] += err * row[j];
            gk[d] += err;
        }
    }
    const double n = static_cast<double>(x.rows());
    out.loss /= n;
    for (auto& g : out.gradient) g /= n;
    if (l2 > 0) {
        for (std::size_t k = 0; k < n_classes; ++k) {
            for (std::size_t j = 0; j < d; ++j) {
                const double w = weights[k * stride + j];
                out.loss += 0.5 * l2 * w * w;
                out.gradient[k * stride + j] += l2 * w;
            }
        }
    }
    return out;
}

void logistic_regression::fit(const matrix& x, std::span<const std::size_t> y, std::size_t n_classes) {
    check_fit_input(x, y, n_classes);
    weights_.assign(n_classes * (x.cols() + 1), 0.0);
    for (std::size_t epoch = 0; epoch < cfg_.lr_epochs; ++epoch) {
        const auto step = softmax_loss_and_gradient(x, y, n_classes, weights_, cfg_.lr_l2);
        for (std::size_t i = 0; i < weights_.size(); ++i) weights_[i] -= cfg_.lr_learning_rate * step.gradient[i];
    }
}

std::vector<double> logistic_regression::predict_proba(std::span<const double> x) const {
    check_query(x);
    std::vector<double> p(n_classes_);
    class_probabilities(weights_, x, n_classes_, p);
    return p;
}

nlohmann::json logistic_regression::params_to_json() const {
    return {{"n_features", n_features_}, {"n_classes", n_classes_}, {"weights", weights_}};
}

void logistic_regression::params_from_json(const nlohmann::json& j) {
    n_features_ = j.at("n_features").get<std::size_t>();
    n_classes_ = j.at("n_classes").get<std::size_t>();
    weights_ = j.at("weights").get<std::vector<double>>();
    if (weights_.size() != n_classes_ * (n_features_ + 1)) throw config_error("lr: weight count mismatch");
}

}  // namespace scada::ml
