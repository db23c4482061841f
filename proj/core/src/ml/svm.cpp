#include "scada/ml/svm.hpp"

#include "scada/error.hpp"

#include <cmath>

namespace scada::ml {

namespace {

double objective(const matrix& x, std::span<const double> t, std::span<const double> w, double lambda) {
    const std::size_t d = x.cols();
    double reg = 0;
    for (std::size_t j = 0; j < d; ++j) reg += w[j] * w[j];
    double hinge = 0;
    for (std::size_t r = 0; r < x.rows(); ++r) {
        double f = w[d];
        for (std::size_t j = 0; j < d; ++j) f += w[j] * x(r, j);
        hinge += std::max(0.0, 1.0 - t[r] * f);
    }
    return 0.5 * lambda * reg + hinge / static_cast<double>(x.rows());
}

}  // namespace

void linear_svm::fit(const matrix& x, std::span<const std::size_t> y, std::size_t n_classes) {
    check_fit_input(x, y, n_classes);
    const std::size_t d = x.cols();
    const std::size_t stride = d + 1;
    const double n = static_cast<double>(x.rows());
    const double lambda = 1.0 / (cfg_.svm_c * n);
    weights_.assign(n_classes * stride, 0.0);

    std::vector<double> t(x.rows());
    std::vector<double> w(stride), grad(stride), best(stride);
    for (std::size_t k = 0; k < n_classes; ++k) {
        for (std::size_t r = 0; r < x.rows(); ++r) t[r] = y[r] == k ? 1.0 : -1.0;
        std::fill(w.begin(), w.end(), 0.0);
        best = w;
        double best_obj = objective(x, t, w, lambda);
        for (std::size_t epoch = 1; epoch <= cfg_.svm_epochs; ++epoch) {
            for (std::size_t j = 0; j < d; ++j) grad[j] = lambda * w[j];
            grad[d] = 0;
            for (std::size_t r = 0; r < x.rows(); ++r) {
                double f = w[d];
                for (std::size_t j = 0; j < d; ++j) f += w[j] * x(r, j);
                if (t[r] * f < 1.0) {
                    for (std::size_t j = 0; j < d; ++j) grad[j] -= t[r] * x(r, j) / n;
                    grad[d] -= t[r] / n;
                }
            }
            const double eta = cfg_.svm_learning_rate / std::sqrt(static_cast<double>(epoch));
            for (std::size_t j = 0; j < stride; ++j) w[j] -= eta * grad[j];
            // Subgradient steps are not monotone; keep the best iterate seen.
            const double obj = objective(x, t, w, lambda);
            if (obj < best_obj) {
                best_obj = obj;
                best = w;
            }
        }
        std::copy(best.begin(), best.end(), weights_.begin() + static_cast<std::ptrdiff_t>(k * stride));
    }
}

std::vector<double> linear_svm::decision_values(std::span<const double> x) const {
    check_query(x);
    const std::size_t stride = n_features_ + 1;
    std::vector<double> f(n_classes_);
    for (std::size_t k = 0; k < n_classes_; ++k) {
        const double* wk = weights_.data() + k * stride;
        double v = wk[n_features_];
        for (std::size_t j = 0; j < n_features_; ++j) v += wk[j] * x[j];
        f[k] = v;
    }
    return f;
}

std::size_t linear_svm::predict(std::span<const double> x) const { return argmax(decision_values(x)); }

std::vector<double> linear_svm::predict_proba(std::span<const double> x) const {
    std::vector<double> p(n_classes_, 0.0);
    p[predict(x)] = 1.0;
    return p;
}

nlohmann::json linear_svm::params_to_json() const {
    return {{"n_features", n_features_}, {"n_classes", n_classes_}, {"weights", weights_}};
}

void linear_svm::params_from_json(const nlohmann::json& j) {
    n_features_ = j.at("n_features").get<std::size_t>();
    n_classes_ = j.at("n_classes").get<std::size_t>();
    weights_ = j.at("weights").get<std::vector<double>>();
    if (weights_.size() != n_classes_ * (n_features_ + 1)) throw config_error("svm: weight count mismatch");
}

}  // namespace scada::ml
