#include "scada/ml/naive_bayes.hpp"

#include "scada/error.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace scada::ml {

void naive_bayes::fit(const matrix& x, std::span<const std::size_t> y, std::size_t n_classes) {
    check_fit_input(x, y, n_classes);
    const std::size_t d = x.cols();
    std::vector<std::size_t> count(n_classes, 0);
    mean_.assign(n_classes * d, 0.0);
    var_.assign(n_classes * d, 0.0);
    for (std::size_t r = 0; r < x.rows(); ++r) {
        ++count[y[r]];
        for (std::size_t j = 0; j < d; ++j) mean_[y[r] * d + j] += x(r, j);
    }
    for (std::size_t k = 0; k < n_classes; ++k) {
        for (std::size_t j = 0; j < d; ++j) {
            if (count[k]) mean_[k * d + j] /= static_cast<double>(count[k]);
        }
    }
    for (std::size_t r = 0; r < x.rows(); ++r) {
        for (std::size_t j = 0; j < d; ++j) {
            const double dev = x(r, j) - mean_[y[r] * d + j];
            var_[y[r] * d + j] += dev * dev;
        }
    }
    prior_.assign(n_classes, 0.0);
    for (std::size_t k = 0; k < n_classes; ++k) {
        prior_[k] = static_cast<double>(count[k]) / static_cast<double>(x.rows());
        for (std::size_t j = 0; j < d; ++j) {
            auto& v = var_[k * d + j];
            v = std::max(count[k] ? v / static_cast<double>(count[k]) : 0.0, floor_);
        }
    }
}

std::vector<double> naive_bayes::predict_proba(std::span<const double> x) const {
    check_query(x);
    const std::size_t d = n_features_;
    std::vector<double> logp(n_classes_, -std::numeric_limits<double>::infinity());
    for (std::size_t k = 0; k < n_classes_; ++k) {
        if (prior_[k] <= 0) continue;
        double lp = std::log(prior_[k]);
        for (std::size_t j = 0; j < d; ++j) {
            const double v = var_[k * d + j];
            const double dev = x[j] - mean_[k * d + j];
            lp -= 0.5 * (std::log(2 * std::numbers::pi * v) + dev * dev / v);
        }
        logp[k] = lp;
    }
    const double top = *std::max_element(logp.begin(), logp.end());
    double total = 0;
    for (auto& v : logp) {
        v = std::isinf(v) ? 0.0 : std::exp(v - top);
        total += v;
    }
    for (auto& v : logp) v /= total;
    return logp;
}

nlohmann::json naive_bayes::params_to_json() const {
    return {{"n_features", n_features_}, {"n_classes", n_classes_}, {"variance_floor", floor_},
            {"prior", prior_},           {"mean", mean_},           {"variance", var_}};
}

void naive_bayes::params_from_json(const nlohmann::json& j) {
    n_features_ = j.at("n_features").get<std::size_t>();
    n_classes_ = j.at("n_classes").get<std::size_t>();
    floor_ = j.at("variance_floor").get<double>();
    prior_ = j.at("prior").get<std::vector<double>>();
    mean_ = j.at("mean").get<std::vector<double>>();
    var_ = j.at("variance").get<std::vector<double>>();
    if (prior_.size() != n_classes_ || mean_.size() != n_classes_ * n_features_ || var_.size() != mean_.size()) {
        throw config_error("nb: parameter size mismatch");
    }
}

}  // namespace scada::ml
