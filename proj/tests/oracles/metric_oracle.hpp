#pragma once

// Plain loop metric definitions, written independently of src/eval.cpp.

#include <algorithm>
#include <cmath>
#include <vector>

namespace oracle {

struct Metrics {
    double mse = 0, rmse = 0, mae = 0, mape = 0, r2 = 0;
    bool has_r2 = false;
};

inline Metrics brute_force_metrics(const std::vector<double>& pred, const std::vector<double>& actual, double eps) {
    Metrics m;
    const double n = static_cast<double>(actual.size());
    double abar = 0;
    for (double a : actual) {
        abar += a;
    }
    abar /= n;
    double sse = 0, sst = 0, sae = 0, sape = 0;
    for (std::size_t i = 0; i < actual.size(); ++i) {
        const double e = actual[i] - pred[i];
        sse += e * e;
        sae += std::abs(e);
        sape += std::abs(e) / std::max(std::abs(actual[i]), eps);
        sst += (actual[i] - abar) * (actual[i] - abar);
    }
    m.mse = sse / n;
    m.rmse = std::sqrt(m.mse);
    m.mae = sae / n;
    m.mape = sape / n;
    if (sst > 0) {
        m.r2 = 1.0 - sse / sst;
        m.has_r2 = true;
    }
    return m;
}

inline double rel(double a, double b) {
    const double scale = std::max({std::abs(a), std::abs(b), 1e-300});
    return a == b ? 0.0 : std::abs(a - b) / scale;
}

}  // namespace oracle
