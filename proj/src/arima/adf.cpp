#include "loadcast/arima/adf.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numbers>
#include <string>

#include <Eigen/Dense>

#include "loadcast/errors.hpp"
#include "ols.hpp"

namespace loadcast::arima {

namespace {

// Response-surface coefficients for one variable, constant-only case.
constexpr double kCrit2010[3][4] = {
    {-3.43035, -6.5393, -16.786, -79.433},  // 1%
    {-2.86154, -2.8903, -4.234, -40.040},   // 5%
    {-2.56677, -1.5384, -2.809, 0.0},       // 10%
};

constexpr double kTauMax = 2.74;
constexpr double kTauMin = -18.83;
constexpr double kTauStar = -1.61;
constexpr double kSmallP[3] = {2.1659, 1.4412, 3.8269e-2};
constexpr double kLargeP[4] = {1.7339, 9.3202e-1, -1.2745e-1, -1.0368e-2};

double normal_cdf(double x) {
    return 0.5 * std::erfc(-x / std::numbers::sqrt2);
}

// Rows t = first..n-2 of [x_t, dx_(t-1), ..., dx_(t-lags)] with response dx_t.
struct Design {
    Eigen::MatrixXd x;  // [1, level, lagged diffs...]
    Eigen::VectorXd y;
};

Design build_design(std::span<const double> series, int lags, int first_row) {
    const auto n = static_cast<int>(series.size());
    const int rows = n - 1 - first_row;
    Design d;
    d.x.resize(rows, 2 + lags);
    d.y.resize(rows);
    for (int r = 0; r < rows; ++r) {
        const int t = first_row + r;
        d.y(r) = series[t + 1] - series[t];
        d.x(r, 0) = 1.0;
        d.x(r, 1) = series[t];
        for (int i = 1; i <= lags; ++i) {
            d.x(r, 1 + i) = series[t - i + 1] - series[t - i];
        }
    }
    return d;
}

}  // namespace

CriticalValues adf_critical_values(int n_obs) {
    const double n = static_cast<double>(n_obs);
    double out[3];
    for (int i = 0; i < 3; ++i) {
        const auto& b = kCrit2010[i];
        out[i] = b[0] + b[1] / n + b[2] / (n * n) + b[3] / (n * n * n);
    }
    return {out[0], out[1], out[2]};
}

double adf_p_value(double statistic) {
    if (statistic > kTauMax) {
        return 1.0;
    }
    if (statistic < kTauMin) {
        return 0.0;
    }
    double poly = 0.0;
    if (statistic <= kTauStar) {
        for (int i = 2; i >= 0; --i) {
            poly = poly * statistic + kSmallP[i];
        }
    } else {
        for (int i = 3; i >= 0; --i) {
            poly = poly * statistic + kLargeP[i];
        }
    }
    return normal_cdf(poly);
}

AdfResult adf_test(std::span<const double> series, std::optional<int> max_lag) {
    const auto n = static_cast<int>(series.size());
    if (n < 20) {
        fail(ErrorCode::insufficient_data, "ADF test needs at least 20 observations");
    }
    for (const double v : series) {
        if (!std::isfinite(v)) {
            fail(ErrorCode::numeric, "ADF input contains non-finite values");
        }
    }
    int maxlag = max_lag.value_or(static_cast<int>(std::floor(12.0 * std::pow(n / 100.0, 0.25))));
    maxlag = std::min(maxlag, n / 2 - 2);
    if (maxlag < 0) {
        fail(ErrorCode::validation, "max_lag must be >= 0");
    }

    // Lag selection on the common sample that the longest lag allows.
    int best_lag = 0;
    double best_aic = std::numeric_limits<double>::infinity();
    const Design full = build_design(series, maxlag, maxlag);
    for (int lag = 0; lag <= maxlag; ++lag) {
        const auto fit = detail::ols(full.x.leftCols(2 + lag), full.y);
        if (fit.aic < best_aic) {
            best_aic = fit.aic;
            best_lag = lag;
        }
    }

    const Design d = build_design(series, best_lag, best_lag);
    const auto fit = detail::ols(d.x, d.y, true);

    AdfResult result;
    result.used_lags = best_lag;
    result.n_obs = static_cast<int>(d.y.size());
    result.statistic = fit.beta(1) / fit.std_errors(1);
    result.p_value = adf_p_value(result.statistic);
    result.critical_values = adf_critical_values(result.n_obs);
    result.icbest = best_aic;
    if (!std::isfinite(result.statistic)) {
        fail(ErrorCode::numeric, "ADF statistic is not finite");
    }
    return result;
}

std::string format_adf_report(const AdfResult& r) {
    char buf[512];
    std::snprintf(buf, sizeof buf,
                  "A. ADF : %.15g\n"
                  "B. P-Value : %.15g\n"
                  "C. Num Of Lags : %d\n"
                  "D. Num Of Observations Used For ADF Regression: %d\n"
                  "F. Critical Values :\n"
                  "\t 1%% :  %.15g\n"
                  "\t 5%% :  %.15g\n"
                  "\t 10%% :  %.15g\n",
                  r.statistic, r.p_value, r.used_lags, r.n_obs, r.critical_values.one_percent,
                  r.critical_values.five_percent, r.critical_values.ten_percent);
    return buf;
}

}  // namespace loadcast::arima
