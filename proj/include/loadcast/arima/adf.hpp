#pragma once

#include <optional>
#include <span>
#include <string>

namespace loadcast::arima {

struct CriticalValues {
    double one_percent = 0.0;
    double five_percent = 0.0;
    double ten_percent = 0.0;
};

// Augmented Dickey-Fuller test, constant-only regression.
struct AdfResult {
    double statistic = 0.0;
    double p_value = 1.0;
    int used_lags = 0;
    int n_obs = 0;  // series length - used_lags - 1
    CriticalValues critical_values;
    double icbest = 0.0;  // AIC of the selected lag regression
};

// MacKinnon (2010) finite-sample critical values for one variable with a
// constant: c(n) = b0 + b1/n + b2/n^2 + b3/n^3.
CriticalValues adf_critical_values(int n_obs);

// MacKinnon (1994) response-surface p-value for the constant-only ADF
// statistic.
double adf_p_value(double statistic);

// Fits dy_t = a + g y_(t-1) + sum_i phi_i dy_(t-i) + e_t by least squares for
// each lag 0..max_lag on a common sample, picks the lag with minimum AIC,
// refits it on all available observations and returns the t-statistic of g.
// Default max_lag = floor(12 (n/100)^(1/4)), capped at n/2 - 2.
AdfResult adf_test(std::span<const double> series, std::optional<int> max_lag = std::nullopt);

// The listing printed by the reference tooling ("ADF : ...", "P-Value : ...").
std::string format_adf_report(const AdfResult& result);

}  // namespace loadcast::arima
