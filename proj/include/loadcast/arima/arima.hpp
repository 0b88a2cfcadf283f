#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>
#include <json.hpp>

#include "loadcast/errors.hpp"

namespace loadcast::arima {

struct ArimaOrder {
    int p = 0;
    int d = 0;
    int q = 0;

    friend bool operator==(const ArimaOrder&, const ArimaOrder&) = default;
    void validate() const;
};

// "(p,d,q)"
std::string to_string(const ArimaOrder& order);

struct StandardErrors {
    double constant = 0.0;  // NaN when the fit has no constant
    Eigen::VectorXd ar;
    Eigen::VectorXd ma;
    double sigma2 = 0.0;
};

struct ArimaFit {
    ArimaOrder order;
    bool include_const = true;
    double constant = 0.0;  // mean of the d-times differenced series
    Eigen::VectorXd ar;     // y_t - mu = sum ar_i (y_(t-i) - mu) + e_t + sum ma_j e_(t-j)
    Eigen::VectorXd ma;
    double sigma2 = 0.0;
    double loglik = 0.0;
    double aic = 0.0;
    double bic = 0.0;
    double hqic = 0.0;
    int n_obs = 0;  // observations in the likelihood (after differencing)
    StandardErrors std_errors;

    bool converged = false;
    int iterations = 0;
    double min_ar_root = 0.0;  // smallest characteristic-root modulus (inf if p = 0)
    double min_ma_root = 0.0;
    bool stationary = true;
    bool invertible = true;
    std::vector<std::string> warnings;

    // Forecast origin: one-step predicted ARMA state (demeaned, differenced
    // scale) after the last observation, and the last d original values.
    Eigen::VectorXd forecast_state;
    std::vector<double> tail;

    // The undifferenced series the model was fitted to (not serialized).
    std::vector<double> data;

    int parameter_count() const { return order.p + order.q + (include_const ? 1 : 0) + 1; }
};

// Thrown when the optimizer stops at its iteration cap; carries the best
// parameters found.
class ConvergenceError : public Error {
public:
    ConvergenceError(const std::string& message, ArimaFit best)
        : Error(ErrorCode::convergence, "convergence error: " + message), best_(std::move(best)) {}
    const ArimaFit& best_so_far() const noexcept { return best_; }

private:
    ArimaFit best_;
};

struct InformationCriteria {
    double aic = 0.0;
    double bic = 0.0;
    double hqic = 0.0;
};

// k counts every estimated parameter including sigma2.
InformationCriteria information_criteria(double loglik, int k, int n);

std::vector<double> difference(std::span<const double> series, int d);

// Inverse of difference(): anchors are the d original values that precede
// the differenced ones. Returns anchors followed by the reconstruction.
std::vector<double> integrate(std::span<const double> values, std::span<const double> anchors);

struct FitOptions {
    int max_iterations = 2000;
    double tolerance = 1e-8;
    int max_restarts = 3;
    bool standard_errors = true;
};

// Exact Gaussian maximum likelihood (Kalman filter on the state-space
// form, sigma2 concentrated out), started from Hannan-Rissanen estimates.
ArimaFit fit_arima(std::span<const double> series, const ArimaOrder& order, bool include_const = true,
                   const FitOptions& options = {});

// One-step-ahead conditional means for every index of `series` using the
// fitted coefficients. Entries before index d are NaN (no differenced
// history yet).
std::vector<double> one_step_predictions(const ArimaFit& fit, std::span<const double> series);

// One-step predictions on the fitted data, inclusive index range.
std::vector<double> predict_in_sample(const ArimaFit& fit, int start_index, int end_index);

struct Forecast {
    std::vector<double> mean;
    std::vector<double> variance;
};

Forecast forecast_out(const ArimaFit& fit, int horizon);

// const is the recursion intercept: y_t = c + sum ar_i y_(t-i) + e_t + sum ma_j e_(t-j).
// With d > 0 the ARMA output is integrated d times from zero.
std::vector<double> simulate_arma(const ArimaOrder& order, double constant, const Eigen::VectorXd& ar,
                                  const Eigen::VectorXd& ma, double sigma2, int n, std::uint64_t seed,
                                  int burn_in = 500);

// Smallest modulus among the roots of 1 - c_1 z - ... - c_k z^k (inf for k = 0).
double min_root_modulus(const Eigen::VectorXd& coefficients);

nlohmann::json fit_to_json(const ArimaFit& fit);
ArimaFit fit_from_json(const nlohmann::json& j);

}  // namespace loadcast::arima
