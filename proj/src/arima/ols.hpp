#pragma once

#include <cmath>
#include <numbers>

#include <Eigen/Dense>

#include "loadcast/errors.hpp"

namespace loadcast::arima::detail {

struct OlsFit {
    Eigen::VectorXd beta;
    Eigen::VectorXd std_errors;
    double ssr = 0.0;
    double loglik = 0.0;
    double aic = 0.0;
    Eigen::Index n = 0;
    Eigen::Index k = 0;
};

// Least squares through a column-pivoted QR; throws on a rank-deficient design.
inline OlsFit ols(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, bool with_std_errors = false) {
    const Eigen::Index n = x.rows();
    const Eigen::Index k = x.cols();
    if (n <= k) {
        fail(ErrorCode::insufficient_data, "regression has fewer observations than regressors");
    }
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(x);
    if (qr.rank() < k) {
        fail(ErrorCode::numeric, "singular regression (design matrix is rank deficient)");
    }
    OlsFit fit;
    fit.n = n;
    fit.k = k;
    fit.beta = qr.solve(y);
    fit.ssr = (y - x * fit.beta).squaredNorm();
    const double nd = static_cast<double>(n);
    fit.loglik = -nd / 2.0 * (std::log(2.0 * std::numbers::pi) + std::log(fit.ssr / nd) + 1.0);
    fit.aic = -2.0 * fit.loglik + 2.0 * static_cast<double>(k);
    if (with_std_errors) {
        // (X'X)^-1 = P R^-1 R^-T P'
        const Eigen::MatrixXd r = qr.matrixR().topLeftCorner(k, k).triangularView<Eigen::Upper>();
        const Eigen::MatrixXd r_inv =
            r.triangularView<Eigen::Upper>().solve(Eigen::MatrixXd::Identity(k, k));
        const Eigen::MatrixXd inv_pivoted = r_inv * r_inv.transpose();
        const Eigen::MatrixXd xtx_inv = qr.colsPermutation() * inv_pivoted * qr.colsPermutation().transpose();
        const double sigma2 = fit.ssr / static_cast<double>(n - k);
        fit.std_errors = (sigma2 * xtx_inv.diagonal()).cwiseSqrt();
    }
    return fit;
}

}  // namespace loadcast::arima::detail
