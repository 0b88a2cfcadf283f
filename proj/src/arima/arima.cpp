#include "loadcast/arima/arima.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include "loadcast/arima/nelder_mead.hpp"
#include "loadcast/random.hpp"
#include "ols.hpp"

namespace loadcast::arima {

namespace {

constexpr int kMaxState = 12;
using SMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, 0, kMaxState, kMaxState>;
using SVec = Eigen::Matrix<double, Eigen::Dynamic, 1, 0, kMaxState, 1>;

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
constexpr double kInf = std::numeric_limits<double>::infinity();
const double kLog2Pi = std::log(2.0 * std::numbers::pi);

// Harvey form: state dimension r = max(p, q + 1), T has the AR coefficients
// down its first column and ones on the superdiagonal, R = [1, theta].
struct StateSpace {
    int r = 1;
    SMat t;
    SVec rvec;
};

StateSpace build_state_space(const Eigen::VectorXd& ar, const Eigen::VectorXd& ma) {
    StateSpace ss;
    ss.r = static_cast<int>(std::max<Eigen::Index>(ar.size(), ma.size() + 1));
    if (ss.r > kMaxState) {
        fail(ErrorCode::validation, "ARMA state dimension above " + std::to_string(kMaxState));
    }
    ss.t = SMat::Zero(ss.r, ss.r);
    ss.rvec = SVec::Zero(ss.r);
    for (Eigen::Index i = 0; i < ar.size(); ++i) {
        ss.t(i, 0) = ar(i);
    }
    for (int i = 0; i + 1 < ss.r; ++i) {
        ss.t(i, i + 1) = 1.0;
    }
    ss.rvec(0) = 1.0;
    for (Eigen::Index j = 0; j < ma.size(); ++j) {
        ss.rvec(j + 1) = ma(j);
    }
    return ss;
}

// Unconditional state covariance (unit innovation variance): P = T P T' + R R'.
bool stationary_covariance(const StateSpace& ss, SMat& p) {
    const int r = ss.r;
    const SMat rr = ss.rvec * ss.rvec.transpose();
    if (r == 1) {
        const double denom = 1.0 - ss.t(0, 0) * ss.t(0, 0);
        if (!(denom > 0.0)) {
            return false;
        }
        p = SMat::Constant(1, 1, rr(0, 0) / denom);
        return true;
    }
    const int m = r * r;
    Eigen::MatrixXd a = Eigen::MatrixXd::Identity(m, m);
    for (int i = 0; i < r; ++i) {
        for (int j = 0; j < r; ++j) {
            const double tij = ss.t(i, j);
            if (tij == 0.0) {
                continue;
            }
            // vec(T P T') = (T kron T) vec(P), column-major vec.
            for (int k = 0; k < r; ++k) {
                for (int l = 0; l < r; ++l) {
                    a(i + k * r, j + l * r) -= tij * ss.t(k, l);
                }
            }
        }
    }
    Eigen::VectorXd b(m);
    for (int c = 0; c < r; ++c) {
        for (int row = 0; row < r; ++row) {
            b(row + c * r) = rr(row, c);
        }
    }
    const Eigen::PartialPivLU<Eigen::MatrixXd> lu(a);
    const Eigen::VectorXd x = lu.solve(b);
    if (!x.allFinite()) {
        return false;
    }
    p.resize(r, r);
    for (int c = 0; c < r; ++c) {
        for (int row = 0; row < r; ++row) {
            p(row, c) = x(row + c * r);
        }
    }
    p = 0.5 * (p + p.transpose()).eval();
    return p(0, 0) > 0.0;
}

struct FilterResult {
    bool ok = false;
    int n = 0;
    double sum_log_f = 0.0;
    double sum_v2_f = 0.0;
    SVec a_next;
};

// Kalman filter on the demeaned series; unit innovation variance. When
// `predictions` is non-null it receives a_t[0], the one-step prediction.
FilterResult run_filter(const StateSpace& ss, std::span<const double> w, double* predictions) {
    FilterResult out;
    SMat p;
    if (!stationary_covariance(ss, p)) {
        return out;
    }
    const int r = ss.r;
    const SMat rr = ss.rvec * ss.rvec.transpose();
    SVec a = SVec::Zero(r);
    SVec k(r);
    SVec next(r);
    bool steady = false;
    double f = p(0, 0);
    for (std::size_t t = 0; t < w.size(); ++t) {
        if (!steady) {
            f = p(0, 0);
            if (!(f > 0.0) || !std::isfinite(f)) {
                return out;
            }
            k = ss.t * p.col(0) / f;
        }
        const double v = w[t] - a(0);
        if (predictions != nullptr) {
            predictions[t] = a(0);
        }
        out.sum_log_f += std::log(f);
        out.sum_v2_f += v * v / f;
        // a <- T a + K v, using the companion structure of T.
        for (int i = 0; i < r; ++i) {
            next(i) = ss.t(i, 0) * a(0) + (i + 1 < r ? a(i + 1) : 0.0) + k(i) * v;
        }
        a = next;
        if (!steady) {
            SMat pn = ss.t * p * ss.t.transpose() + rr - k * k.transpose() * f;
            pn = 0.5 * (pn + pn.transpose()).eval();
            if ((pn - p).cwiseAbs().maxCoeff() < 1e-13) {
                steady = true;
            }
            p = pn;
        }
    }
    out.ok = std::isfinite(out.sum_log_f) && std::isfinite(out.sum_v2_f);
    out.n = static_cast<int>(w.size());
    out.a_next = a;
    return out;
}

double concentrated_loglik(const FilterResult& fr) {
    const double n = fr.n;
    const double sigma2 = fr.sum_v2_f / n;
    return -0.5 * n * (kLog2Pi + 1.0 + std::log(sigma2)) - 0.5 * fr.sum_log_f;
}

double full_loglik(const FilterResult& fr, double sigma2) {
    const double n = fr.n;
    return -0.5 * n * (kLog2Pi + std::log(sigma2)) - 0.5 * fr.sum_log_f - 0.5 * fr.sum_v2_f / sigma2;
}

// Partial autocorrelations in (-1, 1) to AR coefficients (Durbin-Levinson).
Eigen::VectorXd pacf_to_ar(const Eigen::VectorXd& pacf) {
    const Eigen::Index p = pacf.size();
    Eigen::VectorXd phi = Eigen::VectorXd::Zero(p);
    Eigen::VectorXd prev(p);
    for (Eigen::Index k = 0; k < p; ++k) {
        prev.head(k) = phi.head(k);
        for (Eigen::Index j = 0; j < k; ++j) {
            phi(j) = prev(j) - pacf(k) * prev(k - 1 - j);
        }
        phi(k) = pacf(k);
    }
    return phi;
}

// Inverse of pacf_to_ar; false if the coefficients are not stationary.
bool ar_to_pacf(const Eigen::VectorXd& ar, Eigen::VectorXd& pacf) {
    const Eigen::Index p = ar.size();
    Eigen::VectorXd phi = ar;
    pacf.resize(p);
    for (Eigen::Index k = p - 1; k >= 0; --k) {
        const double r = phi(k);
        if (!(std::abs(r) < 1.0)) {
            return false;
        }
        pacf(k) = r;
        Eigen::VectorXd prev(k);
        for (Eigen::Index j = 0; j < k; ++j) {
            prev(j) = (phi(j) + r * phi(k - 1 - j)) / (1.0 - r * r);
        }
        phi.head(k) = prev;
    }
    return true;
}

Eigen::VectorXd constrain_ar(const Eigen::VectorXd& u) {
    return pacf_to_ar(u.array().tanh().matrix());
}

Eigen::VectorXd constrain_ma(const Eigen::VectorXd& u) {
    return -constrain_ar(u);
}

Eigen::VectorXd unconstrain_ar(const Eigen::VectorXd& ar) {
    Eigen::VectorXd pacf;
    if (!ar_to_pacf(ar, pacf)) {
        return Eigen::VectorXd::Zero(ar.size());
    }
    return pacf.cwiseMax(-0.95).cwiseMin(0.95).array().atanh().matrix();
}

Eigen::VectorXd lagged_design_row(std::span<const double> w, std::span<const double> e, int t, int p, int q) {
    Eigen::VectorXd row(p + q);
    for (int i = 0; i < p; ++i) {
        row(i) = w[static_cast<std::size_t>(t - 1 - i)];
    }
    for (int j = 0; j < q; ++j) {
        row(p + j) = e[static_cast<std::size_t>(t - 1 - j)];
    }
    return row;
}

// Two-stage start values on a demeaned series: long AR for innovations,
// then least squares on lagged values and lagged innovations.
void hannan_rissanen(std::span<const double> w, int p, int q, Eigen::VectorXd& ar, Eigen::VectorXd& ma) {
    ar = Eigen::VectorXd::Zero(p);
    ma = Eigen::VectorXd::Zero(q);
    if (p + q == 0) {
        return;
    }
    const int n = static_cast<int>(w.size());
    try {
        std::vector<double> resid(w.size(), 0.0);
        int first = p;
        if (q > 0) {
            const double ln = std::log(static_cast<double>(n));
            int m = std::max(static_cast<int>(std::floor(ln * ln)), 2 * std::max(p, q));
            m = std::min(m, n / 4);
            if (m < 1) {
                return;
            }
            Eigen::MatrixXd x(n - m, m);
            Eigen::VectorXd y(n - m);
            for (int t = m; t < n; ++t) {
                y(t - m) = w[static_cast<std::size_t>(t)];
                for (int i = 0; i < m; ++i) {
                    x(t - m, i) = w[static_cast<std::size_t>(t - 1 - i)];
                }
            }
            const auto long_ar = detail::ols(x, y);
            const Eigen::VectorXd e = y - x * long_ar.beta;
            for (int t = m; t < n; ++t) {
                resid[static_cast<std::size_t>(t)] = e(t - m);
            }
            first = m + q;
            first = std::max(first, p);
        }
        const int rows = n - first;
        if (rows <= 2 * (p + q) + 1) {
            return;
        }
        Eigen::MatrixXd x(rows, p + q);
        Eigen::VectorXd y(rows);
        for (int t = first; t < n; ++t) {
            y(t - first) = w[static_cast<std::size_t>(t)];
            x.row(t - first) = lagged_design_row(w, resid, t, p, q).transpose();
        }
        const auto fit = detail::ols(x, y);
        ar = fit.beta.head(p);
        ma = fit.beta.tail(q);
    } catch (const Error&) {
        ar.setZero();
        ma.setZero();
        return;
    }
    Eigen::VectorXd pacf;
    if (!ar_to_pacf(ar, pacf)) {
        ar.setZero();
    }
    if (!ar_to_pacf(-ma, pacf)) {
        ma.setZero();
    }
}

struct Natural {
    double mu = 0.0;
    Eigen::VectorXd ar;
    Eigen::VectorXd ma;
};

std::vector<double> demean(std::span<const double> w, double mu) {
    std::vector<double> out(w.begin(), w.end());
    for (double& v : out) {
        v -= mu;
    }
    return out;
}

double robust_sd(std::span<const double> w) {
    const double n = static_cast<double>(w.size());
    const double mean = std::accumulate(w.begin(), w.end(), 0.0) / n;
    double ss = 0.0;
    for (const double v : w) {
        ss += (v - mean) * (v - mean);
    }
    return std::sqrt(ss / n);
}

// Numerical Hessian of the full log-likelihood in (mu, ar, ma, sigma2).
StandardErrors standard_errors(std::span<const double> w, const ArimaFit& fit) {
    const int p = fit.order.p;
    const int q = fit.order.q;
    const int c = fit.include_const ? 1 : 0;
    const int k = c + p + q + 1;
    Eigen::VectorXd x0(k);
    if (c) {
        x0(0) = fit.constant;
    }
    x0.segment(c, p) = fit.ar;
    x0.segment(c + p, q) = fit.ma;
    x0(k - 1) = fit.sigma2;

    const auto loglik = [&](const Eigen::VectorXd& x) {
        const double mu = c ? x(0) : 0.0;
        const double s2 = x(k - 1);
        if (!(s2 > 0.0)) {
            return kNaN;
        }
        const StateSpace ss = build_state_space(x.segment(c, p), x.segment(c + p, q));
        const std::vector<double> d = demean(w, mu);
        const FilterResult fr = run_filter(ss, d, nullptr);
        return fr.ok ? full_loglik(fr, s2) : kNaN;
    };

    Eigen::VectorXd h(k);
    for (int i = 0; i < k; ++i) {
        h(i) = 1e-4 * std::max(std::abs(x0(i)), 1e-2);
    }
    const double f0 = loglik(x0);
    Eigen::MatrixXd hess(k, k);
    for (int i = 0; i < k; ++i) {
        Eigen::VectorXd xp = x0;
        Eigen::VectorXd xm = x0;
        xp(i) += h(i);
        xm(i) -= h(i);
        hess(i, i) = (loglik(xp) - 2.0 * f0 + loglik(xm)) / (h(i) * h(i));
        for (int j = 0; j < i; ++j) {
            Eigen::VectorXd pp = x0, pm = x0, mp = x0, mm = x0;
            pp(i) += h(i); pp(j) += h(j);
            pm(i) += h(i); pm(j) -= h(j);
            mp(i) -= h(i); mp(j) += h(j);
            mm(i) -= h(i); mm(j) -= h(j);
            hess(i, j) = (loglik(pp) - loglik(pm) - loglik(mp) + loglik(mm)) / (4.0 * h(i) * h(j));
            hess(j, i) = hess(i, j);
        }
    }
    StandardErrors se;
    se.ar = Eigen::VectorXd::Constant(p, kNaN);
    se.ma = Eigen::VectorXd::Constant(q, kNaN);
    se.constant = kNaN;
    se.sigma2 = kNaN;
    if (!hess.allFinite()) {
        return se;
    }
    const Eigen::MatrixXd info = -hess;
    const Eigen::LDLT<Eigen::MatrixXd> ldlt(info);
    if (ldlt.info() != Eigen::Success || !ldlt.isPositive() || (ldlt.vectorD().array() <= 0.0).any()) {
        return se;
    }
    const Eigen::VectorXd var = ldlt.solve(Eigen::MatrixXd::Identity(k, k)).diagonal();
    const Eigen::VectorXd sd = var.cwiseMax(0.0).cwiseSqrt();
    if (c) {
        se.constant = sd(0);
    }
    se.ar = sd.segment(c, p);
    se.ma = sd.segment(c + p, q);
    se.sigma2 = sd(k - 1);
    return se;
}

double binomial_sign_coef(int d, int k) {
    // (-1)^(k+1) C(d, k): weight of y_(t-k) in y_t - diff^d y_t
    double c = 1.0;
    for (int i = 0; i < k; ++i) {
        c = c * (d - i) / (i + 1);
    }
    return (k % 2 == 1) ? c : -c;
}

}  // namespace

void ArimaOrder::validate() const {
    if (p < 0 || d < 0 || q < 0) {
        fail(ErrorCode::validation, "ARIMA orders must be non-negative, got " + to_string(*this));
    }
    if (std::max(p, q + 1) > kMaxState) {
        fail(ErrorCode::validation, "ARIMA order too large: " + to_string(*this));
    }
}

std::string to_string(const ArimaOrder& order) {
    return "(" + std::to_string(order.p) + "," + std::to_string(order.d) + "," + std::to_string(order.q) + ")";
}

InformationCriteria information_criteria(double loglik, int k, int n) {
    const double kd = k;
    const double nd = n;
    return {2.0 * kd - 2.0 * loglik, kd * std::log(nd) - 2.0 * loglik,
            2.0 * kd * std::log(std::log(nd)) - 2.0 * loglik};
}

std::vector<double> difference(std::span<const double> series, int d) {
    if (d < 0) {
        fail(ErrorCode::validation, "difference order must be >= 0");
    }
    if (static_cast<int>(series.size()) < d + 1) {
        fail(ErrorCode::insufficient_data, "series shorter than d + 1");
    }
    std::vector<double> out(series.begin(), series.end());
    for (int pass = 0; pass < d; ++pass) {
        for (std::size_t i = 0; i + 1 < out.size(); ++i) {
            out[i] = out[i + 1] - out[i];
        }
        out.pop_back();
    }
    return out;
}

std::vector<double> integrate(std::span<const double> values, std::span<const double> anchors) {
    const int d = static_cast<int>(anchors.size());
    std::vector<double> out(anchors.begin(), anchors.end());
    out.reserve(anchors.size() + values.size());
    for (const double v : values) {
        double y = v;
        const std::size_t t = out.size();
        for (int k = 1; k <= d; ++k) {
            y += binomial_sign_coef(d, k) * out[t - static_cast<std::size_t>(k)];
        }
        out.push_back(y);
    }
    return out;
}

double min_root_modulus(const Eigen::VectorXd& c) {
    // Roots of 1 - c1 z - ... - ck z^k are reciprocals of the companion eigenvalues.
    Eigen::Index k = c.size();
    while (k > 0 && c(k - 1) == 0.0) {
        --k;
    }
    if (k == 0) {
        return kInf;
    }
    Eigen::MatrixXd companion = Eigen::MatrixXd::Zero(k, k);
    companion.row(0) = c.head(k).transpose();
    for (Eigen::Index i = 1; i < k; ++i) {
        companion(i, i - 1) = 1.0;
    }
    const Eigen::VectorXcd eig = Eigen::EigenSolver<Eigen::MatrixXd>(companion, false).eigenvalues();
    const double largest = eig.cwiseAbs().maxCoeff();
    return largest > 0.0 ? 1.0 / largest : kInf;
}

ArimaFit fit_arima(std::span<const double> series, const ArimaOrder& order, bool include_const,
                   const FitOptions& options) {
    order.validate();
    const int p = order.p;
    const int q = order.q;
    if (static_cast<int>(series.size()) <= p + q + order.d + 10) {
        fail(ErrorCode::insufficient_data, "ARIMA" + to_string(order) + " needs more than " +
                                               std::to_string(p + q + order.d + 10) + " observations");
    }
    for (const double v : series) {
        if (!std::isfinite(v)) {
            fail(ErrorCode::numeric, "ARIMA input contains non-finite values");
        }
    }
    const std::vector<double> w = difference(series, order.d);
    const int n = static_cast<int>(w.size());
    const int c = include_const ? 1 : 0;

    const double mean = include_const ? std::accumulate(w.begin(), w.end(), 0.0) / n : 0.0;
    const double sd = robust_sd(w);
    if (!(sd > 0.0)) {
        fail(ErrorCode::numeric, "ARIMA input has zero variance after differencing");
    }
    Eigen::VectorXd ar0, ma0;
    hannan_rissanen(demean(w, mean), p, q, ar0, ma0);

    const int dim = c + p + q;
    Eigen::VectorXd x0(dim);
    Eigen::VectorXd steps(dim);
    if (c) {
        x0(0) = mean;
        steps(0) = 0.1 * sd;
    }
    x0.segment(c, p) = unconstrain_ar(ar0);
    x0.segment(c + p, q) = unconstrain_ar(-ma0);
    steps.segment(c, p + q).setConstant(0.1);

    const auto unpack = [&](const Eigen::VectorXd& x) {
        Natural nat;
        nat.mu = c ? x(0) : 0.0;
        nat.ar = constrain_ar(x.segment(c, p));
        nat.ma = constrain_ma(x.segment(c + p, q));
        return nat;
    };
    std::vector<double> scratch(w.size());
    const auto objective = [&](const Eigen::VectorXd& x) {
        const Natural nat = unpack(x);
        for (std::size_t i = 0; i < w.size(); ++i) {
            scratch[i] = w[i] - nat.mu;
        }
        const FilterResult fr = run_filter(build_state_space(nat.ar, nat.ma), scratch, nullptr);
        if (!fr.ok || !(fr.sum_v2_f > 0.0)) {
            return kInf;
        }
        return -concentrated_loglik(fr);
    };

    NelderMeadResult opt;
    if (dim == 0) {
        opt.x = x0;
        opt.value = objective(x0);
        opt.converged = true;
    } else {
        NelderMeadOptions nm;
        nm.max_iterations = options.max_iterations;
        nm.x_tolerance = options.tolerance;
        nm.max_restarts = options.max_restarts;
        opt = nelder_mead(objective, x0, steps, nm);
    }
    if (!std::isfinite(opt.value)) {
        fail(ErrorCode::numeric, "ARIMA" + to_string(order) + " likelihood is not finite");
    }

    const Natural nat = unpack(opt.x);
    const std::vector<double> wd = demean(w, nat.mu);
    const FilterResult fr = run_filter(build_state_space(nat.ar, nat.ma), wd, nullptr);

    ArimaFit fit;
    fit.order = order;
    fit.include_const = include_const;
    fit.constant = nat.mu;
    fit.ar = nat.ar;
    fit.ma = nat.ma;
    fit.n_obs = n;
    fit.sigma2 = fr.sum_v2_f / n;
    fit.loglik = full_loglik(fr, fit.sigma2);
    const InformationCriteria ic = information_criteria(fit.loglik, fit.parameter_count(), n);
    fit.aic = ic.aic;
    fit.bic = ic.bic;
    fit.hqic = ic.hqic;
    fit.converged = opt.converged;
    fit.iterations = opt.iterations;
    fit.forecast_state = Eigen::VectorXd(fr.a_next);
    fit.tail.assign(series.end() - order.d, series.end());
    fit.data.assign(series.begin(), series.end());

    fit.min_ar_root = min_root_modulus(fit.ar);
    fit.min_ma_root = min_root_modulus(-fit.ma);
    fit.stationary = fit.min_ar_root > 1.0;
    fit.invertible = fit.min_ma_root > 1.0;
    if (!fit.stationary) {
        fit.warnings.push_back("AR polynomial has a root on or inside the unit circle");
    } else if (fit.min_ar_root < 1.0 + 1e-6) {
        fit.warnings.push_back("AR polynomial root is within 1e-6 of the unit circle");
    }
    if (!fit.invertible) {
        fit.warnings.push_back("MA polynomial has a root on or inside the unit circle");
    } else if (fit.min_ma_root < 1.0 + 1e-6) {
        fit.warnings.push_back("MA polynomial root is within 1e-6 of the unit circle");
    }

    if (options.standard_errors) {
        fit.std_errors = standard_errors(w, fit);
    } else {
        fit.std_errors.constant = kNaN;
        fit.std_errors.ar = Eigen::VectorXd::Constant(p, kNaN);
        fit.std_errors.ma = Eigen::VectorXd::Constant(q, kNaN);
        fit.std_errors.sigma2 = kNaN;
    }
    if (!include_const) {
        fit.std_errors.constant = kNaN;
    }

    if (!fit.converged) {
        fit.warnings.push_back("optimizer reached the iteration cap");
        throw ConvergenceError("ARIMA" + to_string(order) + " did not converge within " +
                                   std::to_string(options.max_iterations) + " iterations",
                               std::move(fit));
    }
    return fit;
}

std::vector<double> one_step_predictions(const ArimaFit& fit, std::span<const double> series) {
    const int d = fit.order.d;
    if (static_cast<int>(series.size()) < d + 1) {
        fail(ErrorCode::insufficient_data, "series shorter than d + 1");
    }
    const std::vector<double> w = difference(series, d);
    const std::vector<double> wd = demean(w, fit.constant);
    std::vector<double> pred_w(w.size());
    const FilterResult fr = run_filter(build_state_space(fit.ar, fit.ma), wd, pred_w.data());
    if (!fr.ok) {
        fail(ErrorCode::numeric, "filter failed for ARIMA" + to_string(fit.order));
    }
    std::vector<double> out(series.size(), kNaN);
    for (std::size_t i = 0; i < w.size(); ++i) {
        const std::size_t t = i + static_cast<std::size_t>(d);
        double y = pred_w[i] + fit.constant;
        for (int k = 1; k <= d; ++k) {
            y += binomial_sign_coef(d, k) * series[t - static_cast<std::size_t>(k)];
        }
        out[t] = y;
    }
    return out;
}

std::vector<double> predict_in_sample(const ArimaFit& fit, int start_index, int end_index) {
    const int n = static_cast<int>(fit.data.size());
    if (start_index < fit.order.d || end_index < start_index || end_index >= n) {
        fail(ErrorCode::validation, "prediction range [" + std::to_string(start_index) + ", " +
                                        std::to_string(end_index) + "] outside [" + std::to_string(fit.order.d) +
                                        ", " + std::to_string(n - 1) + "]");
    }
    const std::vector<double> all = one_step_predictions(fit, fit.data);
    return {all.begin() + start_index, all.begin() + end_index + 1};
}

Forecast forecast_out(const ArimaFit& fit, int horizon) {
    if (horizon < 1) {
        fail(ErrorCode::validation, "forecast horizon must be >= 1");
    }
    const int d = fit.order.d;
    if (static_cast<int>(fit.tail.size()) != d) {
        fail(ErrorCode::validation, "fit has no forecast origin");
    }
    const StateSpace ss = build_state_space(fit.ar, fit.ma);
    if (fit.forecast_state.size() != ss.r) {
        fail(ErrorCode::validation, "fit has no forecast origin");
    }
    SVec a = fit.forecast_state;
    std::vector<double> diffs;
    diffs.reserve(static_cast<std::size_t>(horizon));
    for (int h = 0; h < horizon; ++h) {
        diffs.push_back(a(0) + fit.constant);
        a = (ss.t * a).eval();
    }
    Forecast fc;
    const std::vector<double> full = integrate(diffs, fit.tail);
    fc.mean.assign(full.begin() + d, full.end());

    // psi weights of phi(L)(1-L)^d psi(L) = theta(L)
    Eigen::VectorXd phi_star = Eigen::VectorXd::Zero(fit.order.p + d);
    {
        std::vector<double> poly(1, 1.0);  // 1 - phi_1 L - ...
        for (Eigen::Index i = 0; i < fit.ar.size(); ++i) {
            poly.push_back(-fit.ar(i));
        }
        for (int pass = 0; pass < d; ++pass) {
            std::vector<double> next(poly.size() + 1, 0.0);
            for (std::size_t i = 0; i < poly.size(); ++i) {
                next[i] += poly[i];
                next[i + 1] -= poly[i];
            }
            poly = next;
        }
        for (Eigen::Index i = 0; i < phi_star.size(); ++i) {
            phi_star(i) = -poly[static_cast<std::size_t>(i + 1)];
        }
    }
    std::vector<double> psi(static_cast<std::size_t>(horizon), 0.0);
    psi[0] = 1.0;
    for (int j = 1; j < horizon; ++j) {
        double v = j <= fit.ma.size() ? fit.ma(j - 1) : 0.0;
        for (int i = 1; i <= std::min<int>(j, static_cast<int>(phi_star.size())); ++i) {
            v += phi_star(i - 1) * psi[static_cast<std::size_t>(j - i)];
        }
        psi[static_cast<std::size_t>(j)] = v;
    }
    double acc = 0.0;
    for (int h = 0; h < horizon; ++h) {
        acc += psi[static_cast<std::size_t>(h)] * psi[static_cast<std::size_t>(h)];
        fc.variance.push_back(fit.sigma2 * acc);
    }
    return fc;
}

std::vector<double> simulate_arma(const ArimaOrder& order, double constant, const Eigen::VectorXd& ar,
                                  const Eigen::VectorXd& ma, double sigma2, int n, std::uint64_t seed,
                                  int burn_in) {
    order.validate();
    if (ar.size() != order.p || ma.size() != order.q) {
        fail(ErrorCode::dimension, "coefficient counts do not match ARIMA" + to_string(order));
    }
    if (!(sigma2 > 0.0) || n < 1 || burn_in < 0) {
        fail(ErrorCode::validation, "simulate_arma needs sigma2 > 0, n >= 1, burn_in >= 0");
    }
    if (!(min_root_modulus(ar) > 1.0)) {
        fail(ErrorCode::validation, "AR coefficients are not stationary");
    }
    if (!(min_root_modulus(-ma) > 1.0)) {
        fail(ErrorCode::validation, "MA coefficients are not invertible");
    }
    Rng rng(derive_seed(seed, "arma"));
    const double sd = std::sqrt(sigma2);
    const int total = n + burn_in;
    std::vector<double> y(static_cast<std::size_t>(total), 0.0);
    std::vector<double> e(static_cast<std::size_t>(total), 0.0);
    for (int t = 0; t < total; ++t) {
        const auto ut = static_cast<std::size_t>(t);
        e[ut] = sd * rng.normal();
        double v = constant + e[ut];
        for (int i = 1; i <= order.p && i <= t; ++i) {
            v += ar(i - 1) * y[ut - static_cast<std::size_t>(i)];
        }
        for (int j = 1; j <= order.q && j <= t; ++j) {
            v += ma(j - 1) * e[ut - static_cast<std::size_t>(j)];
        }
        y[ut] = v;
    }
    std::vector<double> out(y.begin() + burn_in, y.end());
    for (int pass = 0; pass < order.d; ++pass) {
        double acc = 0.0;
        for (double& v : out) {
            acc += v;
            v = acc;
        }
    }
    return out;
}

namespace {

nlohmann::json number_or_null(double v) {
    return std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(nullptr);
}

nlohmann::json vector_json(const Eigen::VectorXd& v) {
    nlohmann::json arr = nlohmann::json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) {
        arr.push_back(number_or_null(v(i)));
    }
    return arr;
}

double number_from(const nlohmann::json& j) {
    return j.is_null() ? kNaN : j.get<double>();
}

Eigen::VectorXd vector_from(const nlohmann::json& j) {
    Eigen::VectorXd v(static_cast<Eigen::Index>(j.size()));
    for (std::size_t i = 0; i < j.size(); ++i) {
        v(static_cast<Eigen::Index>(i)) = number_from(j[i]);
    }
    return v;
}

}  // namespace

nlohmann::json fit_to_json(const ArimaFit& fit) {
    return {
        {"format", "loadcast-arima"},
        {"version", 1},
        {"order", {{"p", fit.order.p}, {"d", fit.order.d}, {"q", fit.order.q}}},
        {"include_const", fit.include_const},
        {"const", number_or_null(fit.constant)},
        {"ar", vector_json(fit.ar)},
        {"ma", vector_json(fit.ma)},
        {"sigma2", fit.sigma2},
        {"loglik", fit.loglik},
        {"aic", fit.aic},
        {"bic", fit.bic},
        {"hqic", fit.hqic},
        {"n_obs", fit.n_obs},
        {"std_errors",
         {{"const", number_or_null(fit.std_errors.constant)},
          {"ar", vector_json(fit.std_errors.ar)},
          {"ma", vector_json(fit.std_errors.ma)},
          {"sigma2", number_or_null(fit.std_errors.sigma2)}}},
        {"converged", fit.converged},
        {"iterations", fit.iterations},
        {"min_ar_root", number_or_null(fit.min_ar_root)},
        {"min_ma_root", number_or_null(fit.min_ma_root)},
        {"stationary", fit.stationary},
        {"invertible", fit.invertible},
        {"warnings", fit.warnings},
        {"forecast_state", vector_json(fit.forecast_state)},
        {"tail", fit.tail},
    };
}

ArimaFit fit_from_json(const nlohmann::json& j) {
    try {
        if (j.at("format").get<std::string>() != "loadcast-arima") {
            fail(ErrorCode::parse, "not an ARIMA fit file");
        }
        ArimaFit fit;
        fit.order = {j.at("order").at("p").get<int>(), j.at("order").at("d").get<int>(),
                     j.at("order").at("q").get<int>()};
        fit.order.validate();
        fit.include_const = j.at("include_const").get<bool>();
        fit.constant = number_from(j.at("const"));
        fit.ar = vector_from(j.at("ar"));
        fit.ma = vector_from(j.at("ma"));
        if (fit.ar.size() != fit.order.p || fit.ma.size() != fit.order.q) {
            fail(ErrorCode::parse, "coefficient counts do not match the order");
        }
        fit.sigma2 = j.at("sigma2").get<double>();
        fit.loglik = j.at("loglik").get<double>();
        fit.aic = j.at("aic").get<double>();
        fit.bic = j.at("bic").get<double>();
        fit.hqic = j.at("hqic").get<double>();
        fit.n_obs = j.at("n_obs").get<int>();
        const auto& se = j.at("std_errors");
        fit.std_errors.constant = number_from(se.at("const"));
        fit.std_errors.ar = vector_from(se.at("ar"));
        fit.std_errors.ma = vector_from(se.at("ma"));
        fit.std_errors.sigma2 = number_from(se.at("sigma2"));
        fit.converged = j.at("converged").get<bool>();
        fit.iterations = j.at("iterations").get<int>();
        fit.min_ar_root = j.at("min_ar_root").is_null() ? kInf : j.at("min_ar_root").get<double>();
        fit.min_ma_root = j.at("min_ma_root").is_null() ? kInf : j.at("min_ma_root").get<double>();
        fit.stationary = j.at("stationary").get<bool>();
        fit.invertible = j.at("invertible").get<bool>();
        fit.warnings = j.at("warnings").get<std::vector<std::string>>();
        fit.forecast_state = vector_from(j.at("forecast_state"));
        fit.tail = j.at("tail").get<std::vector<double>>();
        return fit;
    } catch (const nlohmann::json::exception& e) {
        fail(ErrorCode::parse, std::string("ARIMA fit JSON: ") + e.what());
    }
}

}  // namespace loadcast::arima
