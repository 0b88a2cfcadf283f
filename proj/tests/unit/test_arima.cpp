#include <algorithm>
#include <cmath>
#include <numeric>

#include <catch_amalgamated.hpp>

#include "loadcast/arima/adf.hpp"
#include "loadcast/arima/arima.hpp"
#include "loadcast/arima/nelder_mead.hpp"
#include "loadcast/arima/stepwise.hpp"
#include "loadcast/errors.hpp"
#include "loadcast/random.hpp"

using namespace loadcast;
using namespace loadcast::arima;
using Catch::Approx;

namespace {

// Deterministic ARMA(2,1)-like series with hash noise; the reference values
// below were computed from the same formula with statsmodels.
std::vector<double> reference_series() {
    const int n = 600;
    std::vector<double> u(n), y(n);
    for (int i = 0; i < n; ++i) {
        const double s = std::sin(i * 12.9898 + 1.0) * 43758.5453;
        u[i] = (s - std::floor(s)) - 0.5;
    }
    for (int i = 0; i < n; ++i) {
        const double y1 = i > 0 ? y[i - 1] : 0.0;
        const double y2 = i > 1 ? y[i - 2] : 0.0;
        const double u1 = i > 0 ? u[i - 1] : 0.0;
        y[i] = 0.3 + 0.6 * y1 - 0.2 * y2 + u[i] + 0.3 * u1;
    }
    return y;
}

Eigen::VectorXd vec(std::initializer_list<double> v) {
    Eigen::VectorXd out(static_cast<Eigen::Index>(v.size()));
    std::copy(v.begin(), v.end(), out.data());
    return out;
}

double mean(const std::vector<double>& v) { return std::accumulate(v.begin(), v.end(), 0.0) / v.size(); }

double variance(const std::vector<double>& v) {
    const double m = mean(v);
    double s = 0.0;
    for (const double x : v) {
        s += (x - m) * (x - m);
    }
    return s / v.size();
}

}  // namespace

TEST_CASE("information criteria") {
    const auto ic = information_criteria(-835.531, 5, 1672);
    CHECK(ic.aic == Approx(1681.061).margin(0.01));
    CHECK(ic.bic == Approx(1708.170).margin(0.01));
    CHECK(ic.hqic == Approx(1691.105).margin(0.01));
    CHECK(ic.aic == 2 * 5 + 2 * 835.531);
}

TEST_CASE("ADF critical values and p-values") {
    const auto cv = adf_critical_values(2066);
    CHECK(cv.one_percent == Approx(-3.4335).margin(0.001));
    CHECK(cv.five_percent == Approx(-2.8629).margin(0.001));
    CHECK(cv.ten_percent == Approx(-2.5675).margin(0.001));
    CHECK(cv.one_percent == Approx(-3.433519140120394).margin(1e-9));
    CHECK(adf_p_value(-6.475502795174342) == Approx(1.3343141898787667e-08).epsilon(1e-6));
    CHECK(adf_p_value(-30.0) == 0.0);
    CHECK(adf_p_value(5.0) == 1.0);
    double prev = 0.0;
    for (double s = -8.0; s <= 2.0; s += 0.25) {
        const double p = adf_p_value(s);
        CHECK(p >= prev);
        prev = p;
    }
}

TEST_CASE("ADF regression matches the reference implementation") {
    const auto y = reference_series();
    const auto r = adf_test(y);
    CHECK(r.statistic == Approx(-11.311126952623983).epsilon(1e-9));
    CHECK(r.p_value == Approx(1.2382664020267583e-20).epsilon(1e-6));
    CHECK(r.used_lags == 2);
    CHECK(r.n_obs == 597);
    CHECK(r.n_obs == static_cast<int>(y.size()) - r.used_lags - 1);
    CHECK(r.critical_values.one_percent == Approx(-3.4413510722333087).epsilon(1e-10));
    CHECK(r.critical_values.five_percent == Approx(-2.8663934413235266).epsilon(1e-10));
    CHECK(r.critical_values.ten_percent == Approx(-2.5693547658168003).epsilon(1e-10));

    auto shifted = y;
    for (auto& v : shifted) {
        v += 17.5;
    }
    CHECK(std::abs(adf_test(shifted).statistic - r.statistic) < 1e-8);

    const auto report = format_adf_report(r);
    CHECK(report.find("A. ADF :") != std::string::npos);
    CHECK(report.find("F. Critical Values :") != std::string::npos);
}

TEST_CASE("ADF conclusions on white noise and a random walk") {
    Rng rng(2000);
    std::vector<double> noise(2000), walk(2000);
    double level = 0.0;
    for (std::size_t t = 0; t < noise.size(); ++t) {
        noise[t] = rng.normal();
        level += rng.normal();
        walk[t] = level;
    }
    CHECK(adf_test(noise).p_value < 0.05);
    CHECK(adf_test(noise).statistic < -10.0);
    CHECK(adf_test(walk).p_value > 0.05);
    CHECK(adf_test(noise, 0).used_lags == 0);
}

TEST_CASE("ADF errors") {
    CHECK_THROWS_AS(adf_test(std::vector<double>(10, 1.0)), Error);
    try {
        adf_test(std::vector<double>(100, 2.0));
        FAIL("no throw");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::numeric);
    }
}

TEST_CASE("difference and integrate") {
    const std::vector<double> s{1, 3, 6, 10, 15};
    CHECK(difference(s, 0) == s);
    CHECK(difference(std::vector<double>{1, 3, 6}, 1) == std::vector<double>{2, 3});
    CHECK(difference(s, 2) == std::vector<double>{1, 1, 1});
    CHECK_THROWS_AS(difference(std::vector<double>{1.0}, 1), Error);

    Rng rng(4);
    std::vector<double> r(50);
    for (auto& v : r) {
        v = rng.uniform(-3.0, 3.0);
    }
    for (int d = 0; d <= 3; ++d) {
        const auto back = integrate(difference(r, d), std::span<const double>(r.data(), static_cast<std::size_t>(d)));
        REQUIRE(back.size() == r.size());
        for (std::size_t i = 0; i < r.size(); ++i) {
            CHECK(back[i] == Approx(r[i]).margin(1e-12));
        }
    }
}

TEST_CASE("exact likelihood matches the reference implementation") {
    const auto y = reference_series();
    SECTION("(2,0,1)") {
        const auto fit = fit_arima(y, {2, 0, 1});
        CHECK(fit.loglik == Approx(-93.97744886349929).margin(1e-4));
        CHECK(fit.constant == Approx(0.48989067487964033).margin(1e-3));
        CHECK(fit.ar(0) == Approx(0.5888087646881541).margin(2e-3));
        CHECK(fit.ar(1) == Approx(-0.21556256455503534).margin(2e-3));
        CHECK(fit.ma(0) == Approx(0.34140014615669356).margin(2e-3));
        CHECK(fit.sigma2 == Approx(0.07996747358932539).epsilon(1e-3));
        CHECK(fit.n_obs == 600);
        CHECK(fit.stationary);
        CHECK(fit.invertible);
        CHECK(fit.min_ar_root > 1.0);
        const auto ic = information_criteria(fit.loglik, 5, 600);
        CHECK(fit.aic == ic.aic);
        CHECK(fit.bic == ic.bic);
        CHECK(std::isfinite(fit.std_errors.ar(0)));
        CHECK(fit.std_errors.ar(0) > 0.0);
    }
    SECTION("(1,0,0)") {
        const auto fit = fit_arima(y, {1, 0, 0});
        CHECK(fit.loglik == Approx(-149.97358027629426).margin(1e-4));
        CHECK(fit.ar(0) == Approx(0.6253496511065254).margin(1e-3));
    }
    SECTION("(0,0,0) is the sample mean and variance") {
        const auto fit = fit_arima(y, {0, 0, 0});
        CHECK(fit.loglik == Approx(-299.03589657639554).margin(1e-4));
        CHECK(fit.constant == Approx(mean(y)).margin(1e-6));
        CHECK(fit.sigma2 == Approx(variance(y)).epsilon(1e-6));
    }
    SECTION("(1,1,1) is at least as good as the reference optimum") {
        const auto fit = fit_arima(y, {1, 1, 1}, false);
        CHECK(fit.loglik >= -188.85077690619178 - 1e-4);
        CHECK(fit.n_obs == 599);
    }
}

TEST_CASE("fit preconditions") {
    CHECK_THROWS_AS(fit_arima(std::vector<double>(12, 1.0), {2, 0, 1}), Error);
    CHECK_THROWS_AS(fit_arima(reference_series(), {-1, 0, 0}), Error);
}

TEST_CASE("AR(1) recovery, prediction and forecast closed forms") {
    const auto y = simulate_arma({1, 0, 0}, 0.3 * (1.0 - 0.7), vec({0.7}), Eigen::VectorXd(), 1.0, 5000, 21);
    const auto fit = fit_arima(y, {1, 0, 0});
    CHECK(fit.ar(0) == Approx(0.7).margin(0.05));
    const double phi = fit.ar(0);
    const double mu = fit.constant;

    const auto pred = predict_in_sample(fit, 0, 99);
    REQUIRE(pred.size() == 100);
    CHECK(pred[0] == Approx(mu).epsilon(1e-12));
    for (std::size_t t = 1; t < pred.size(); ++t) {
        CHECK(std::abs(pred[t] - (mu * (1.0 - phi) + phi * y[t - 1])) < 1e-10);
    }

    const auto fc = forecast_out(fit, 6);
    REQUIRE(fc.mean.size() == 6);
    for (int h = 1; h <= 6; ++h) {
        CHECK(std::abs(fc.mean[h - 1] - (mu + std::pow(phi, h) * (y.back() - mu))) < 1e-10);
    }
    CHECK(fc.variance[0] == Approx(fit.sigma2).epsilon(1e-12));
    CHECK(fc.variance[1] == Approx(fit.sigma2 * (1.0 + phi * phi)).epsilon(1e-12));

    const auto last = predict_in_sample(fit, 4999, 4999);
    const auto steps = one_step_predictions(fit, y);
    CHECK(last[0] == steps[4999]);
    CHECK_THROWS_AS(predict_in_sample(fit, 0, 5000), Error);
    CHECK_THROWS_AS(predict_in_sample(fit, 10, 5), Error);
    CHECK_THROWS_AS(forecast_out(fit, 0), Error);
}

TEST_CASE("white-noise model predicts its constant") {
    const auto y = simulate_arma({0, 0, 0}, 2.5, Eigen::VectorXd(), Eigen::VectorXd(), 0.5, 400, 8);
    const auto fit = fit_arima(y, {0, 0, 0});
    for (const double p : predict_in_sample(fit, 0, 399)) {
        CHECK(p == Approx(fit.constant).epsilon(1e-12));
    }
    const auto fc = forecast_out(fit, 5);
    for (int h = 0; h < 5; ++h) {
        CHECK(fc.mean[h] == Approx(fit.constant).epsilon(1e-12));
        CHECK(fc.variance[h] == Approx(fit.sigma2).epsilon(1e-12));
    }
}

TEST_CASE("one-step predictions are causal") {
    const auto y = reference_series();
    const auto fit = fit_arima(y, {2, 0, 1});
    const auto base = one_step_predictions(fit, y);
    for (const std::size_t t : {0u, 1u, 50u, 300u, 599u}) {
        auto bumped = y;
        for (std::size_t s = t; s < bumped.size(); ++s) {
            bumped[s] += 3.0;
        }
        const auto other = one_step_predictions(fit, bumped);
        for (std::size_t k = 0; k <= t; ++k) {
            CHECK(other[k] == base[k]);
        }
    }
}

TEST_CASE("forecast horizon one continues the one-step recursion") {
    const auto y = reference_series();
    std::vector<double> head(y.begin(), y.end() - 1);
    const auto fit = fit_arima(head, {2, 0, 1});
    const auto fc = forecast_out(fit, 1);
    const auto steps = one_step_predictions(fit, y);
    CHECK(fc.mean[0] == Approx(steps.back()).margin(1e-10));
}

TEST_CASE("integrated model forecasts on the original scale") {
    const auto y = simulate_arma({1, 1, 0}, 0.05, vec({0.5}), Eigen::VectorXd(), 0.2, 800, 3);
    const auto fit = fit_arima(y, {1, 1, 0});
    const auto steps = one_step_predictions(fit, y);
    CHECK(std::isnan(steps[0]));
    const auto pred = predict_in_sample(fit, 1, 799);
    CHECK(pred.size() == 799);
    CHECK(pred[10] == steps[11]);
    CHECK(std::abs(pred.back() - y.back()) < 3.0);
    const auto fc = forecast_out(fit, 3);
    CHECK(fc.variance[2] > fc.variance[0]);
}

TEST_CASE("simulate_arma") {
    const auto a = simulate_arma({0, 0, 0}, 0.0, Eigen::VectorXd(), Eigen::VectorXd(), 1.0, 10000, 5);
    CHECK(variance(a) == Approx(1.0).margin(0.1));
    CHECK(a == simulate_arma({0, 0, 0}, 0.0, Eigen::VectorXd(), Eigen::VectorXd(), 1.0, 10000, 5));
    CHECK(a != simulate_arma({0, 0, 0}, 0.0, Eigen::VectorXd(), Eigen::VectorXd(), 1.0, 10000, 6));

    const double c = 0.6, phi = 0.5;
    const auto ar = simulate_arma({1, 0, 0}, c, vec({phi}), Eigen::VectorXd(), 1.0, 10000, 7);
    const double se = std::sqrt(1.0 / (1.0 - phi * phi) * (1.0 + phi) / (1.0 - phi) / 10000.0);
    CHECK(std::abs(mean(ar) - c / (1.0 - phi)) < 3.0 * se);

    CHECK_THROWS_AS(simulate_arma({1, 0, 0}, 0.0, vec({1.1}), Eigen::VectorXd(), 1.0, 100, 1), Error);
    CHECK_THROWS_AS(simulate_arma({0, 0, 1}, 0.0, Eigen::VectorXd(), vec({-1.5}), 1.0, 100, 1), Error);
    CHECK_THROWS_AS(simulate_arma({1, 0, 0}, 0.0, vec({0.1, 0.2}), Eigen::VectorXd(), 1.0, 100, 1), Error);
}

TEST_CASE("root moduli") {
    CHECK(min_root_modulus(vec({0.5})) == Approx(2.0).epsilon(1e-12));
    CHECK(min_root_modulus(Eigen::VectorXd()) == std::numeric_limits<double>::infinity());
    // (1 - 0.5z)(1 - 0.8z) = 1 - 1.3z + 0.4z^2
    CHECK(min_root_modulus(vec({1.3, -0.4})) == Approx(1.25).epsilon(1e-10));
}

TEST_CASE("fit JSON round trip") {
    const auto fit = fit_arima(reference_series(), {2, 0, 1});
    const auto back = fit_from_json(fit_to_json(fit));
    CHECK(back.order == fit.order);
    CHECK(back.ar == fit.ar);
    CHECK(back.ma == fit.ma);
    CHECK(back.constant == fit.constant);
    CHECK(back.sigma2 == fit.sigma2);
    CHECK(back.loglik == fit.loglik);
    CHECK(back.std_errors.ar == fit.std_errors.ar);
    const auto f1 = forecast_out(fit, 4);
    const auto f2 = forecast_out(back, 4);
    CHECK(f1.mean == f2.mean);
}

TEST_CASE("Nelder-Mead minimises the Rosenbrock function") {
    const auto rosen = [](const Eigen::VectorXd& x) {
        return 100.0 * std::pow(x(1) - x(0) * x(0), 2) + std::pow(1.0 - x(0), 2);
    };
    const auto r = nelder_mead(rosen, vec({-1.2, 1.0}), vec({0.1, 0.1}));
    CHECK(r.converged);
    CHECK(r.x(0) == Approx(1.0).margin(1e-5));
    CHECK(r.x(1) == Approx(1.0).margin(1e-5));
}

TEST_CASE("differencing choice") {
    Rng rng(13);
    std::vector<double> walk(1000);
    double level = 0.0;
    for (auto& v : walk) {
        level += rng.normal();
        v = level;
    }
    const auto choice = choose_differencing(walk);
    CHECK(choice.d == 1);
    CHECK(choice.tests.size() == 2);
    CHECK(choose_differencing(difference(walk, 1)).d == 0);
}

TEST_CASE("stepwise search on a simulated ARMA(2,1)") {
    const double mu = 0.6016;
    const auto ar = vec({0.7689, -0.0986});
    const auto y = simulate_arma({2, 0, 1}, mu * (1.0 - ar.sum()), ar, vec({-0.0958}), 0.159, 2090, 5000);
    const auto result = stepwise_search(y);
    CHECK(result.order.d == 0);
    CHECK(std::abs(result.order.p - 2) <= 1);
    CHECK(std::abs(result.order.q - 1) <= 1);

    const auto& trace = result.trace;
    REQUIRE(trace.entries.size() >= 5);
    CHECK(trace.entries.size() <= 25);
    CHECK(trace.entries[0].order == ArimaOrder{2, 0, 2});
    CHECK(trace.entries[1].order == ArimaOrder{0, 0, 0});
    CHECK(trace.entries[2].order == ArimaOrder{1, 0, 0});
    CHECK(trace.entries[3].order == ArimaOrder{0, 0, 1});
    const auto& best = trace.entries[static_cast<std::size_t>(trace.best_index())];
    CHECK(best.order == result.order);
    CHECK(best.include_const == result.include_const);
    for (const auto& e : trace.entries) {
        if (std::isfinite(e.aic)) {
            CHECK(e.aic >= best.aic);
        }
    }
    CHECK(result.fit.aic == best.aic);

    const auto text = format_trace(trace);
    CHECK(text.rfind("Performing stepwise search to minimize AIC\n", 0) == 0);
    CHECK(text.find(" ARIMA(2,0,2)(0,0,0)[0] intercept") != std::string::npos);
    CHECK(text.find("Best model:  ARIMA" + to_string(result.order)) != std::string::npos);
    CHECK(text.find("Total fit time:") != std::string::npos);
}

TEST_CASE("stepwise search prefers the constant-only model on white noise") {
    int wins = 0;
    for (int s = 0; s < 5; ++s) {
        const auto y = simulate_arma({0, 0, 0}, 3.0, Eigen::VectorXd(), Eigen::VectorXd(), 1.0, 500,
                                     static_cast<std::uint64_t>(7000 + s));
        const auto r = stepwise_search(y);
        wins += (r.order == ArimaOrder{0, 0, 0} && r.include_const) ? 1 : 0;
    }
    CHECK(wins >= 3);
}

TEST_CASE("stepwise search with fixed d and failures") {
    StepwiseOptions opt;
    opt.d = 1;
    opt.max_fits = 6;
    const auto y = reference_series();
    const auto r = stepwise_search(y, opt);
    CHECK(r.order.d == 1);
    CHECK(r.trace.entries.size() <= 6);
    CHECK(r.differencing.tests.empty());

    CHECK_THROWS_AS(stepwise_search(std::vector<double>(8, 1.0)), Error);
}
