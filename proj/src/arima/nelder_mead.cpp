#include "loadcast/arima/nelder_mead.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <vector>

namespace loadcast::arima {

namespace {

struct Run {
    Eigen::VectorXd x;
    double value;
    int iterations;
    int evaluations;
    bool converged;
};

Run run_once(const std::function<double(const Eigen::VectorXd&)>& f, const Eigen::VectorXd& start,
             const Eigen::VectorXd& steps, const NelderMeadOptions& opt) {
    const Eigen::Index n = start.size();
    int evaluations = 0;
    const auto eval = [&](const Eigen::VectorXd& x) {
        ++evaluations;
        const double v = f(x);
        return std::isfinite(v) ? v : std::numeric_limits<double>::infinity();
    };

    std::vector<Eigen::VectorXd> simplex(static_cast<std::size_t>(n + 1), start);
    std::vector<double> values(static_cast<std::size_t>(n + 1));
    for (Eigen::Index i = 0; i < n; ++i) {
        simplex[static_cast<std::size_t>(i + 1)](i) += steps(i);
    }
    for (std::size_t i = 0; i < simplex.size(); ++i) {
        values[i] = eval(simplex[i]);
    }

    std::vector<std::size_t> order(simplex.size());
    int iter = 0;
    bool converged = false;

    constexpr double reflect = 1.0;
    constexpr double expand = 2.0;
    constexpr double contract = 0.5;
    constexpr double shrink = 0.5;

    for (; iter < opt.max_iterations; ++iter) {
        std::iota(order.begin(), order.end(), std::size_t{0});
        std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
        const std::size_t best = order.front();
        const std::size_t worst = order.back();
        const std::size_t second_worst = order[order.size() - 2];

        double extent = 0.0;
        for (std::size_t i = 0; i < simplex.size(); ++i) {
            extent = std::max(extent, (simplex[i] - simplex[best]).cwiseAbs().maxCoeff());
        }
        const double spread = values[worst] - values[best];
        if (extent <= opt.x_tolerance && std::isfinite(spread) && spread <= opt.f_tolerance * (1.0 + std::abs(values[best]))) {
            converged = true;
            break;
        }
        if (extent <= opt.x_tolerance * 1e-3) {
            // Collapsed without the values agreeing (e.g. an infinite vertex).
            converged = std::isfinite(values[best]);
            break;
        }

        Eigen::VectorXd centroid = Eigen::VectorXd::Zero(n);
        for (std::size_t i = 0; i < simplex.size(); ++i) {
            if (i != worst) {
                centroid += simplex[i];
            }
        }
        centroid /= static_cast<double>(n);

        const Eigen::VectorXd xr = centroid + reflect * (centroid - simplex[worst]);
        const double fr = eval(xr);
        if (fr < values[best]) {
            const Eigen::VectorXd xe = centroid + expand * (xr - centroid);
            const double fe = eval(xe);
            if (fe < fr) {
                simplex[worst] = xe;
                values[worst] = fe;
            } else {
                simplex[worst] = xr;
                values[worst] = fr;
            }
            continue;
        }
        if (fr < values[second_worst]) {
            simplex[worst] = xr;
            values[worst] = fr;
            continue;
        }
        const bool outside = fr < values[worst];
        const Eigen::VectorXd xc = outside ? Eigen::VectorXd(centroid + contract * (xr - centroid))
                                           : Eigen::VectorXd(centroid + contract * (simplex[worst] - centroid));
        const double fc = eval(xc);
        if (fc < (outside ? fr : values[worst])) {
            simplex[worst] = xc;
            values[worst] = fc;
            continue;
        }
        for (std::size_t i = 0; i < simplex.size(); ++i) {
            if (i != best) {
                simplex[i] = simplex[best] + shrink * (simplex[i] - simplex[best]);
                values[i] = eval(simplex[i]);
            }
        }
    }

    const auto best_it = std::min_element(values.begin(), values.end());
    const auto best = static_cast<std::size_t>(best_it - values.begin());
    return {simplex[best], values[best], iter, evaluations, converged};
}

}  // namespace

NelderMeadResult nelder_mead(const std::function<double(const Eigen::VectorXd&)>& objective,
                             const Eigen::VectorXd& start, const Eigen::VectorXd& steps,
                             const NelderMeadOptions& options) {
    NelderMeadResult result;
    Run run = run_once(objective, start, steps, options);
    result.iterations = run.iterations;
    result.evaluations = run.evaluations;
    bool converged = run.converged;
    for (int r = 0; r < options.max_restarts; ++r) {
        // A converged run restarts with a smaller simplex so a collapsed search
        // gets a second look; a run that hit the cap continues at full size.
        Run again = run_once(objective, run.x, run.converged ? Eigen::VectorXd(steps * 0.1) : steps, options);
        result.iterations += again.iterations;
        result.evaluations += again.evaluations;
        const bool improved = again.value < run.value - options.f_tolerance * (1.0 + std::abs(run.value));
        converged = converged || again.converged;
        if (again.value <= run.value) {
            run = again;
        }
        if (again.converged && !improved) {
            break;
        }
    }
    result.x = run.x;
    result.value = run.value;
    result.converged = converged;
    return result;
}

}  // namespace loadcast::arima
