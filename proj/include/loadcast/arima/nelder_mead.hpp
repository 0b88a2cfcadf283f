#pragma once

#include <functional>

#include <Eigen/Core>

namespace loadcast::arima {

struct NelderMeadOptions {
    int max_iterations = 2000;  // per run
    double x_tolerance = 1e-8;  // simplex extent in every coordinate
    double f_tolerance = 1e-10;
    int max_restarts = 3;
    double initial_step = 0.1;
};

struct NelderMeadResult {
    Eigen::VectorXd x;
    double value = 0.0;
    int iterations = 0;
    int evaluations = 0;
    bool converged = false;
};

// Derivative-free minimisation. After a run converges the simplex is rebuilt
// around the best point and the search restarted, until a restart no longer
// improves the objective (guards against premature collapse). Non-finite
// objective values are treated as +inf.
NelderMeadResult nelder_mead(const std::function<double(const Eigen::VectorXd&)>& objective,
                             const Eigen::VectorXd& start, const Eigen::VectorXd& steps,
                             const NelderMeadOptions& options = {});

}  // namespace loadcast::arima
