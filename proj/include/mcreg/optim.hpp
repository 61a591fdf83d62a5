#pragma once

#include <Eigen/Dense>

#include <functional>

namespace mcreg {

struct BfgsOptions {
    int max_iters = 500;
    double grad_tol = 1e-6;  // on the max-norm of the gradient, relative to max(1, |f|)
    double f_tol = 1e-12;    // relative decrease below which two consecutive steps count as stalled
};

struct BfgsResult {
    Eigen::VectorXd x;
    double f = 0.0;
    int iterations = 0;
    bool converged = false;
};

/// Unconstrained BFGS minimization with central-difference gradients and a
/// backtracking Armijo line search. Non-finite objective values are treated
/// as infeasible and rejected by the line search; f(x0) must be finite.
BfgsResult minimize_bfgs(const std::function<double(const Eigen::VectorXd&)>& f, const Eigen::VectorXd& x0,
                         const BfgsOptions& opt = {});

Eigen::VectorXd numerical_gradient(const std::function<double(const Eigen::VectorXd&)>& f, const Eigen::VectorXd& x);

}  // namespace mcreg
