#include "mcreg/optim.hpp"

#include "mcreg/core_types.hpp"

#include <cmath>

namespace mcreg {

Eigen::VectorXd numerical_gradient(const std::function<double(const Eigen::VectorXd&)>& f, const Eigen::VectorXd& x) {
    Eigen::VectorXd g(x.size());
    Eigen::VectorXd xp = x;
    for (Eigen::Index i = 0; i < x.size(); ++i) {
        const double h = 1e-6 * std::max(1.0, std::abs(x(i)));
        xp(i) = x(i) + h;
        const double fp = f(xp);
        xp(i) = x(i) - h;
        const double fm = f(xp);
        xp(i) = x(i);
        g(i) = (fp - fm) / (2.0 * h);
    }
    return g;
}

BfgsResult minimize_bfgs(const std::function<double(const Eigen::VectorXd&)>& f, const Eigen::VectorXd& x0,
                         const BfgsOptions& opt) {
    BfgsResult r;
    r.x = x0;
    r.f = f(x0);
    if (!std::isfinite(r.f)) throw DomainError("BFGS start point has a non-finite objective");
    const auto n = x0.size();
    Eigen::MatrixXd Hinv = Eigen::MatrixXd::Identity(n, n);
    Eigen::VectorXd g = numerical_gradient(f, r.x);
    int stalled = 0;
    for (r.iterations = 0; r.iterations < opt.max_iters; ++r.iterations) {
        if (!g.allFinite()) break;
        if (g.cwiseAbs().maxCoeff() <= opt.grad_tol * std::max(1.0, std::abs(r.f))) {
            r.converged = true;
            break;
        }
        Eigen::VectorXd d = -Hinv * g;
        if (g.dot(d) >= 0.0) {
            Hinv.setIdentity();
            d = -g;
        }
        double step = 1.0;
        const double slope = g.dot(d);
        Eigen::VectorXd xn;
        double fn = 0.0;
        bool ok = false;
        for (int k = 0; k < 60; ++k) {
            xn = r.x + step * d;
            fn = f(xn);
            if (std::isfinite(fn) && fn <= r.f + 1e-4 * step * slope) {
                ok = true;
                break;
            }
            step *= 0.5;
        }
        if (!ok) {
            if (Hinv.isIdentity()) break;
            Hinv.setIdentity();
            continue;
        }
        const Eigen::VectorXd gn = numerical_gradient(f, xn);
        const Eigen::VectorXd s = xn - r.x, y = gn - g;
        const double sy = s.dot(y);
        if (sy > 1e-12 * s.norm() * y.norm()) {
            const double rho = 1.0 / sy;
            const Eigen::MatrixXd I = Eigen::MatrixXd::Identity(n, n);
            Hinv = (I - rho * s * y.transpose()) * Hinv * (I - rho * y * s.transpose()) + rho * s * s.transpose();
        }
        const double drop = r.f - fn;
        r.x = xn;
        r.f = fn;
        g = gn;
        stalled = drop <= opt.f_tol * std::max(1.0, std::abs(fn)) ? stalled + 1 : 0;
        if (stalled >= 2) {
            r.converged = true;
            break;
        }
    }
    return r;
}

}  // namespace mcreg
