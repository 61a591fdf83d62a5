#pragma once

// Independent reference computations shared by the test executables.

#include "mcreg/core_types.hpp"
#include "mcreg/io.hpp"
#include "mcreg/rng.hpp"
#include "mcreg/simulate.hpp"

#include <Eigen/Dense>
#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <cmath>
#include <filesystem>
#include <functional>
#include <limits>
#include <string>

namespace oracle {

/// Adaptive Gauss-Kronrod; `b` may be +infinity.
inline double integrate(const std::function<double(double)>& f, double a, double b, double tol = 1e-13) {
    double err = 0.0;
    return boost::math::quadrature::gauss_kronrod<double, 61>::integrate(f, a, b, 12, tol, &err);
}

/// Integral over (0, b] after substituting t = exp(s); copes with integrable singularities at zero.
inline double integrate_from_zero(const std::function<double(double)>& f, double b, double tol = 1e-13) {
    return integrate([&](double s) { const double t = std::exp(s); return t > 0.0 ? f(t) * t : 0.0; },
                     -std::numeric_limits<double>::infinity(), std::log(b), tol);
}

/// Integral over [a, inf) split at interior break points to keep the integrand smooth per piece.
inline double integrate_pieces(const std::function<double(double)>& f, std::initializer_list<double> breaks) {
    double s = 0.0;
    double prev = -1.0;
    for (double b : breaks) {
        if (prev >= 0.0) s += integrate(f, prev, b);
        prev = b;
    }
    return s + integrate(f, prev, std::numeric_limits<double>::infinity());
}

inline double central_difference(const std::function<double(double)>& f, double x, double h) {
    return (f(x + h) - f(x - h)) / (2.0 * h);
}

inline Eigen::VectorXd fd_gradient(const std::function<double(const Eigen::VectorXd&)>& f, const Eigen::VectorXd& x,
                                   double rel = 1e-6) {
    Eigen::VectorXd g(x.size());
    for (Eigen::Index i = 0; i < x.size(); ++i) {
        const double h = rel * std::max(1.0, std::abs(x(i)));
        Eigen::VectorXd a = x, b = x;
        a(i) += h;
        b(i) -= h;
        g(i) = (f(a) - f(b)) / (2.0 * h);
    }
    return g;
}

inline double rel_err(double a, double b) { return std::abs(a - b) / std::max({std::abs(a), std::abs(b), 1e-300}); }

/// Schema with a 3-level nominal, a 3-level ordinal and a continuous variable: D = 6.
inline mcreg::CovariateSchema mixed_schema() {
    using mcreg::Variable;
    using mcreg::VariableKind;
    std::vector<Variable> v(3);
    v[0].name = "region";
    v[0].kind = VariableKind::nominal;
    v[0].levels = {"north", "south", "west"};
    v[1].name = "age";
    v[1].kind = VariableKind::ordinal;
    v[1].levels = {"young", "mid", "old"};
    v[2].name = "power";
    v[2].kind = VariableKind::continuous;
    v[2].lower = -1.0;
    v[2].upper = 1.0;
    return mcreg::CovariateSchema(v);
}

inline mcreg::DesignMatrix random_design(const mcreg::CovariateSchema& schema, Eigen::Index n, std::uint64_t seed) {
    mcreg::Rng rng = mcreg::make_rng(seed, "test-design");
    return mcreg::encode_design(schema, mcreg::simulate_covariates(schema, n, rng));
}

/// Moderately separated g-component parameters with small random covariate effects.
inline mcreg::ParamSet random_params(int g, Eigen::Index D, double tau, mcreg::Rng& rng, double effect = 0.3) {
    mcreg::ParamSet p(g, D, D, D, tau);
    auto u = [&] { return 2.0 * mcreg::uniform01(rng) - 1.0; };
    for (int j = 0; j < g; ++j) {
        p.alpha_free()(0, j) = 0.5 + 0.3 * u();
        p.beta()(0, j) = std::log(tau) - 2.5 + 1.2 * j + 0.2 * u();
        p.phi()(j) = 0.1 + 0.2 * mcreg::uniform01(rng);
        for (Eigen::Index d = 1; d < D; ++d) {
            p.alpha_free()(d, j) = effect * u();
            p.beta()(d, j) = effect * u();
        }
    }
    p.nu()(0) = std::log(1.5 + mcreg::uniform01(rng));
    for (Eigen::Index d = 1; d < D; ++d) p.nu()(d) = 0.5 * effect * u();
    p.set_theta(tau * (0.5 + mcreg::uniform01(rng)));
    return p;
}

struct Fixture {
    mcreg::ParamSet truth;
    mcreg::Dataset data;
};

/// Data simulated from random_params(2, 6, tau = 10) on mixed_schema().
inline Fixture make_fixture(Eigen::Index n, std::uint64_t seed, double effect = 0.3) {
    const auto schema = mixed_schema();
    mcreg::Rng rng = mcreg::make_rng(seed, "fixture");
    mcreg::ParamSet truth = random_params(2, 6, 10.0, rng, effect);
    return {truth, mcreg::simulate_dataset(schema, truth, n, seed).data};
}

/// Scratch directory unique to the test executable.
inline std::filesystem::path scratch(const std::string& name) {
    auto dir = std::filesystem::temp_directory_path() / ("mcreg-test-" + name);
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
    return dir;
}

}  // namespace oracle
