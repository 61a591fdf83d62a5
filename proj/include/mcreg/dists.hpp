#pragma once

#include "mcreg/core_types.hpp"
#include "mcreg/rng.hpp"

#include <Eigen/Dense>

namespace mcreg {

/// Gamma in mean/dispersion form: shape 1/phi, scale phi*mu.
struct GammaMD {
    double mu = 1.0;
    double phi = 1.0;

    double shape() const { return 1.0 / phi; }
    double scale() const { return phi * mu; }
};

/// Lomax (Pareto II) with density eta*theta^eta / (y+theta)^(eta+1).
struct Lomax {
    double theta = 1.0;
    double eta = 1.0;
};

inline constexpr double kMinConditioningProb = 1e-12;

double gamma_logpdf(double y, GammaMD d);
double gamma_cdf(double y, GammaMD d);
double gamma_sf(double y, GammaMD d);
/// CDF of the Gamma with shape 1/phi + 1 and the same scale (size-biased CDF).
double gamma_cdf_shifted_shape(double y, GammaMD d);
double trunc_gamma_mean_below(GammaMD d, double tau);
double trunc_gamma_mean_above(GammaMD d, double tau);
/// E[log Y | Y > tau], by adaptive quadrature.
double trunc_gamma_mean_log_above(GammaMD d, double tau);

double lomax_logpdf(double y, Lomax L);
double lomax_cdf(double y, Lomax L);
double lomax_sf(double y, Lomax L);
double trunc_lomax_logpdf(double y, Lomax L, double tau);

Eigen::VectorXd mixing_probs(const Eigen::VectorXd& x, const Eigen::MatrixXd& alpha);
Eigen::VectorXd mixing_log_probs(const Eigen::VectorXd& logits);

/// Linear predictors of one observation under a ParamSet.
struct RowModel {
    Eigen::VectorXd log_pi;  // g+1
    Eigen::VectorXd mu;      // g
    double eta = 1.0;
};

RowModel row_model(const ParamSet& p, const Eigen::Ref<const Eigen::VectorXd>& x_mix,
                   const Eigen::Ref<const Eigen::VectorXd>& x_body, const Eigen::Ref<const Eigen::VectorXd>& x_tail);
RowModel row_model(const ParamSet& p, const Eigen::Ref<const Eigen::VectorXd>& x);
RowModel row_model(const ParamSet& p, const Dataset& data, Eigen::Index i);

double composite_logpdf(double y, const RowModel& m, const ParamSet& p);
double composite_cdf(double y, const RowModel& m, const ParamSet& p);
/// Infinite when the tail carries mass and eta <= 1.
double composite_mean(const RowModel& m, const ParamSet& p);

double composite_logpdf(double y, const Eigen::VectorXd& x, const ParamSet& p);
double composite_cdf(double y, const Eigen::VectorXd& x, const ParamSet& p);
double composite_mean(const Eigen::VectorXd& x, const ParamSet& p);

double sample_trunc_gamma_below(GammaMD d, double tau, Rng& rng);
double sample_trunc_gamma_above(GammaMD d, double tau, Rng& rng);
double sample_trunc_lomax_above(Lomax L, double tau, Rng& rng);
double sample_composite(const RowModel& m, const ParamSet& p, Rng& rng);
double sample_composite(const Eigen::VectorXd& x, const ParamSet& p, std::uint64_t seed);

namespace detail {

// Unit-scale Gamma(a) helpers that never throw; used inside the fitter where a
// component may sit far from the threshold for some rows.
double log_gamma_p(double a, double t);
double log_gamma_q(double a, double t);
/// E[U | U > t] for U ~ Gamma(a, 1).
double upper_mean(double a, double t);
/// E[log U | U > t] for U ~ Gamma(a, 1), adaptive quadrature in log u.
double upper_mean_log(double a, double t);
/// log-density of Gamma(mu, phi) without argument checks.
double gamma_logpdf_raw(double y, double mu, double phi);
/// Inverse-CDF draw of U ~ Gamma(a,1) given U > t; falls back to a shifted
/// exponential approximation when the conditioning mass underflows.
double sample_upper(double a, double t, Rng& rng);

}  // namespace detail

}  // namespace mcreg
