#pragma once

#include "mcreg/core_types.hpp"
#include "mcreg/penalty.hpp"
#include "mcreg/rng.hpp"

#include <Eigen/Dense>

#include <optional>
#include <string>
#include <vector>

namespace mcreg {

enum class EStepMode { stochastic, quadrature };

std::string_view to_string(EStepMode m);
EStepMode estep_mode_from_string(std::string_view s);

struct FitConfig {
    int max_iters = 200;
    double tol = 1e-2;
    EStepMode estep = EStepMode::stochastic;
    int draws = 1;  // stochastic draws of log Y' per (i, j)
    std::uint64_t seed = 1;
    int step_halving_max = 20;
    double hessian_ridge = 1e-8;
    int newton_sweeps = 1;  // Newton sweeps per block per outer iteration
    bool sort_components = true;

    void validate() const;
};

/// E-step quantities. Entries with z[i, j] == 0 by support (body columns of
/// tail rows) are left at zero in k, y_above and logy_above.
struct LatentState {
    Eigen::MatrixXd z;           // n x (g+1)
    Eigen::MatrixXd k;           // n x g
    Eigen::MatrixXd y_above;     // n x g
    Eigen::MatrixXd logy_above;  // n x g
};

struct EStepResult {
    LatentState latent;
    double loglik = 0.0;  // observed-data log-likelihood at the input parameters
};

/// Throws DegenerateTruncation when a body row sees a component with F(tau) < 1e-12.
EStepResult e_step_full(const Dataset& data, const ParamSet& p, EStepMode mode, int draws, Rng& rng);
LatentState e_step(const Dataset& data, const ParamSet& p, EStepMode mode, Rng& rng, int draws = 1);

double observed_loglik(const Dataset& data, const ParamSet& p);
double total_penalty(const ParamSet& p, const PenaltySet& plans);
/// Observed log-likelihood minus the epsilon-perturbed penalty.
double penalized_objective(const Dataset& data, const ParamSet& p, const PenaltySet& plans);

/// Expected complete-data penalized log-likelihood with the latent state frozen.
double q_value(const ParamSet& p, const LatentState& latent, const Dataset& data, const PenaltySet& plans);

// ---------------------------------------------------------------------------
// Block objectives of the M-step (latent state frozen, penalty majorized)
// ---------------------------------------------------------------------------

/// S(alpha) = sum_ij z_ij log pi_j - majorizer.
class MixingObjective {
public:
    MixingObjective(const Eigen::MatrixXd& X, const Eigen::MatrixXd& z, Majorizer maj);

    double loglik(const Eigen::MatrixXd& alpha_free) const;
    double value(const Eigen::MatrixXd& alpha_free) const;
    Eigen::VectorXd gradient(const Eigen::MatrixXd& alpha_free, int j) const;
    Eigen::MatrixXd hessian(const Eigen::MatrixXd& alpha_free, int j) const;
    const Majorizer& majorizer() const { return maj_; }

private:
    Eigen::MatrixXd log_pi(const Eigen::MatrixXd& alpha_free) const;

    const Eigen::MatrixXd& X_;
    const Eigen::MatrixXd& z_;
    Majorizer maj_;
};

/// T(beta, phi): weighted Gamma log-likelihood of observed and missing points.
class BodyObjective {
public:
    BodyObjective(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, const LatentState& latent, Majorizer maj);

    double loglik(const Eigen::MatrixXd& beta, const Eigen::VectorXd& phi) const;
    double value(const Eigen::MatrixXd& beta, const Eigen::VectorXd& phi) const;
    /// Component-j part without the penalty.
    double component_loglik(const Eigen::VectorXd& beta_j, double phi_j, int j) const;
    Eigen::VectorXd gradient(const Eigen::MatrixXd& beta, const Eigen::VectorXd& phi, int j) const;
    Eigen::MatrixXd hessian(const Eigen::MatrixXd& beta, const Eigen::VectorXd& phi, int j) const;
    /// Maximizer of the component-j part over phi on [1e-6, 1e3] (log scale).
    double best_phi(const Eigen::VectorXd& beta_j, int j, double phi_prev) const;
    const Majorizer& majorizer() const { return maj_; }

private:
    struct Stats {
        Eigen::VectorXd W, R, L;  // z(1+k), z(y + k y'), z(log y + k log y')
        double log_y_const = 0.0;
    };

    const Eigen::MatrixXd& X_;
    std::vector<Stats> stats_;
    Majorizer maj_;
};

/// V(theta, nu): truncated Lomax log-likelihood over tail observations.
class TailObjective {
public:
    TailObjective(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, double tau, Majorizer maj);

    double loglik(double theta, const Eigen::VectorXd& nu) const;
    double value(double theta, const Eigen::VectorXd& nu) const;
    Eigen::VectorXd gradient(double theta, const Eigen::VectorXd& nu) const;
    Eigen::MatrixXd hessian(double theta, const Eigen::VectorXd& nu) const;
    /// Maximizer over theta on [1e-6 tau, 1e3 tau] (log scale).
    double best_theta(const Eigen::VectorXd& nu, double theta_prev) const;
    Eigen::Index n_tail() const { return Xt_.rows(); }
    const Majorizer& majorizer() const { return maj_; }

private:
    Eigen::MatrixXd Xt_;
    Eigen::VectorXd yt_;
    double tau_;
    Majorizer maj_;
};

struct NewtonOptions {
    int sweeps = 1;
    int max_halving = 20;
    double ridge = 1e-8;
    double tol = 0.0;  // stop sweeping once a sweep gains less than this
};

Eigen::MatrixXd m_step_alpha(const LatentState& latent, const Dataset& data, const PenaltyPlan& plan,
                             const Eigen::MatrixXd& alpha_prev, const NewtonOptions& opt = {});
Eigen::MatrixXd m_step_beta(const LatentState& latent, const Dataset& data, const PenaltyPlan& plan,
                            const Eigen::MatrixXd& beta_prev, const Eigen::VectorXd& phi,
                            const NewtonOptions& opt = {});
Eigen::VectorXd m_step_phi(const Eigen::MatrixXd& beta_new, const LatentState& latent, const Dataset& data,
                           const Eigen::VectorXd& phi_prev);
Eigen::VectorXd m_step_nu(const Dataset& data, const PenaltyPlan& plan, const Eigen::VectorXd& nu_prev, double theta,
                          const NewtonOptions& opt = {});
double m_step_theta(const Eigen::VectorXd& nu_new, const Dataset& data, double theta_prev);

/// One full M-step (alpha, beta, phi, nu, theta in that order).
ParamSet m_step(const ParamSet& p, const LatentState& latent, const Dataset& data, const PenaltySet& plans,
                const NewtonOptions& opt, std::vector<std::string>* warnings = nullptr);

// ---------------------------------------------------------------------------
// Fitting
// ---------------------------------------------------------------------------

struct FitReport {
    ParamSet params;
    LatentState latent;        // E-step at the returned parameters
    std::vector<double> trajectory;  // penalized objective, starting at the initial parameters
    int iterations = 0;
    bool converged = false;
    bool monotone = true;
    bool failed = false;
    std::string message;
    std::vector<std::string> warnings;
    double loglik = 0.0;
    double penalized = 0.0;
    int df = 0;
    double aic = 0.0;
    double bic = 0.0;
};

FitReport fit_gem(const Dataset& data, int g, double tau, const PenaltySet& plans, const FitConfig& config,
                  std::optional<ParamSet> init = std::nullopt);

/// Permutes body components by ascending average exp(beta_j^T x) over the rows.
std::vector<int> canonical_order(const ParamSet& p, const Dataset& data);

ParamSet init_cmm(const Dataset& data, int g, double tau, Rng& rng);

struct ChooseGResult {
    int g = 1;
    bool matched = false;
    std::vector<double> empirical_nodes;
    std::vector<int> gs;
    std::vector<std::vector<double>> fitted_nodes;
    std::vector<bool> match;
    std::vector<double> loglik, aic, bic;
    std::vector<int> df;
};

ChooseGResult choose_g(const Dataset& data, double tau, const std::vector<int>& candidate_gs,
                       double node_threshold, const FitConfig& config, double min_relative_height = 0.01);

}  // namespace mcreg
