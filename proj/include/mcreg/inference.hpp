#pragma once

#include "mcreg/core_types.hpp"
#include "mcreg/gem.hpp"

#include <Eigen/Dense>

#include <functional>
#include <string>
#include <vector>

namespace mcreg {

/// Free parameters as one vector: alpha (g columns), beta, log phi, log theta, nu.
Eigen::VectorXd param_vector(const ParamSet& p);
ParamSet param_from_vector(const Eigen::VectorXd& v, const ParamSet& layout);

/// Labels matching param_vector; column names default to c0, c1, ...
std::vector<std::string> param_labels(const ParamSet& p, const std::vector<std::string>& mix_names = {},
                                      const std::vector<std::string>& body_names = {},
                                      const std::vector<std::string>& tail_names = {});

struct FisherInfo {
    Eigen::MatrixXd info;      // per-observation information, symmetrized
    Eigen::MatrixXd hessian;   // raw numerical Hessian of the log-likelihood, before symmetrizing
    double asymmetry = 0.0;    // max |H - H^T| / max |H|
    bool singular = false;     // pseudo-inverse was needed
    Eigen::MatrixXd covariance;  // inverse (or pseudo-inverse) of info
    std::vector<std::string> warnings;
};

/// -(1/n) times the central-difference Hessian of the observed log-likelihood at p.
FisherInfo fisher_info_reduced(const ParamSet& p, const Dataset& data);

enum class CIMethod { wald, bootstrap };
std::string_view to_string(CIMethod m);

struct CIRow {
    std::string quantity;
    double point = 0.0;
    double lower = 0.0;
    double upper = 0.0;
    double level = 0.95;
    CIMethod method = CIMethod::wald;
    bool reliable = true;
};

struct CITable {
    std::vector<CIRow> rows;
    std::vector<std::string> warnings;
    int replicates = 0;  // bootstrap: successful refits
    int failures = 0;    // bootstrap: excluded refits

    const CIRow* find(std::string_view quantity) const;
};

/// Function of the parameters reported with an interval, e.g. a tail probability at some x.
struct DerivedQuantity {
    std::string label;
    std::function<double(const ParamSet&)> eval;
};

/// Tail probability and mean severity at the given covariate rows (indices into data).
std::vector<DerivedQuantity> standard_derived(const Dataset& data, const std::vector<Eigen::Index>& rows);

struct WaldConfig {
    double level = 0.95;
    int draws = 10000;  // Gaussian parameter draws for derived quantities
    std::uint64_t seed = 1;
};

/// point +/- z * sqrt(cov_qq / n); dispersions and theta are reported on their natural scale.
CITable wald_ci(const ParamSet& p, const Dataset& data, const FisherInfo& info, const WaldConfig& cfg,
                const std::vector<std::string>& labels = {}, const std::vector<DerivedQuantity>& derived = {});

struct BootstrapConfig {
    int B = 200;
    double level = 0.95;
    std::uint64_t seed = 1;
    int threads = 1;
    FitConfig fit;
    double max_failure_rate = 0.2;
};

/// Efron percentile intervals from B parametric resamples with the design held fixed.
CITable bootstrap_ci(const ParamSet& p, const Dataset& data, const BootstrapConfig& cfg,
                     const std::vector<std::string>& labels = {}, const std::vector<DerivedQuantity>& derived = {});

/// Linear-interpolation empirical quantile of sorted values.
double empirical_quantile(const std::vector<double>& sorted, double prob);

}  // namespace mcreg
