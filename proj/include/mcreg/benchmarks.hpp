#pragma once

#include "mcreg/core_types.hpp"
#include "mcreg/gem.hpp"

#include <optional>
#include <span>
#include <string>
#include <vector>

namespace mcreg {

struct BenchmarkResult {
    std::string model;
    int df = 0;
    double loglik = 0.0;
    double aic = 0.0;
    double bic = 0.0;
    std::vector<std::string> param_names;
    std::vector<double> params;
    std::optional<double> tail_index;
    bool converged = true;
    std::string message;              // set when the fit is flagged
    std::vector<double> trajectory;   // EM log-likelihoods, where applicable

    /// Fills aic/bic from loglik, df and n.
    void finish(std::size_t n);
};

enum class SimpleFamily { ga, wei, gg, gp };
std::string_view to_string(SimpleFamily f);
SimpleFamily simple_family_from_string(std::string_view s);

/// Multi-start maximum likelihood for a two- or three-parameter family.
/// GG starts include the GA and WEI optima, so it never does worse than either.
BenchmarkResult fit_simple(std::span<const double> y, SimpleFamily family);

/// Log-likelihood of the family at natural parameters (GA: mu, phi; WEI: lambda, k; GG: mu, phi, p; GP: sigma, xi).
double simple_loglik(std::span<const double> y, SimpleFamily family, std::span<const double> params);

struct NpmleConfig {
    int q_max = 10;
    double min_gain = 1e-3;  // per-observation log-likelihood gain needed to keep a new support point
    int em_iters = 3000;
};

/// Finite exponential mixture grown by vertex-direction support addition.
BenchmarkResult fit_npmle_expmix(std::span<const double> y, const NpmleConfig& cfg = {});

struct MixtureConfig {
    int max_iters = 3000;
    double tol = 1e-9;  // per-observation log-likelihood change
    int starts = 3;
    std::uint64_t seed = 1;
};

/// Overlapping-support mixture of g Gammas and one Lomax fitted by plain EM.
BenchmarkResult fit_mixture_gamma_lomax(std::span<const double> y, int g, const MixtureConfig& cfg = {});

/// Composite model without covariates, reported in the same layout.
BenchmarkResult fit_composite_plain(std::span<const double> y, int g, double tau, const FitConfig& cfg);

struct TailRobustnessRow {
    int g = 0;
    std::string family;  // "composite" or "non-composite"
    double tail_index = 0.0;
    bool ok = true;
};

struct TailRobustness {
    std::vector<TailRobustnessRow> rows;
    double sd_composite = 0.0;
    double sd_noncomposite = 0.0;
};

TailRobustness tail_robustness_experiment(std::span<const double> y, const std::vector<int>& g_list, double tau,
                                          const FitConfig& cfg, const MixtureConfig& mix = {});

}  // namespace mcreg
