#pragma once

#include "mcreg/core_types.hpp"
#include "mcreg/gem.hpp"
#include "mcreg/penalty.hpp"

#include <Eigen/Dense>

#include <string>
#include <vector>

namespace mcreg {

struct AdjustConfig {
    double delta0 = 1e-5;
    double eta = 0.3;
    double xi = 1.0;

    void validate() const;
};

/// Penalized (S, T, V) and unpenalized (S0, T0, V0) partial objectives with the latent state frozen.
struct PartialObjectives {
    double S = 0.0, T = 0.0, V = 0.0;
    double S0 = 0.0, T0 = 0.0, V0 = 0.0;
};

PartialObjectives partial_objectives(const ParamSet& p, const LatentState& latent, const Dataset& data,
                                     const PenaltySet& plans);
/// One part only; penalized when `penalized` is set.
double partial_objective(Part part, const ParamSet& p, const LatentState& latent, const Dataset& data,
                         const PenaltyPlan& plan, bool penalized);

struct AdjustStep {
    Part part = Part::mixing;
    double delta = 0.0;
    double before = 0.0;  // objective of the last accepted state
    double after = 0.0;   // objective of the proposal
    bool accepted = false;
    int merges = 0;
    int zeros = 0;
};

struct AdjustResult {
    ParamSet params;
    std::vector<AdjustStep> audit;
};

/// Merges near-equal coefficient rows within a categorical variable and zeroes
/// near-zero rows, growing the tolerance until the objective drops by more than xi.
AdjustResult auto_adjust(const ParamSet& fit, const LatentState& latent, const Dataset& data,
                         const PenaltySet& plans, const AdjustConfig& cfg);
AdjustResult auto_adjust_part(Part part, const ParamSet& fit, const LatentState& latent, const Dataset& data,
                              const PenaltyPlan& plan, const AdjustConfig& cfg);

struct EffectiveParams {
    int n1 = 0, n2 = 0, n3 = 0, total = 0;
};

EffectiveParams effective_params(const ParamSet& p, const Dataset& data);
int effective_params_part(Part part, const ParamSet& p, const Dataset& data);

enum class Criterion { paic, pbic, cv };

std::string_view to_string(Criterion c);
Criterion criterion_from_string(std::string_view s);

struct TuningGrid {
    std::vector<double> mixing, body, tail;  // multipliers; the plan's sample_scale is applied by the penalty

    static TuningGrid geometric(double base = 1e-5, double ratio = 2.0, int count = 17);
    std::vector<double>& operator[](Part p) { return p == Part::mixing ? mixing : p == Part::body ? body : tail; }
    const std::vector<double>& operator[](Part p) const {
        return p == Part::mixing ? mixing : p == Part::body ? body : tail;
    }
};

struct TuneConfig {
    Criterion criterion = Criterion::pbic;
    int folds = 5;
    std::uint64_t seed = 1;
    int max_sweeps = 100;     // Newton sweeps per block re-maximization
    double block_tol = 1e-8;  // stop when a sweep gains less than this
    AdjustConfig adjust;
    EStepMode held_out_estep = EStepMode::quadrature;
    int threads = 1;
};

struct TuningRow {
    Part part = Part::mixing;
    double lambda = 0.0;
    double partial_objective = 0.0;  // unpenalized, after adjustment
    int df = 0;
    double criterion = 0.0;
    double sd = 0.0;  // CV only
};

struct TuningResult {
    double lambda_mixing = 0.0, lambda_body = 0.0, lambda_tail = 0.0;
    std::vector<TuningRow> rows;
    std::vector<std::string> warnings;

    double operator[](Part p) const {
        return p == Part::mixing ? lambda_mixing : p == Part::body ? lambda_body : lambda_tail;
    }
};

/// Re-maximizes one block of the frozen-latent partial objective under the plan's lambda.
ParamSet maximize_block(Part part, const ParamSet& start, const LatentState& latent, const Dataset& data,
                        const PenaltyPlan& plan, int max_sweeps, double tol);

TuningResult tune_lambda(const Dataset& data, const ParamSet& pilot, const LatentState& latent,
                         const PenaltySet& plans, const TuningGrid& grid, const TuneConfig& cfg);

/// Reduced column -> list of full-design columns pooled into it, per part.
struct Reduction {
    std::vector<std::vector<int>> mixing, body, tail;

    std::vector<std::vector<int>>& operator[](Part p) { return p == Part::mixing ? mixing : p == Part::body ? body : tail; }
    const std::vector<std::vector<int>>& operator[](Part p) const {
        return p == Part::mixing ? mixing : p == Part::body ? body : tail;
    }
};

Reduction reduction_pattern(const ParamSet& adjusted, const Dataset& data);
Dataset apply_reduction(const Dataset& full, const Reduction& r);
ParamSet reduce_params(const ParamSet& full, const Reduction& r);
ParamSet expand_params(const ParamSet& reduced, const Reduction& r, const Dataset& full);

struct RefitResult {
    FitReport fit;        // on the reduced design
    ParamSet full_layout;  // coefficients mapped back to the full design
    Reduction reduction;
    Dataset reduced_data;
};

RefitResult collapse_and_refit(const Dataset& data, const ParamSet& adjusted, const FitConfig& config);

}  // namespace mcreg
