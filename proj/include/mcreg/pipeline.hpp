#pragma once

#include "mcreg/gem.hpp"
#include "mcreg/inference.hpp"
#include "mcreg/penalty.hpp"
#include "mcreg/selection.hpp"

#include <optional>
#include <string>
#include <vector>

namespace mcreg {

struct PipelineConfig {
    int g = 2;
    double tau = 1.0;
    PenaltyFamily family = PenaltyFamily::lasso;
    double scad_a = 3.7;
    bool adaptive = true;  // adaptive x standardization weights from the pilot fit
    FitConfig fit;
    TuneConfig tune;
    TuningGrid grid = TuningGrid::geometric();
    WaldConfig wald;
    int bootstrap_B = 0;  // 0 skips the bootstrap
    int threads = 1;
};

struct PipelineResult {
    FitReport pilot;
    PenaltySet plans;  // with the selected lambdas
    TuningResult tuning;
    FitReport penalized;
    AdjustResult adjusted;
    RefitResult refit;
    std::vector<std::string> labels;  // reduced-model parameter labels
    FisherInfo info;
    CITable wald;
    std::optional<CITable> bootstrap;
    std::vector<std::string> warnings;
};

/// Pilot fit, weights, lambda tuning, penalized fit, automatic adjustment,
/// collapse-and-refit and intervals on the reduced model.
PipelineResult run_pipeline(const Dataset& data, const CovariateSchema& schema, const PipelineConfig& cfg);

/// Per-part plans with adaptive weights computed from a pilot fit.
PenaltySet adaptive_plans(const Dataset& data, const CovariateSchema& schema, const ParamSet& pilot,
                          PenaltyFamily family, double scad_a, std::vector<std::string>* warnings = nullptr);

}  // namespace mcreg
