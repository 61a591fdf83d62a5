#pragma once

#include "mcreg/core_types.hpp"
#include "mcreg/rng.hpp"

#include <Eigen/Dense>

namespace mcreg {

/// Covariate records: categorical levels uniform, continuous uniform on [lower, upper].
/// Continuous values are written in shortest round-trip form, so re-reading the CSV is exact.
RawTable simulate_covariates(const CovariateSchema& schema, Eigen::Index n, Rng& rng);

/// One response per row of `data` from the composite model at `p` (the design is held fixed).
Eigen::VectorXd simulate_response(const Dataset& data, const ParamSet& p, Rng& rng);

struct Simulated {
    RawTable table;  // covariates plus a trailing `y` column
    Dataset data;
};

/// Covariates and responses from the `simulate` stream of `seed`.
Simulated simulate_dataset(const CovariateSchema& schema, const ParamSet& truth, Eigen::Index n, std::uint64_t seed);

}  // namespace mcreg
