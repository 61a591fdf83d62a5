#pragma once

#include "mcreg/core_types.hpp"

#include <Eigen/Dense>

#include <functional>
#include <span>
#include <vector>

namespace mcreg {

/// Distinct covariate rows (over all three part designs) with multiplicities.
struct RowGroups {
    std::vector<Eigen::Index> representative;
    std::vector<double> weight;  // sums to 1
};

/// Groups identical rows; beyond max_groups, keeps an evenly strided subset of groups.
RowGroups group_rows(const Dataset& data, std::size_t max_groups = 2000);

double silverman_bandwidth(std::span<const double> x);
/// Gaussian kernel density estimate of `x` evaluated on `grid`.
std::vector<double> kde(std::span<const double> x, double h, std::span<const double> grid);
/// Interior local maxima of `values` whose height is at least min_relative_height * max(values).
std::vector<double> local_maxima(std::span<const double> grid, std::span<const double> values,
                                 double min_relative_height = 0.0);
std::vector<double> linspace(double lo, double hi, int n);

/// Covariate-averaged fitted density and CDF.
std::vector<double> marginal_pdf(const ParamSet& p, const Dataset& data, const RowGroups& groups,
                                 std::span<const double> grid);
double marginal_cdf(const ParamSet& p, const Dataset& data, const RowGroups& groups, double y);
/// Inverse of marginal_cdf by bracketing and bisection.
double marginal_quantile(const ParamSet& p, const Dataset& data, const RowGroups& groups, double prob);

double ks_statistic(std::vector<double> sample, const std::function<double(double)>& cdf);

struct DensityCurve {
    std::vector<double> y, empirical, fitted;
};
struct QQPoints {
    std::vector<double> prob, empirical, model;
};
struct LogLogPoints {
    std::vector<double> log_y, empirical_log_sf, fitted_log_sf;
};
struct MeanExcessPoints {
    std::vector<double> u, excess;
    std::vector<Eigen::Index> count;
};

DensityCurve density_curve(const ParamSet& p, const Dataset& data, int points = 512);
QQPoints qq_points(const ParamSet& p, const Dataset& data, int points = 200);
LogLogPoints loglog_points(const ParamSet& p, const Dataset& data, int points = 200);
/// Mean excess e(u) = mean(y - u | y > u) at empirical quantile thresholds; stops when fewer than min_count exceed u.
MeanExcessPoints mean_excess(std::span<const double> y, int points = 100, Eigen::Index min_count = 10);

}  // namespace mcreg
