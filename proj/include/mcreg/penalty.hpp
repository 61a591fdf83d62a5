#pragma once

#include "mcreg/core_types.hpp"

#include <Eigen/Dense>

#include <string>
#include <vector>

namespace mcreg {

enum class Part { mixing, body, tail };
enum class PenaltyFamily { lasso, scad };

std::string_view to_string(Part p);
std::string_view to_string(PenaltyFamily f);
PenaltyFamily penalty_family_from_string(std::string_view s);

/// Sparse contrast c over design columns. For categorical variables it
/// contrasts level_b against level_a (level 0 is the implicit reference).
struct CoeffVector {
    std::vector<std::pair<int, double>> entries;
    int variable = -1;
    int level_a = -1;
    int level_b = -1;

    bool continuous() const { return level_a < 0; }
};

struct PenaltyPlan {
    Part part = Part::mixing;
    std::vector<CoeffVector> coeffs;
    PenaltyFamily family = PenaltyFamily::lasso;
    double scad_a = 3.7;
    double lambda = 0.0;
    std::vector<double> weights;  // per coefficient vector; empty means all ones
    double sample_scale = 1.0;    // n, n_b or n_t
    double eps = 1e-10;

    double lambda_k(std::size_t k) const { return lambda * (weights.empty() ? 1.0 : weights[k]); }
    bool active() const { return lambda > 0.0 && !coeffs.empty(); }
};

struct PenaltySet {
    PenaltyPlan mixing = blank(Part::mixing);
    PenaltyPlan body = blank(Part::body);
    PenaltyPlan tail = blank(Part::tail);

    static PenaltyPlan blank(Part p) {
        PenaltyPlan plan;
        plan.part = p;
        return plan;
    }

    PenaltyPlan& operator[](Part p) { return p == Part::mixing ? mixing : p == Part::body ? body : tail; }
    const PenaltyPlan& operator[](Part p) const { return p == Part::mixing ? mixing : p == Part::body ? body : tail; }
};

std::vector<CoeffVector> build_coeff_vectors(const CovariateSchema& schema, const DesignMatrix& design);

/// Plans for all three parts on a full design with lambda = 0 and unit weights.
PenaltySet make_penalty_set(const CovariateSchema& schema, const Dataset& data, PenaltyFamily family,
                            double scad_a = 3.7, double eps = 1e-10);

double penalty_fn(double psi, PenaltyFamily family, double lambda, double n_l, double a = 3.7);
double penalty_deriv(double psi, PenaltyFamily family, double lambda, double n_l, double a = 3.7);
double eps_norm(const Eigen::Ref<const Eigen::RowVectorXd>& v, double eps);

/// Row vector c^T Theta (one entry per component column).
Eigen::RowVectorXd contrast(const CoeffVector& c, const Eigen::MatrixXd& theta);

/// Coefficient block of a part: alpha without the pinned column, beta, or nu as a column.
Eigen::MatrixXd part_coefficients(const ParamSet& p, Part part);
void set_part_coefficients(ParamSet& p, Part part, const Eigen::MatrixXd& theta);

double penalty_value(const Eigen::MatrixXd& theta, const PenaltyPlan& plan);

/// Quadratic majorizer at theta_prev: value(theta) = constant + 0.5 * sum_j theta_j^T M theta_j.
struct Majorizer {
    Eigen::MatrixXd M;
    double constant = 0.0;

    double value(const Eigen::MatrixXd& theta) const;
};

Majorizer build_majorizer(const Eigen::MatrixXd& theta_prev, const PenaltyPlan& plan);
double majorizer_value(const Eigen::MatrixXd& theta, const Eigen::MatrixXd& theta_prev, const PenaltyPlan& plan);

std::vector<double> adaptive_std_weights(const Eigen::MatrixXd& pilot_theta, const PenaltyPlan& plan,
                                         const CovariateSchema& schema, const LevelCounts& counts, Eigen::Index n,
                                         double w_max = 1e8, std::vector<std::string>* warnings = nullptr);

}  // namespace mcreg
