#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace mcreg {

// ---------------------------------------------------------------------------
// Errors
// ---------------------------------------------------------------------------

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Argument outside the support of a density/CDF, or a broken invariant.
class DomainError : public Error {
public:
    using Error::Error;
};

/// Conditioning probability of a truncated distribution is numerically zero.
class DegenerateTruncation : public DomainError {
public:
    using DomainError::DomainError;
};

/// Schema document is malformed or a value is not in the declared level list.
class SchemaError : public Error {
public:
    using Error::Error;
};

/// Tabular input is missing fields or has unparsable values.
class IngestError : public Error {
public:
    using Error::Error;
};

class FitFailure : public Error {
public:
    using Error::Error;
};

class IoError : public Error {
public:
    using Error::Error;
};

// ---------------------------------------------------------------------------
// Covariate schema
// ---------------------------------------------------------------------------

enum class VariableKind { continuous, ordinal, nominal };

std::string_view to_string(VariableKind k);
VariableKind variable_kind_from_string(std::string_view s);

struct Variable {
    std::string name;
    VariableKind kind = VariableKind::continuous;
    std::vector<std::string> levels;  // ordered; first level is the reference
    // Sampling range used by the simulator for continuous variables.
    double lower = 0.0;
    double upper = 1.0;

    bool categorical() const { return kind != VariableKind::continuous; }
};

class CovariateSchema {
public:
    CovariateSchema() = default;
    explicit CovariateSchema(std::vector<Variable> variables);

    const std::vector<Variable>& variables() const { return vars_; }
    std::size_t size() const { return vars_.size(); }
    const Variable& operator[](std::size_t i) const { return vars_[i]; }
    int index_of(std::string_view name) const;

private:
    std::vector<Variable> vars_;
};

// ---------------------------------------------------------------------------
// Design matrix
// ---------------------------------------------------------------------------

enum class ColumnKind { intercept, continuous, level, pooled };

/// Where a design column comes from. For a full design `sources` is the
/// column itself; a reduced design pools several full-design columns.
struct ColumnOrigin {
    ColumnKind kind = ColumnKind::intercept;
    int variable = -1;
    std::vector<int> levels;   // level indices into Variable::levels
    std::vector<int> sources;  // full-design column indices summed into this column
};

struct DesignMatrix {
    Eigen::MatrixXd X;  // n x D, column-major, column 0 is the intercept
    std::vector<ColumnOrigin> columns;

    Eigen::Index n() const { return X.rows(); }
    Eigen::Index D() const { return X.cols(); }

    std::string column_name(int c, const CovariateSchema& schema) const;
    std::vector<std::string> column_names(const CovariateSchema& schema) const;
};

/// String-valued records as read from a CSV file.
struct RawTable {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;

    int column(std::string_view name) const;  // -1 when absent
};

DesignMatrix encode_design(const CovariateSchema& schema, const RawTable& table);

/// Inverse of encode_design for a full (unreduced) design.
RawTable decode_design(const DesignMatrix& design, const CovariateSchema& schema);

/// Per variable, the number of observations at each level (reference included).
using LevelCounts = std::vector<std::vector<Eigen::Index>>;
LevelCounts level_counts(const DesignMatrix& design, const CovariateSchema& schema);

/// n x 1 design holding only the intercept.
DesignMatrix intercept_design(Eigen::Index n);

// ---------------------------------------------------------------------------
// Parameters
// ---------------------------------------------------------------------------

/// All model parameters. Column g+1 of alpha is pinned to zero and is only
/// reachable read-only.
class ParamSet {
public:
    ParamSet() = default;
    ParamSet(int g, Eigen::Index d_mix, Eigen::Index d_body, Eigen::Index d_tail, double tau);

    int g() const { return g_; }
    double tau() const { return tau_; }
    void set_tau(double tau);

    const Eigen::MatrixXd& alpha() const { return alpha_; }
    Eigen::Block<Eigen::MatrixXd, Eigen::Dynamic, Eigen::Dynamic, true> alpha_free() { return alpha_.leftCols(g_); }
    Eigen::Block<const Eigen::MatrixXd, Eigen::Dynamic, Eigen::Dynamic, true> alpha_free() const { return alpha_.leftCols(g_); }

    Eigen::MatrixXd& beta() { return beta_; }
    const Eigen::MatrixXd& beta() const { return beta_; }
    Eigen::VectorXd& phi() { return phi_; }
    const Eigen::VectorXd& phi() const { return phi_; }
    Eigen::VectorXd& nu() { return nu_; }
    const Eigen::VectorXd& nu() const { return nu_; }

    double theta() const { return theta_; }
    void set_theta(double theta);

    Eigen::Index d_mix() const { return alpha_.rows(); }
    Eigen::Index d_body() const { return beta_.rows(); }
    Eigen::Index d_tail() const { return nu_.size(); }

    /// Reorders body components; new component j is old component order[j].
    void permute_components(std::span<const int> order);

    /// Throws DomainError when a positivity or shape invariant is broken.
    void validate() const;

private:
    int g_ = 0;
    double tau_ = 1.0;
    double theta_ = 1.0;
    Eigen::MatrixXd alpha_;
    Eigen::MatrixXd beta_;
    Eigen::VectorXd phi_;
    Eigen::VectorXd nu_;
};

// ---------------------------------------------------------------------------
// Dataset
// ---------------------------------------------------------------------------

struct BodyTailCounts {
    Eigen::Index n_b = 0;
    Eigen::Index n_t = 0;
};

/// Ties y == tau belong to the body.
BodyTailCounts split_body_tail(std::span<const double> y, double tau);

/// Responses plus one design per model part (mixing, body, tail). The three
/// designs coincide for a full model and differ after collapsing.
class Dataset {
public:
    Dataset() = default;
    Dataset(Eigen::VectorXd y, DesignMatrix design, double tau);
    Dataset(Eigen::VectorXd y, DesignMatrix mix, DesignMatrix body, DesignMatrix tail, double tau);

    const Eigen::VectorXd& y() const { return y_; }
    const DesignMatrix& mix() const { return mix_; }
    const DesignMatrix& body() const { return body_; }
    const DesignMatrix& tail() const { return tail_; }

    double tau() const { return tau_; }
    void set_tau(double tau);

    Eigen::Index n() const { return y_.size(); }
    Eigen::Index n_b() const { return counts_.n_b; }
    Eigen::Index n_t() const { return counts_.n_t; }
    bool in_body(Eigen::Index i) const { return body_mask_[static_cast<std::size_t>(i)] != 0; }
    const std::vector<std::uint8_t>& body_mask() const { return body_mask_; }

    Dataset subset(std::span<const Eigen::Index> rows) const;
    Dataset with_y(Eigen::VectorXd y) const;

private:
    void refresh_masks();

    Eigen::VectorXd y_;
    DesignMatrix mix_, body_, tail_;
    double tau_ = 1.0;
    std::vector<std::uint8_t> body_mask_;
    BodyTailCounts counts_;
};

}  // namespace mcreg
