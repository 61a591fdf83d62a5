#include "mcreg/core_types.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <set>
#include <sstream>
#include <unordered_map>

namespace mcreg {

std::string_view to_string(VariableKind k) {
    switch (k) {
        case VariableKind::continuous: return "continuous";
        case VariableKind::ordinal: return "ordinal";
        case VariableKind::nominal: return "nominal";
    }
    return "continuous";
}

VariableKind variable_kind_from_string(std::string_view s) {
    if (s == "continuous") return VariableKind::continuous;
    if (s == "ordinal") return VariableKind::ordinal;
    if (s == "nominal") return VariableKind::nominal;
    throw SchemaError("unknown variable kind '" + std::string(s) + "'");
}

CovariateSchema::CovariateSchema(std::vector<Variable> variables) : vars_(std::move(variables)) {
    std::set<std::string> names;
    for (const auto& v : vars_) {
        if (v.name.empty()) throw SchemaError("variable with empty name");
        if (v.name == "y") throw SchemaError("variable name 'y' is reserved for the response");
        if (!names.insert(v.name).second) throw SchemaError("duplicate variable name '" + v.name + "'");
        if (v.categorical()) {
            if (v.levels.size() < 2)
                throw SchemaError("categorical variable '" + v.name + "' needs at least two levels");
            std::set<std::string> lv(v.levels.begin(), v.levels.end());
            if (lv.size() != v.levels.size())
                throw SchemaError("duplicate level label in variable '" + v.name + "'");
        } else {
            if (!v.levels.empty())
                throw SchemaError("continuous variable '" + v.name + "' must not declare levels");
            if (!(v.upper >= v.lower)) throw SchemaError("variable '" + v.name + "' has an empty range");
        }
    }
}

int CovariateSchema::index_of(std::string_view name) const {
    for (std::size_t i = 0; i < vars_.size(); ++i)
        if (vars_[i].name == name) return static_cast<int>(i);
    return -1;
}

std::string DesignMatrix::column_name(int c, const CovariateSchema& schema) const {
    const auto& o = columns.at(static_cast<std::size_t>(c));
    switch (o.kind) {
        case ColumnKind::intercept: return "(intercept)";
        case ColumnKind::continuous: return schema[static_cast<std::size_t>(o.variable)].name;
        case ColumnKind::level:
        case ColumnKind::pooled: {
            const auto& v = schema[static_cast<std::size_t>(o.variable)];
            std::string s = v.name + "=";
            for (std::size_t k = 0; k < o.levels.size(); ++k) {
                if (k) s += "|";
                s += v.levels[static_cast<std::size_t>(o.levels[k])];
            }
            return s;
        }
    }
    return {};
}

std::vector<std::string> DesignMatrix::column_names(const CovariateSchema& schema) const {
    std::vector<std::string> out;
    out.reserve(columns.size());
    for (std::size_t c = 0; c < columns.size(); ++c) out.push_back(column_name(static_cast<int>(c), schema));
    return out;
}

int RawTable::column(std::string_view name) const {
    for (std::size_t i = 0; i < header.size(); ++i)
        if (header[i] == name) return static_cast<int>(i);
    return -1;
}

namespace {

double parse_double(const std::string& s, std::size_t row, const std::string& var) {
    const char* b = s.data();
    const char* e = b + s.size();
    while (b < e && (*b == ' ' || *b == '\t')) ++b;
    while (e > b && (e[-1] == ' ' || e[-1] == '\t' || e[-1] == '\r')) --e;
    double v = 0.0;
    auto [p, ec] = std::from_chars(b, e, v);
    if (ec != std::errc() || p != e || b == e || !std::isfinite(v))
        throw IngestError("row " + std::to_string(row + 1) + ": cannot parse '" + s + "' for variable '" + var + "'");
    return v;
}

std::string format_double(double v) {
    char buf[32];
    auto [p, ec] = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, p);
}

}  // namespace

DesignMatrix encode_design(const CovariateSchema& schema, const RawTable& table) {
    DesignMatrix d;
    d.columns.push_back({ColumnKind::intercept, -1, {}, {0}});
    std::vector<int> first_col(schema.size());
    for (std::size_t v = 0; v < schema.size(); ++v) {
        first_col[v] = static_cast<int>(d.columns.size());
        const auto& var = schema[v];
        if (!var.categorical()) {
            int c = static_cast<int>(d.columns.size());
            d.columns.push_back({ColumnKind::continuous, static_cast<int>(v), {}, {c}});
        } else {
            for (std::size_t l = 1; l < var.levels.size(); ++l) {
                int c = static_cast<int>(d.columns.size());
                d.columns.push_back({ColumnKind::level, static_cast<int>(v), {static_cast<int>(l)}, {c}});
            }
        }
    }

    std::vector<int> src(schema.size());
    for (std::size_t v = 0; v < schema.size(); ++v) {
        src[v] = table.column(schema[v].name);
        if (src[v] < 0) throw IngestError("missing column for variable '" + schema[v].name + "'");
    }
    std::vector<std::unordered_map<std::string, int>> level_index(schema.size());
    for (std::size_t v = 0; v < schema.size(); ++v)
        for (std::size_t l = 0; l < schema[v].levels.size(); ++l) level_index[v][schema[v].levels[l]] = static_cast<int>(l);

    const auto n = static_cast<Eigen::Index>(table.rows.size());
    d.X = Eigen::MatrixXd::Zero(n, static_cast<Eigen::Index>(d.columns.size()));
    d.X.col(0).setOnes();
    for (Eigen::Index i = 0; i < n; ++i) {
        const auto& row = table.rows[static_cast<std::size_t>(i)];
        for (std::size_t v = 0; v < schema.size(); ++v) {
            if (static_cast<std::size_t>(src[v]) >= row.size())
                throw IngestError("row " + std::to_string(i + 1) + ": missing field '" + schema[v].name + "'");
            const std::string& cell = row[static_cast<std::size_t>(src[v])];
            const auto& var = schema[v];
            if (!var.categorical()) {
                d.X(i, first_col[v]) = parse_double(cell, static_cast<std::size_t>(i), var.name);
                continue;
            }
            auto it = level_index[v].find(cell);
            if (it == level_index[v].end())
                throw SchemaError("row " + std::to_string(i + 1) + ": level '" + cell + "' not declared for variable '" +
                                  var.name + "'");
            if (it->second > 0) d.X(i, first_col[v] + it->second - 1) = 1.0;
        }
    }
    return d;
}

RawTable decode_design(const DesignMatrix& design, const CovariateSchema& schema) {
    RawTable t;
    for (const auto& v : schema.variables()) t.header.push_back(v.name);
    std::vector<int> first_col(schema.size(), -1);
    for (std::size_t c = 0; c < design.columns.size(); ++c) {
        const auto& o = design.columns[c];
        if (o.kind == ColumnKind::pooled) throw DomainError("cannot decode a reduced design");
        if (o.variable >= 0 && first_col[static_cast<std::size_t>(o.variable)] < 0)
            first_col[static_cast<std::size_t>(o.variable)] = static_cast<int>(c);
    }
    t.rows.resize(static_cast<std::size_t>(design.n()));
    for (Eigen::Index i = 0; i < design.n(); ++i) {
        auto& row = t.rows[static_cast<std::size_t>(i)];
        for (std::size_t v = 0; v < schema.size(); ++v) {
            const auto& var = schema[v];
            if (!var.categorical()) {
                row.push_back(format_double(design.X(i, first_col[v])));
                continue;
            }
            std::size_t level = 0;
            for (std::size_t l = 1; l < var.levels.size(); ++l)
                if (design.X(i, first_col[v] + static_cast<int>(l) - 1) != 0.0) level = l;
            row.push_back(var.levels[level]);
        }
    }
    return t;
}

DesignMatrix intercept_design(Eigen::Index n) {
    DesignMatrix d;
    d.X = Eigen::MatrixXd::Ones(n, 1);
    ColumnOrigin o;
    o.sources = {0};
    d.columns.push_back(o);
    return d;
}

LevelCounts level_counts(const DesignMatrix& design, const CovariateSchema& schema) {
    LevelCounts counts(schema.size());
    for (std::size_t v = 0; v < schema.size(); ++v) counts[v].assign(schema[v].levels.size(), 0);
    for (std::size_t v = 0; v < schema.size(); ++v) {
        if (!schema[v].categorical()) continue;
        std::vector<int> cols(schema[v].levels.size(), -1);
        for (std::size_t c = 0; c < design.columns.size(); ++c) {
            const auto& o = design.columns[c];
            if (o.variable == static_cast<int>(v) && o.kind == ColumnKind::level)
                cols[static_cast<std::size_t>(o.levels[0])] = static_cast<int>(c);
        }
        for (Eigen::Index i = 0; i < design.n(); ++i) {
            std::size_t level = 0;
            for (std::size_t l = 1; l < cols.size(); ++l)
                if (cols[l] >= 0 && design.X(i, cols[l]) != 0.0) level = l;
            ++counts[v][level];
        }
    }
    return counts;
}

ParamSet::ParamSet(int g, Eigen::Index d_mix, Eigen::Index d_body, Eigen::Index d_tail, double tau)
    : g_(g),
      tau_(tau),
      alpha_(Eigen::MatrixXd::Zero(d_mix, g + 1)),
      beta_(Eigen::MatrixXd::Zero(d_body, g)),
      phi_(Eigen::VectorXd::Ones(g)),
      nu_(Eigen::VectorXd::Zero(d_tail)) {
    if (g < 1) throw DomainError("component count g must be at least 1");
    if (d_mix < 1 || d_body < 1 || d_tail < 1) throw DomainError("designs need an intercept column");
    if (!(tau > 0.0)) throw DomainError("threshold tau must be positive");
}

void ParamSet::set_tau(double tau) {
    if (!(tau > 0.0)) throw DomainError("threshold tau must be positive");
    tau_ = tau;
}

void ParamSet::set_theta(double theta) {
    if (!(theta > 0.0) || !std::isfinite(theta)) throw DomainError("Lomax scale theta must be positive");
    theta_ = theta;
}

void ParamSet::permute_components(std::span<const int> order) {
    if (order.size() != static_cast<std::size_t>(g_)) throw DomainError("permutation size mismatch");
    Eigen::MatrixXd a = alpha_, b = beta_;
    Eigen::VectorXd p = phi_;
    for (int j = 0; j < g_; ++j) {
        alpha_.col(j) = a.col(order[static_cast<std::size_t>(j)]);
        beta_.col(j) = b.col(order[static_cast<std::size_t>(j)]);
        phi_(j) = p(order[static_cast<std::size_t>(j)]);
    }
}

void ParamSet::validate() const {
    if (g_ < 1) throw DomainError("component count g must be at least 1");
    if (alpha_.cols() != g_ + 1 || beta_.cols() != g_ || phi_.size() != g_)
        throw DomainError("parameter shapes inconsistent with g");
    if (!alpha_.col(g_).isZero(0.0)) throw DomainError("tail mixing column must be zero");
    if (!alpha_.allFinite() || !beta_.allFinite() || !nu_.allFinite()) throw DomainError("non-finite coefficient");
    for (int j = 0; j < g_; ++j)
        if (!(phi_(j) > 0.0) || !std::isfinite(phi_(j))) throw DomainError("dispersion must be positive");
    if (!(theta_ > 0.0) || !std::isfinite(theta_)) throw DomainError("Lomax scale theta must be positive");
    if (!(tau_ > 0.0)) throw DomainError("threshold tau must be positive");
}

BodyTailCounts split_body_tail(std::span<const double> y, double tau) {
    BodyTailCounts c;
    for (double v : y) {
        if (v <= tau) ++c.n_b;
        else ++c.n_t;
    }
    return c;
}

Dataset::Dataset(Eigen::VectorXd y, DesignMatrix design, double tau)
    : Dataset(std::move(y), design, design, design, tau) {}

Dataset::Dataset(Eigen::VectorXd y, DesignMatrix mix, DesignMatrix body, DesignMatrix tail, double tau)
    : y_(std::move(y)), mix_(std::move(mix)), body_(std::move(body)), tail_(std::move(tail)), tau_(tau) {
    if (!(tau > 0.0)) throw DomainError("threshold tau must be positive");
    for (Eigen::Index i = 0; i < y_.size(); ++i)
        if (!(y_(i) > 0.0) || !std::isfinite(y_(i)))
            throw DomainError("response must be positive and finite (row " + std::to_string(i + 1) + ")");
    if (mix_.n() != y_.size() || body_.n() != y_.size() || tail_.n() != y_.size())
        throw DomainError("design row count differs from response length");
    refresh_masks();
}

void Dataset::set_tau(double tau) {
    if (!(tau > 0.0)) throw DomainError("threshold tau must be positive");
    tau_ = tau;
    refresh_masks();
}

void Dataset::refresh_masks() {
    body_mask_.resize(static_cast<std::size_t>(y_.size()));
    for (Eigen::Index i = 0; i < y_.size(); ++i) body_mask_[static_cast<std::size_t>(i)] = y_(i) <= tau_ ? 1 : 0;
    counts_ = split_body_tail(std::span<const double>(y_.data(), static_cast<std::size_t>(y_.size())), tau_);
}

namespace {

DesignMatrix take_rows(const DesignMatrix& d, std::span<const Eigen::Index> rows) {
    DesignMatrix out;
    out.columns = d.columns;
    out.X.resize(static_cast<Eigen::Index>(rows.size()), d.D());
    for (std::size_t r = 0; r < rows.size(); ++r) out.X.row(static_cast<Eigen::Index>(r)) = d.X.row(rows[r]);
    return out;
}

}  // namespace

Dataset Dataset::subset(std::span<const Eigen::Index> rows) const {
    Eigen::VectorXd y(static_cast<Eigen::Index>(rows.size()));
    for (std::size_t r = 0; r < rows.size(); ++r) y(static_cast<Eigen::Index>(r)) = y_(rows[r]);
    return Dataset(std::move(y), take_rows(mix_, rows), take_rows(body_, rows), take_rows(tail_, rows), tau_);
}

Dataset Dataset::with_y(Eigen::VectorXd y) const {
    if (y.size() != y_.size()) throw DomainError("response length mismatch");
    return Dataset(std::move(y), mix_, body_, tail_, tau_);
}

}  // namespace mcreg
