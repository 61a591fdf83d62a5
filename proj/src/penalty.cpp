#include "mcreg/penalty.hpp"

#include <cmath>
#include <limits>
#include <map>

namespace mcreg {

std::string_view to_string(Part p) {
    switch (p) {
        case Part::mixing: return "mixing";
        case Part::body: return "body";
        case Part::tail: return "tail";
    }
    return "mixing";
}

std::string_view to_string(PenaltyFamily f) { return f == PenaltyFamily::lasso ? "lasso" : "scad"; }

PenaltyFamily penalty_family_from_string(std::string_view s) {
    if (s == "lasso") return PenaltyFamily::lasso;
    if (s == "scad") return PenaltyFamily::scad;
    throw DomainError("unknown penalty family '" + std::string(s) + "'");
}

std::vector<CoeffVector> build_coeff_vectors(const CovariateSchema& schema, const DesignMatrix& design) {
    std::vector<CoeffVector> out;
    for (std::size_t v = 0; v < schema.size(); ++v) {
        const auto& var = schema[v];
        // level index -> column (reference has none)
        std::map<int, int> col;
        for (std::size_t c = 0; c < design.columns.size(); ++c) {
            const auto& o = design.columns[c];
            if (o.variable != static_cast<int>(v)) continue;
            if (o.kind == ColumnKind::pooled) throw DomainError("penalties are defined on full designs only");
            if (o.kind == ColumnKind::continuous) col[-1] = static_cast<int>(c);
            else col[o.levels[0]] = static_cast<int>(c);
        }
        const int vi = static_cast<int>(v);
        if (!var.categorical()) {
            out.push_back({{{col.at(-1), 1.0}}, vi, -1, -1});
            continue;
        }
        const int m = static_cast<int>(var.levels.size());
        auto vec = [&](int la, int lb) {
            CoeffVector c{{}, vi, la, lb};
            if (la > 0) c.entries.push_back({col.at(la), -1.0});
            c.entries.push_back({col.at(lb), 1.0});
            return c;
        };
        if (var.kind == VariableKind::ordinal) {
            for (int l = 1; l < m; ++l) out.push_back(vec(l - 1, l));
        } else {
            for (int l = 1; l < m; ++l) out.push_back(vec(0, l));
            for (int la = 1; la < m; ++la)
                for (int lb = la + 1; lb < m; ++lb) out.push_back(vec(la, lb));
        }
    }
    return out;
}

PenaltySet make_penalty_set(const CovariateSchema& schema, const Dataset& data, PenaltyFamily family, double scad_a,
                            double eps) {
    if (family == PenaltyFamily::scad && !(scad_a > 2.0)) throw DomainError("SCAD parameter a must exceed 2");
    PenaltySet s;
    const DesignMatrix* designs[3] = {&data.mix(), &data.body(), &data.tail()};
    const double scales[3] = {static_cast<double>(data.n()), static_cast<double>(data.n_b()),
                              static_cast<double>(data.n_t())};
    const Part parts[3] = {Part::mixing, Part::body, Part::tail};
    for (int k = 0; k < 3; ++k) {
        PenaltyPlan& p = s[parts[k]];
        p.part = parts[k];
        p.coeffs = build_coeff_vectors(schema, *designs[k]);
        p.family = family;
        p.scad_a = scad_a;
        p.sample_scale = scales[k];
        p.eps = eps;
        p.weights.assign(p.coeffs.size(), 1.0);
    }
    return s;
}

double penalty_fn(double psi, PenaltyFamily family, double lambda, double n_l, double a) {
    if (psi < 0.0 || lambda < 0.0) throw DomainError("penalty arguments must be nonnegative");
    if (family == PenaltyFamily::lasso) return n_l * lambda * psi;
    if (psi <= lambda) return n_l * lambda * psi;
    if (psi <= a * lambda) return n_l * (2.0 * a * lambda * psi - psi * psi - lambda * lambda) / (2.0 * (a - 1.0));
    return n_l * lambda * lambda * (a + 1.0) / 2.0;
}

double penalty_deriv(double psi, PenaltyFamily family, double lambda, double n_l, double a) {
    if (psi < 0.0 || lambda < 0.0) throw DomainError("penalty arguments must be nonnegative");
    if (family == PenaltyFamily::lasso || psi <= lambda) return n_l * lambda;
    return n_l * std::max(a * lambda - psi, 0.0) / (a - 1.0);
}

double eps_norm(const Eigen::Ref<const Eigen::RowVectorXd>& v, double eps) { return std::sqrt(v.squaredNorm() + eps); }

Eigen::RowVectorXd contrast(const CoeffVector& c, const Eigen::MatrixXd& theta) {
    Eigen::RowVectorXd r = Eigen::RowVectorXd::Zero(theta.cols());
    for (const auto& [col, w] : c.entries) r += w * theta.row(col);
    return r;
}

Eigen::MatrixXd part_coefficients(const ParamSet& p, Part part) {
    switch (part) {
        case Part::mixing: return p.alpha_free();
        case Part::body: return p.beta();
        case Part::tail: return p.nu();
    }
    return {};
}

void set_part_coefficients(ParamSet& p, Part part, const Eigen::MatrixXd& theta) {
    switch (part) {
        case Part::mixing: p.alpha_free() = theta; break;
        case Part::body: p.beta() = theta; break;
        case Part::tail: p.nu() = theta.col(0); break;
    }
}

double penalty_value(const Eigen::MatrixXd& theta, const PenaltyPlan& plan) {
    double s = 0.0;
    for (std::size_t k = 0; k < plan.coeffs.size(); ++k) {
        const double psi = eps_norm(contrast(plan.coeffs[k], theta), plan.eps);
        s += penalty_fn(psi, plan.family, plan.lambda_k(k), plan.sample_scale, plan.scad_a);
    }
    return s;
}

double Majorizer::value(const Eigen::MatrixXd& theta) const {
    if (M.size() == 0) return constant;
    return constant + 0.5 * (theta.transpose() * M * theta).trace();
}

Majorizer build_majorizer(const Eigen::MatrixXd& theta_prev, const PenaltyPlan& plan) {
    Majorizer mj;
    const Eigen::Index D = theta_prev.rows();
    mj.M = Eigen::MatrixXd::Zero(D, D);
    for (std::size_t k = 0; k < plan.coeffs.size(); ++k) {
        const auto& c = plan.coeffs[k];
        const double lk = plan.lambda_k(k);
        if (lk == 0.0) continue;
        const Eigen::RowVectorXd u = contrast(c, theta_prev);
        const double psi = std::sqrt(u.squaredNorm() + plan.eps);
        const double p = penalty_fn(psi, plan.family, lk, plan.sample_scale, plan.scad_a);
        const double w = penalty_deriv(psi, plan.family, lk, plan.sample_scale, plan.scad_a) / psi;
        // p(psi*) + w/2 * (|c'Theta|^2 + eps - psi*^2)
        mj.constant += p + 0.5 * w * (plan.eps - psi * psi);
        for (const auto& [ca, wa] : c.entries)
            for (const auto& [cb, wb] : c.entries) mj.M(ca, cb) += w * wa * wb;
    }
    return mj;
}

double majorizer_value(const Eigen::MatrixXd& theta, const Eigen::MatrixXd& theta_prev, const PenaltyPlan& plan) {
    return build_majorizer(theta_prev, plan).value(theta);
}

std::vector<double> adaptive_std_weights(const Eigen::MatrixXd& pilot_theta, const PenaltyPlan& plan,
                                         const CovariateSchema& schema, const LevelCounts& counts, Eigen::Index n,
                                         double w_max, std::vector<std::string>* warnings) {
    std::map<int, int> r_g;
    for (const auto& c : plan.coeffs) ++r_g[c.variable];
    std::vector<double> w(plan.coeffs.size(), 1.0);
    for (std::size_t k = 0; k < plan.coeffs.size(); ++k) {
        const auto& c = plan.coeffs[k];
        const double norm = contrast(c, pilot_theta).norm();
        double w_ad = norm > 0.0 ? 1.0 / norm : std::numeric_limits<double>::infinity();
        if (w_ad > w_max) {
            w_ad = w_max;
            if (warnings)
                warnings->push_back(std::string(to_string(plan.part)) + ": pilot contrast on variable '" +
                                    schema[static_cast<std::size_t>(c.variable)].name +
                                    "' is zero; adaptive weight capped");
        }
        double w_st = 1.0;
        if (!c.continuous()) {
            const auto& lv = counts[static_cast<std::size_t>(c.variable)];
            const double p_g = static_cast<double>(schema[static_cast<std::size_t>(c.variable)].levels.size());
            const double np = static_cast<double>(lv[static_cast<std::size_t>(c.level_a)] +
                                                  lv[static_cast<std::size_t>(c.level_b)]);
            w_st = (p_g - 1.0) / r_g[c.variable] * std::sqrt(np / static_cast<double>(n));
        }
        w[k] = w_ad * w_st;
    }
    return w;
}

}  // namespace mcreg
