#include "mcreg/selection.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>

namespace mcreg {

void AdjustConfig::validate() const {
    if (!(delta0 > 0.0) || !(eta > 0.0) || !(xi > 0.0)) throw DomainError("adjustment settings must be positive");
}

std::string_view to_string(Criterion c) {
    switch (c) {
        case Criterion::paic: return "paic";
        case Criterion::pbic: return "pbic";
        case Criterion::cv: return "cv";
    }
    return "?";
}

Criterion criterion_from_string(std::string_view s) {
    if (s == "paic") return Criterion::paic;
    if (s == "pbic") return Criterion::pbic;
    if (s == "cv") return Criterion::cv;
    throw DomainError("unknown tuning criterion '" + std::string(s) + "'");
}

double partial_objective(Part part, const ParamSet& p, const LatentState& latent, const Dataset& data,
                         const PenaltyPlan& plan, bool penalized) {
    double v = 0.0;
    switch (part) {
        case Part::mixing:
            v = MixingObjective(data.mix().X, latent.z, Majorizer{}).loglik(p.alpha_free());
            break;
        case Part::body:
            v = BodyObjective(data.body().X, data.y(), latent, Majorizer{}).loglik(p.beta(), p.phi());
            break;
        case Part::tail:
            if (data.n_t() > 0) v = TailObjective(data.tail().X, data.y(), data.tau(), Majorizer{}).loglik(p.theta(), p.nu());
            break;
    }
    if (penalized && plan.active()) v -= penalty_value(part_coefficients(p, part), plan);
    return v;
}

PartialObjectives partial_objectives(const ParamSet& p, const LatentState& latent, const Dataset& data,
                                     const PenaltySet& plans) {
    PartialObjectives o;
    o.S0 = partial_objective(Part::mixing, p, latent, data, plans.mixing, false);
    o.T0 = partial_objective(Part::body, p, latent, data, plans.body, false);
    o.V0 = partial_objective(Part::tail, p, latent, data, plans.tail, false);
    auto pen = [&](Part part) {
        const PenaltyPlan& plan = plans[part];
        return plan.active() ? penalty_value(part_coefficients(p, part), plan) : 0.0;
    };
    o.S = o.S0 - pen(Part::mixing);
    o.T = o.T0 - pen(Part::body);
    o.V = o.V0 - pen(Part::tail);
    return o;
}

namespace {

const DesignMatrix& part_design(const Dataset& data, Part part) {
    return part == Part::mixing ? data.mix() : part == Part::body ? data.body() : data.tail();
}

// Non-intercept design columns grouped by originating variable, in column order.
std::vector<std::vector<int>> variable_groups(const DesignMatrix& d) {
    std::map<int, std::vector<int>> by_var;
    for (int c = 0; c < static_cast<int>(d.columns.size()); ++c) {
        const ColumnOrigin& o = d.columns[static_cast<std::size_t>(c)];
        if (o.kind == ColumnKind::intercept) continue;
        by_var[o.variable].push_back(c);
    }
    std::vector<std::vector<int>> out;
    for (auto& [v, cols] : by_var) out.push_back(std::move(cols));
    std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.front() < b.front(); });
    return out;
}

bool mergeable(const DesignMatrix& d, const std::vector<int>& group) {
    return !group.empty() && d.columns[static_cast<std::size_t>(group.front())].kind != ColumnKind::continuous;
}

// Largest tolerance at which the state could still change: row norms and within-variable gaps.
double change_bound(const Eigen::MatrixXd& th, const DesignMatrix& d, const std::vector<std::vector<int>>& groups) {
    double b = 0.0;
    for (const auto& grp : groups) {
        for (int r : grp) b = std::max(b, th.row(r).norm());
        if (!mergeable(d, grp)) continue;
        for (std::size_t a = 0; a < grp.size(); ++a)
            for (std::size_t c = a + 1; c < grp.size(); ++c)
                b = std::max(b, (th.row(grp[a]) - th.row(grp[c])).norm());
    }
    return b;
}

}  // namespace

AdjustResult auto_adjust_part(Part part, const ParamSet& fit, const LatentState& latent, const Dataset& data,
                              const PenaltyPlan& plan, const AdjustConfig& cfg) {
    cfg.validate();
    const DesignMatrix& d = part_design(data, part);
    const auto groups = variable_groups(d);
    AdjustResult res;
    res.params = fit;
    if (part == Part::tail && data.n_t() == 0) return res;

    Eigen::MatrixXd accepted = part_coefficients(fit, part);
    double obj_acc = partial_objective(part, fit, latent, data, plan, true);
    double delta = cfg.delta0;
    for (int guard = 0; guard < 10000; ++guard) {
        Eigen::MatrixXd work = accepted;
        int merges = 0, zeros = 0;
        for (const auto& grp : groups) {
            if (!mergeable(d, grp)) continue;
            for (std::size_t a = 0; a < grp.size(); ++a)
                for (std::size_t c = a + 1; c < grp.size(); ++c) {
                    const int r1 = grp[a], r2 = grp[c];
                    if (work.row(r1) == work.row(r2)) continue;
                    if ((work.row(r1) - work.row(r2)).norm() < delta) {
                        work.row(r2) = work.row(r1);
                        ++merges;
                    }
                }
        }
        for (const auto& grp : groups)
            for (int r : grp)
                if (!work.row(r).isZero(0.0) && work.row(r).norm() < delta) {
                    work.row(r).setZero();
                    ++zeros;
                }
        if (merges + zeros > 0) {
            ParamSet cand = res.params;
            set_part_coefficients(cand, part, work);
            const double obj = partial_objective(part, cand, latent, data, plan, true);
            const bool ok = std::isfinite(obj) && obj_acc - obj <= cfg.xi;
            res.audit.push_back({part, delta, obj_acc, obj, ok, merges, zeros});
            if (!ok) break;
            accepted = work;
            obj_acc = obj;
            res.params = std::move(cand);
        }
        if (delta > change_bound(accepted, d, groups)) break;
        delta *= 1.0 + cfg.eta;
    }
    return res;
}

AdjustResult auto_adjust(const ParamSet& fit, const LatentState& latent, const Dataset& data, const PenaltySet& plans,
                         const AdjustConfig& cfg) {
    AdjustResult res;
    res.params = fit;
    for (Part part : {Part::mixing, Part::body, Part::tail}) {
        AdjustResult r = auto_adjust_part(part, res.params, latent, data, plans[part], cfg);
        res.params = std::move(r.params);
        res.audit.insert(res.audit.end(), r.audit.begin(), r.audit.end());
    }
    return res;
}

int effective_params_part(Part part, const ParamSet& p, const Dataset& data) {
    const DesignMatrix& d = part_design(data, part);
    const Eigen::MatrixXd th = part_coefficients(p, part);
    int count = static_cast<int>(th.cols());  // intercepts always count
    for (const auto& grp : variable_groups(d)) {
        for (Eigen::Index j = 0; j < th.cols(); ++j) {
            std::set<double> distinct;
            for (int r : grp)
                if (th(r, j) != 0.0) distinct.insert(th(r, j));
            count += static_cast<int>(distinct.size());
        }
    }
    if (part == Part::body) count += p.g();
    if (part == Part::tail) count += 1;
    return count;
}

EffectiveParams effective_params(const ParamSet& p, const Dataset& data) {
    EffectiveParams e;
    e.n1 = effective_params_part(Part::mixing, p, data);
    e.n2 = effective_params_part(Part::body, p, data);
    e.n3 = effective_params_part(Part::tail, p, data);
    e.total = e.n1 + e.n2 + e.n3;
    return e;
}

}  // namespace mcreg
