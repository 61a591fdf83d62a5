#include "mcreg/selection.hpp"

#include "mcreg/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace mcreg {

TuningGrid TuningGrid::geometric(double base, double ratio, int count) {
    if (!(base > 0.0) || !(ratio > 1.0) || count < 1) throw DomainError("invalid geometric grid");
    TuningGrid g;
    for (int k = 0; k < count; ++k) g.mixing.push_back(base * std::pow(ratio, k));
    g.body = g.mixing;
    g.tail = g.mixing;
    return g;
}

namespace {

NewtonOptions block_newton() {
    NewtonOptions o;
    o.sweeps = 1;
    return o;
}

LatentState latent_rows(const LatentState& L, const std::vector<Eigen::Index>& rows) {
    LatentState out;
    const auto m = static_cast<Eigen::Index>(rows.size());
    out.z.resize(m, L.z.cols());
    out.k.resize(m, L.k.cols());
    out.y_above.resize(m, L.y_above.cols());
    out.logy_above.resize(m, L.logy_above.cols());
    for (Eigen::Index r = 0; r < m; ++r) {
        const Eigen::Index i = rows[static_cast<std::size_t>(r)];
        out.z.row(r) = L.z.row(i);
        out.k.row(r) = L.k.row(i);
        out.y_above.row(r) = L.y_above.row(i);
        out.logy_above.row(r) = L.logy_above.row(i);
    }
    return out;
}

double log_sample_size(Part part, const Dataset& data) {
    const double n = part == Part::mixing ? static_cast<double>(data.n())
                     : part == Part::body ? static_cast<double>(data.n_b())
                                          : static_cast<double>(data.n_t());
    return std::log(std::max(n, 1.0));
}

struct PathPoint {
    ParamSet adjusted;
    double p0 = 0.0;
    int df = 0;
};

// Warm-started regularization path for one part on a fixed latent state.
std::vector<PathPoint> run_path(Part part, const ParamSet& pilot, const LatentState& latent, const Dataset& data,
                                const PenaltyPlan& base, const std::vector<double>& lambdas, const TuneConfig& cfg) {
    std::vector<PathPoint> out;
    ParamSet warm = pilot;
    for (double lam : lambdas) {
        PenaltyPlan plan = base;
        plan.lambda = lam;
        warm = maximize_block(part, warm, latent, data, plan, cfg.max_sweeps, cfg.block_tol);
        AdjustResult adj = auto_adjust_part(part, warm, latent, data, plan, cfg.adjust);
        PathPoint pt;
        pt.p0 = partial_objective(part, adj.params, latent, data, plan, false);
        pt.df = effective_params_part(part, adj.params, data);
        pt.adjusted = std::move(adj.params);
        out.push_back(std::move(pt));
    }
    return out;
}

std::vector<int> stratified_folds(const Dataset& data, int K, std::uint64_t seed) {
    Rng rng = make_rng(seed, "cv");
    std::vector<Eigen::Index> body, tail;
    for (Eigen::Index i = 0; i < data.n(); ++i) (data.in_body(i) ? body : tail).push_back(i);
    auto shuffle = [&](std::vector<Eigen::Index>& v) {
        for (std::size_t i = v.size(); i > 1; --i) std::swap(v[i - 1], v[uniform_index(rng, i)]);
    };
    shuffle(body);
    shuffle(tail);
    std::vector<int> fold(static_cast<std::size_t>(data.n()), 0);
    for (std::size_t k = 0; k < body.size(); ++k) fold[static_cast<std::size_t>(body[k])] = static_cast<int>(k % K);
    for (std::size_t k = 0; k < tail.size(); ++k) fold[static_cast<std::size_t>(tail[k])] = static_cast<int>(k % K);
    return fold;
}

}  // namespace

ParamSet maximize_block(Part part, const ParamSet& start, const LatentState& latent, const Dataset& data,
                        const PenaltyPlan& plan, int max_sweeps, double tol) {
    if (part == Part::tail && data.n_t() == 0) return start;
    ParamSet p = start;
    const NewtonOptions opt = block_newton();
    double f = partial_objective(part, p, latent, data, plan, true);
    for (int s = 0; s < max_sweeps; ++s) {
        ParamSet q = p;
        switch (part) {
            case Part::mixing:
                q.alpha_free() = m_step_alpha(latent, data, plan, p.alpha_free(), opt);
                break;
            case Part::body:
                q.beta() = m_step_beta(latent, data, plan, p.beta(), p.phi(), opt);
                q.phi() = m_step_phi(q.beta(), latent, data, p.phi());
                break;
            case Part::tail:
                q.nu() = m_step_nu(data, plan, p.nu(), p.theta(), opt);
                q.set_theta(m_step_theta(q.nu(), data, p.theta()));
                break;
        }
        const double fq = partial_objective(part, q, latent, data, plan, true);
        if (!(fq >= f)) break;
        const double gain = fq - f;
        p = std::move(q);
        f = fq;
        if (gain < tol) break;
    }
    return p;
}

TuningResult tune_lambda(const Dataset& data, const ParamSet& pilot, const LatentState& latent,
                         const PenaltySet& plans, const TuningGrid& grid, const TuneConfig& cfg) {
    cfg.adjust.validate();
    if (cfg.criterion == Criterion::cv && cfg.folds < 2) throw DomainError("cross-validation needs at least 2 folds");
    TuningResult res;

    const std::vector<int> fold = cfg.criterion == Criterion::cv ? stratified_folds(data, cfg.folds, cfg.seed)
                                                                 : std::vector<int>{};

    for (Part part : {Part::mixing, Part::body, Part::tail}) {
        const auto& lambdas = grid[part];
        if (lambdas.empty()) continue;
        if (!std::is_sorted(lambdas.begin(), lambdas.end())) throw DomainError("tuning grid must be ascending");
        const PenaltyPlan& base = plans[part];
        const auto path = run_path(part, pilot, latent, data, base, lambdas, cfg);

        Criterion crit = cfg.criterion;
        if (crit == Criterion::cv && part == Part::tail && data.n_t() < cfg.folds) {
            res.warnings.push_back("too few tail observations for stratified folds; tail penalty tuned by pBIC");
            crit = Criterion::pbic;
        }

        std::vector<double> score(lambdas.size()), sd(lambdas.size(), 0.0);
        if (crit != Criterion::cv) {
            const double pen = crit == Criterion::paic ? 2.0 : log_sample_size(part, data);
            for (std::size_t k = 0; k < lambdas.size(); ++k) score[k] = -2.0 * path[k].p0 + pen * path[k].df;
        } else {
            const int K = cfg.folds;
            std::vector<std::vector<double>> dev(static_cast<std::size_t>(K));
            parallel_for(static_cast<std::size_t>(K), cfg.threads, [&](std::size_t f) {
                std::vector<Eigen::Index> train, held;
                for (Eigen::Index i = 0; i < data.n(); ++i)
                    (fold[static_cast<std::size_t>(i)] == static_cast<int>(f) ? held : train).push_back(i);
                const Dataset dtrain = data.subset(train);
                const Dataset dheld = data.subset(held);
                const LatentState ltrain = latent_rows(latent, train);
                // Keep the penalty on the training objective's scale.
                PenaltyPlan fplan = base;
                fplan.sample_scale *= std::exp(log_sample_size(part, dtrain) - log_sample_size(part, data));
                const auto fpath = run_path(part, pilot, ltrain, dtrain, fplan, lambdas, cfg);
                Rng unused = make_rng(cfg.seed, "cv-estep", f);
                auto& out = dev[f];
                for (const auto& pt : fpath) {
                    try {
                        const LatentState lh = e_step(dheld, pt.adjusted, cfg.held_out_estep, unused);
                        out.push_back(-2.0 * partial_objective(part, pt.adjusted, lh, dheld, base, false));
                    } catch (const Error&) {
                        out.push_back(std::numeric_limits<double>::infinity());
                    }
                }
            });
            for (std::size_t k = 0; k < lambdas.size(); ++k) {
                double m = 0.0;
                for (int f = 0; f < K; ++f) m += dev[static_cast<std::size_t>(f)][k];
                m /= K;
                double v = 0.0;
                for (int f = 0; f < K; ++f) v += std::pow(dev[static_cast<std::size_t>(f)][k] - m, 2);
                score[k] = m;
                sd[k] = std::isfinite(m) ? std::sqrt(v / (K - 1)) / std::sqrt(static_cast<double>(K)) : 0.0;
            }
        }

        std::size_t best = 0;
        for (std::size_t k = 1; k < score.size(); ++k)
            if (score[k] <= score[best]) best = k;
        std::size_t chosen = best;
        if (crit == Criterion::cv) {
            const double cap = score[best] + sd[best];
            for (std::size_t k = 0; k < score.size(); ++k)
                if (score[k] <= cap) chosen = std::max(chosen, k);
        }
        for (std::size_t k = 0; k < lambdas.size(); ++k)
            res.rows.push_back({part, lambdas[k], path[k].p0, path[k].df, score[k], sd[k]});
        const double lam = lambdas[chosen];
        (part == Part::mixing ? res.lambda_mixing : part == Part::body ? res.lambda_body : res.lambda_tail) = lam;
    }
    return res;
}

}  // namespace mcreg
