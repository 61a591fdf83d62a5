#include "mcreg/gem.hpp"

#include "mcreg/linalg.hpp"
#include "mcreg/selection.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace mcreg {

std::vector<int> canonical_order(const ParamSet& p, const Dataset& data) {
    const int g = p.g();
    std::vector<double> mean(static_cast<std::size_t>(g));
    for (int j = 0; j < g; ++j)
        mean[static_cast<std::size_t>(j)] = linalg::gemv(data.body().X, p.beta().col(j)).array().exp().mean();
    std::vector<int> order(static_cast<std::size_t>(g));
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](int a, int b) { return mean[static_cast<std::size_t>(a)] < mean[static_cast<std::size_t>(b)]; });
    return order;
}

namespace {

void permute_latent(LatentState& L, const std::vector<int>& order) {
    if (L.z.size() == 0) return;
    const LatentState old = L;
    for (std::size_t j = 0; j < order.size(); ++j) {
        const auto jj = static_cast<Eigen::Index>(j);
        L.z.col(jj) = old.z.col(order[j]);
        L.k.col(jj) = old.k.col(order[j]);
        L.y_above.col(jj) = old.y_above.col(order[j]);
        L.logy_above.col(jj) = old.logy_above.col(order[j]);
    }
}

}  // namespace

FitReport fit_gem(const Dataset& data_in, int g, double tau, const PenaltySet& plans, const FitConfig& config,
                  std::optional<ParamSet> init) {
    config.validate();
    if (g < 1) throw DomainError("component count g must be at least 1");
    Dataset data = data_in;
    if (data.tau() != tau) data.set_tau(tau);

    FitReport rep;
    ParamSet p;
    if (init) {
        p = *init;
        if (p.g() != g) throw DomainError("initial parameters have a different component count");
        if (p.d_mix() != data.mix().D() || p.d_body() != data.body().D() || p.d_tail() != data.tail().D())
            throw DomainError("initial parameters do not match the design dimensions");
        p.set_tau(tau);
    } else {
        Rng init_rng = make_rng(config.seed, "init");
        p = init_cmm(data, g, tau, init_rng);
    }
    p.validate();

    NewtonOptions opt;
    opt.sweeps = config.newton_sweeps;
    opt.max_halving = config.step_halving_max;
    opt.ridge = config.hessian_ridge;

    Rng rng = make_rng(config.seed, "e-step");
    EStepResult es;
    try {
        es = e_step_full(data, p, config.estep, config.draws, rng);
    } catch (const Error& e) {
        rep.params = p;
        rep.failed = true;
        rep.message = std::string("initial E-step failed: ") + e.what();
        return rep;
    }
    double obj = es.loglik - total_penalty(p, plans);
    rep.trajectory.push_back(obj);

    ParamSet best = p;
    LatentState best_latent = es.latent;
    double best_obj = obj;
    double best_loglik = es.loglik;

    for (int it = 1; it <= config.max_iters; ++it) {
        ParamSet next;
        EStepResult es_next;
        try {
            next = m_step(p, es.latent, data, plans, opt, it == 1 ? &rep.warnings : nullptr);
            es_next = e_step_full(data, next, config.estep, config.draws, rng);
        } catch (const Error& e) {
            rep.failed = true;
            rep.message = std::string("iteration ") + std::to_string(it) + ": " + e.what();
            break;
        }
        const double obj_next = es_next.loglik - total_penalty(next, plans);
        rep.trajectory.push_back(obj_next);
        rep.iterations = it;
        if (!std::isfinite(obj_next)) {
            rep.failed = true;
            rep.message = "objective became non-finite at iteration " + std::to_string(it);
            break;
        }
        if (obj_next < obj - 1e-8) rep.monotone = false;
        const double gain = obj_next - obj;
        p = std::move(next);
        es = std::move(es_next);
        obj = obj_next;
        if (obj > best_obj) {
            best = p;
            best_latent = es.latent;
            best_obj = obj;
            best_loglik = es.loglik;
        }
        if (gain < config.tol) {
            rep.converged = true;
            break;
        }
    }

    rep.params = best;
    rep.latent = std::move(best_latent);
    rep.loglik = best_loglik;
    rep.penalized = best_obj;
    if (config.sort_components) {
        const auto order = canonical_order(rep.params, data);
        rep.params.permute_components(order);
        permute_latent(rep.latent, order);
    }
    rep.df = effective_params(rep.params, data).total;
    rep.aic = -2.0 * rep.loglik + 2.0 * rep.df;
    rep.bic = -2.0 * rep.loglik + rep.df * std::log(static_cast<double>(data.n()));
    return rep;
}

}  // namespace mcreg
