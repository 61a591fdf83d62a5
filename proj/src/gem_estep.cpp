#include "mcreg/gem.hpp"

#include "mcreg/dists.hpp"
#include "mcreg/linalg.hpp"

#include <boost/math/special_functions/gamma.hpp>

#include <bit>
#include <cmath>
#include <limits>
#include <unordered_map>

namespace mcreg {

std::string_view to_string(EStepMode m) { return m == EStepMode::stochastic ? "stochastic" : "quadrature"; }

EStepMode estep_mode_from_string(std::string_view s) {
    if (s == "stochastic") return EStepMode::stochastic;
    if (s == "quadrature") return EStepMode::quadrature;
    throw DomainError("unknown E-step mode '" + std::string(s) + "'");
}

void FitConfig::validate() const {
    if (max_iters < 1) throw DomainError("max_iters must be at least 1");
    if (!(tol > 0.0)) throw DomainError("tol must be positive");
    if (draws < 1) throw DomainError("draws must be at least 1");
    if (step_halving_max < 0) throw DomainError("step_halving_max must be nonnegative");
    if (!(hessian_ridge >= 0.0)) throw DomainError("hessian_ridge must be nonnegative");
    if (newton_sweeps < 1) throw DomainError("newton_sweeps must be at least 1");
}

namespace {

struct ComponentEntry {
    double log_p = 0.0;
    double k = 0.0;
    double y_above = 0.0;
    double logy_above = 0.0;
};

enum class Want { loglik_only, latent };

// Linear predictors for all rows: logits n x (g+1), body log-means n x g, tail log-index n.
struct Predictors {
    Eigen::MatrixXd log_pi;
    Eigen::MatrixXd eta_body;
    Eigen::VectorXd eta_tail;
};

Predictors predictors(const Dataset& data, const ParamSet& p) {
    const int g = p.g();
    Predictors pr;
    pr.log_pi.resize(data.n(), g + 1);
    Eigen::VectorXd col;
    for (int j = 0; j <= g; ++j) {
        linalg::gemv(data.mix().X, p.alpha().col(j), col);
        pr.log_pi.col(j) = col;
    }
    for (Eigen::Index i = 0; i < data.n(); ++i) {
        const double m = pr.log_pi.row(i).maxCoeff();
        const double lse = m + std::log((pr.log_pi.row(i).array() - m).exp().sum());
        pr.log_pi.row(i).array() -= lse;
    }
    pr.eta_body.resize(data.n(), g);
    for (int j = 0; j < g; ++j) {
        linalg::gemv(data.body().X, p.beta().col(j), col);
        pr.eta_body.col(j) = col;
    }
    linalg::gemv(data.tail().X, p.nu(), pr.eta_tail);
    return pr;
}

EStepResult run_estep(const Dataset& data, const ParamSet& p, EStepMode mode, int draws, Rng* rng, Want want) {
    const int g = p.g();
    const Eigen::Index n = data.n();
    const double tau = p.tau();
    const double theta = p.theta();
    const Predictors pr = predictors(data, p);

    EStepResult out;
    LatentState& L = out.latent;
    if (want == Want::latent) {
        L.z = Eigen::MatrixXd::Zero(n, g + 1);
        L.k = Eigen::MatrixXd::Zero(n, g);
        L.y_above = Eigen::MatrixXd::Zero(n, g);
        L.logy_above = Eigen::MatrixXd::Zero(n, g);
    }

    std::vector<std::unordered_map<std::uint64_t, ComponentEntry>> memo(static_cast<std::size_t>(g));
    auto entry = [&](int j, double eta) -> const ComponentEntry& {
        auto& m = memo[static_cast<std::size_t>(j)];
        const auto key = std::bit_cast<std::uint64_t>(eta);
        auto it = m.find(key);
        if (it != m.end()) return it->second;
        const double phi = p.phi()(j);
        const double a = 1.0 / phi;
        const double s = phi * std::exp(eta);
        const double t = tau / s;
        ComponentEntry e;
        e.log_p = detail::log_gamma_p(a, t);
        if (!(std::exp(e.log_p) >= kMinConditioningProb))
            throw DegenerateTruncation("component " + std::to_string(j + 1) +
                                       " has numerically zero mass below the threshold");
        if (want == Want::latent) {
            e.k = std::exp(detail::log_gamma_q(a, t) - e.log_p);
            e.y_above = s * detail::upper_mean(a, t);
            if (mode == EStepMode::quadrature) e.logy_above = std::log(s) + detail::upper_mean_log(a, t);
        }
        return m.emplace(key, e).first->second;
    };

    double loglik = 0.0;
    std::vector<double> terms(static_cast<std::size_t>(g));
    const double log_tau_theta = std::log(tau + theta);
    for (Eigen::Index i = 0; i < n; ++i) {
        const double y = data.y()(i);
        if (!data.in_body(i)) {
            const double eta = std::exp(pr.eta_tail(i));
            loglik += pr.log_pi(i, g) + std::log(eta) + eta * log_tau_theta - (eta + 1.0) * std::log(y + theta);
            if (want == Want::latent) L.z(i, g) = 1.0;
            continue;
        }
        double mx = -std::numeric_limits<double>::infinity();
        for (int j = 0; j < g; ++j) {
            const double eta = pr.eta_body(i, j);
            const ComponentEntry& e = entry(j, eta);
            const double v = pr.log_pi(i, j) + detail::gamma_logpdf_raw(y, std::exp(eta), p.phi()(j)) - e.log_p;
            terms[static_cast<std::size_t>(j)] = v;
            mx = std::max(mx, v);
        }
        double s = 0.0;
        for (int j = 0; j < g; ++j) s += std::exp(terms[static_cast<std::size_t>(j)] - mx);
        const double lse = mx + std::log(s);
        loglik += lse;
        if (want != Want::latent) continue;
        for (int j = 0; j < g; ++j) {
            const double eta = pr.eta_body(i, j);
            const ComponentEntry& e = entry(j, eta);
            L.z(i, j) = std::exp(terms[static_cast<std::size_t>(j)] - lse);
            L.k(i, j) = e.k;
            L.y_above(i, j) = e.y_above;
            if (mode == EStepMode::quadrature) {
                L.logy_above(i, j) = e.logy_above;
            } else {
                const double phi = p.phi()(j);
                const double a = 1.0 / phi;
                const double sc = phi * std::exp(eta);
                double acc = 0.0;
                for (int d = 0; d < draws; ++d) acc += std::log(sc * detail::sample_upper(a, tau / sc, *rng));
                L.logy_above(i, j) = acc / draws;
            }
        }
    }
    out.loglik = loglik;
    return out;
}

}  // namespace

EStepResult e_step_full(const Dataset& data, const ParamSet& p, EStepMode mode, int draws, Rng& rng) {
    return run_estep(data, p, mode, draws, &rng, Want::latent);
}

LatentState e_step(const Dataset& data, const ParamSet& p, EStepMode mode, Rng& rng, int draws) {
    return run_estep(data, p, mode, draws, &rng, Want::latent).latent;
}

double observed_loglik(const Dataset& data, const ParamSet& p) {
    return run_estep(data, p, EStepMode::quadrature, 1, nullptr, Want::loglik_only).loglik;
}

double total_penalty(const ParamSet& p, const PenaltySet& plans) {
    double s = 0.0;
    for (Part part : {Part::mixing, Part::body, Part::tail}) {
        const PenaltyPlan& plan = plans[part];
        if (plan.active()) s += penalty_value(part_coefficients(p, part), plan);
    }
    return s;
}

double penalized_objective(const Dataset& data, const ParamSet& p, const PenaltySet& plans) {
    return observed_loglik(data, p) - total_penalty(p, plans);
}

double q_value(const ParamSet& p, const LatentState& latent, const Dataset& data, const PenaltySet& plans) {
    MixingObjective S(data.mix().X, latent.z, Majorizer{});
    BodyObjective T(data.body().X, data.y(), latent, Majorizer{});
    double q = S.loglik(p.alpha_free()) + T.loglik(p.beta(), p.phi());
    if (data.n_t() > 0) {
        TailObjective V(data.tail().X, data.y(), p.tau(), Majorizer{});
        q += V.loglik(p.theta(), p.nu());
    }
    return q - total_penalty(p, plans);
}

}  // namespace mcreg
