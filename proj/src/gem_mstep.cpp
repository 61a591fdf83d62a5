#include "mcreg/gem.hpp"

#include "mcreg/linalg.hpp"

#include <boost/math/special_functions/gamma.hpp>
#include <boost/math/tools/minima.hpp>

#include <cmath>
#include <limits>

namespace mcreg {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

// Damped Newton ascent on a concave-ish block. Accepts a step only when the
// objective does not decrease; otherwise halves it, and gives up after
// max_halving attempts leaving x unchanged.
template <class Value, class Grad, class Hess>
double newton_ascent(Eigen::VectorXd& x, Value value, Grad grad, Hess hess, const NewtonOptions& opt) {
    double fx = value(x);
    if (!std::isfinite(fx)) throw FitFailure("M-step objective is not finite at the current iterate");
    for (int sweep = 0; sweep < opt.sweeps; ++sweep) {
        const Eigen::VectorXd g = grad(x);
        if (!g.allFinite()) break;
        const Eigen::MatrixXd A = -hess(x);
        Eigen::VectorXd d;
        if (!linalg::spd_solve(A, g, opt.ridge, d)) break;
        double step = 1.0;
        bool accepted = false;
        Eigen::VectorXd cand;
        double fc = kNegInf;
        for (int h = 0; h <= opt.max_halving; ++h) {
            cand = x + step * d;
            fc = value(cand);
            if (std::isfinite(fc) && fc >= fx) {
                accepted = true;
                break;
            }
            step *= 0.5;
        }
        if (!accepted) break;
        const double gain = fc - fx;
        x = cand;
        fx = fc;
        if (gain <= opt.tol) break;
    }
    return fx;
}

Eigen::MatrixXd logits_with_zero(const Eigen::MatrixXd& X, const Eigen::MatrixXd& alpha_free) {
    Eigen::MatrixXd L(X.rows(), alpha_free.cols() + 1);
    Eigen::VectorXd col;
    for (Eigen::Index j = 0; j < alpha_free.cols(); ++j) {
        linalg::gemv(X, alpha_free.col(j), col);
        L.col(j) = col;
    }
    L.col(alpha_free.cols()).setZero();
    return L;
}

// Golden-section/Brent search on [lo, hi] after a coarse grid scan, maximizing f.
template <class F>
double maximize_1d(F f, double lo, double hi, int grid) {
    double best_u = lo, best_f = kNegInf;
    const double h = (hi - lo) / grid;
    for (int k = 0; k <= grid; ++k) {
        const double u = lo + h * k;
        const double v = f(u);
        if (std::isfinite(v) && v > best_f) {
            best_f = v;
            best_u = u;
        }
    }
    const double a = std::max(lo, best_u - h), b = std::min(hi, best_u + h);
    auto r = boost::math::tools::brent_find_minima([&](double u) {
        const double v = f(u);
        return std::isfinite(v) ? -v : std::numeric_limits<double>::max();
    }, a, b, 50);
    return -r.second >= best_f ? r.first : best_u;
}

}  // namespace

// ---------------------------------------------------------------------------

MixingObjective::MixingObjective(const Eigen::MatrixXd& X, const Eigen::MatrixXd& z, Majorizer maj)
    : X_(X), z_(z), maj_(std::move(maj)) {}

Eigen::MatrixXd MixingObjective::log_pi(const Eigen::MatrixXd& alpha_free) const {
    Eigen::MatrixXd L = logits_with_zero(X_, alpha_free);
    for (Eigen::Index i = 0; i < L.rows(); ++i) {
        const double m = L.row(i).maxCoeff();
        L.row(i).array() -= m + std::log((L.row(i).array() - m).exp().sum());
    }
    return L;
}

double MixingObjective::loglik(const Eigen::MatrixXd& alpha_free) const {
    const Eigen::MatrixXd L = log_pi(alpha_free);
    double s = 0.0;
    for (Eigen::Index j = 0; j < L.cols(); ++j)
        for (Eigen::Index i = 0; i < L.rows(); ++i)
            if (z_(i, j) != 0.0) s += z_(i, j) * L(i, j);
    return s;
}

double MixingObjective::value(const Eigen::MatrixXd& alpha_free) const {
    return loglik(alpha_free) - maj_.value(alpha_free);
}

Eigen::VectorXd MixingObjective::gradient(const Eigen::MatrixXd& alpha_free, int j) const {
    const Eigen::VectorXd pi = log_pi(alpha_free).col(j).array().exp();
    Eigen::VectorXd g = linalg::xt_vec(X_, z_.col(j) - pi);
    if (maj_.M.size()) g -= maj_.M * alpha_free.col(j);
    return g;
}

Eigen::MatrixXd MixingObjective::hessian(const Eigen::MatrixXd& alpha_free, int j) const {
    const Eigen::VectorXd pi = log_pi(alpha_free).col(j).array().exp();
    const Eigen::VectorXd w = pi.array() * (1.0 - pi.array());
    Eigen::MatrixXd H = -linalg::weighted_gram(X_, w);
    if (maj_.M.size()) H -= maj_.M;
    return H;
}

// ---------------------------------------------------------------------------

BodyObjective::BodyObjective(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, const LatentState& latent,
                             Majorizer maj)
    : X_(X), maj_(std::move(maj)) {
    const Eigen::Index n = X.rows();
    const auto g = latent.k.cols();
    stats_.resize(static_cast<std::size_t>(g));
    const Eigen::ArrayXd logy = y.array().log();
    for (Eigen::Index j = 0; j < g; ++j) {
        Stats& s = stats_[static_cast<std::size_t>(j)];
        const Eigen::ArrayXd z = latent.z.col(j).array();
        const Eigen::ArrayXd k = latent.k.col(j).array();
        s.W = (z * (1.0 + k)).matrix();
        s.R = (z * (y.array() + k * latent.y_above.col(j).array())).matrix();
        s.L = Eigen::VectorXd::Zero(n);
        for (Eigen::Index i = 0; i < n; ++i)
            if (z(i) != 0.0) s.L(i) = z(i) * (logy(i) + k(i) * latent.logy_above(i, j));
        s.log_y_const = -(z * logy).sum();
    }
}

double BodyObjective::component_loglik(const Eigen::VectorXd& beta_j, double phi_j, int j) const {
    const Stats& s = stats_[static_cast<std::size_t>(j)];
    const Eigen::VectorXd eta = linalg::gemv(X_, beta_j);
    const double a = 1.0 / phi_j;
    const double log_phi = std::log(phi_j);
    const double lg = boost::math::lgamma(a);
    double acc = 0.0, wsum = 0.0;
    for (Eigen::Index i = 0; i < eta.size(); ++i) {
        if (s.W(i) == 0.0) continue;
        acc += s.L(i) - s.W(i) * eta(i) - s.R(i) * std::exp(-eta(i));
        wsum += s.W(i);
    }
    return a * (acc - wsum * log_phi) - wsum * lg + s.log_y_const;
}

double BodyObjective::loglik(const Eigen::MatrixXd& beta, const Eigen::VectorXd& phi) const {
    double s = 0.0;
    for (Eigen::Index j = 0; j < beta.cols(); ++j) s += component_loglik(beta.col(j), phi(j), static_cast<int>(j));
    return s;
}

double BodyObjective::value(const Eigen::MatrixXd& beta, const Eigen::VectorXd& phi) const {
    return loglik(beta, phi) - maj_.value(beta);
}

Eigen::VectorXd BodyObjective::gradient(const Eigen::MatrixXd& beta, const Eigen::VectorXd& phi, int j) const {
    const Stats& s = stats_[static_cast<std::size_t>(j)];
    const Eigen::VectorXd eta = linalg::gemv(X_, beta.col(j));
    const Eigen::VectorXd r = (s.R.array() * (-eta.array()).exp() - s.W.array()).matrix();
    Eigen::VectorXd g = linalg::xt_vec(X_, r) / phi(j);
    if (maj_.M.size()) g -= maj_.M * beta.col(j);
    return g;
}

Eigen::MatrixXd BodyObjective::hessian(const Eigen::MatrixXd& beta, const Eigen::VectorXd& phi, int j) const {
    const Stats& s = stats_[static_cast<std::size_t>(j)];
    const Eigen::VectorXd eta = linalg::gemv(X_, beta.col(j));
    const Eigen::VectorXd w = (s.R.array() * (-eta.array()).exp()).matrix();
    Eigen::MatrixXd H = -linalg::weighted_gram(X_, w) / phi(j);
    if (maj_.M.size()) H -= maj_.M;
    return H;
}

double BodyObjective::best_phi(const Eigen::VectorXd& beta_j, int j, double phi_prev) const {
    const Stats& s = stats_[static_cast<std::size_t>(j)];
    const Eigen::VectorXd eta = linalg::gemv(X_, beta_j);
    double A = 0.0, W = 0.0;
    for (Eigen::Index i = 0; i < eta.size(); ++i) {
        if (s.W(i) == 0.0) continue;
        A += s.L(i) - s.W(i) * eta(i) - s.R(i) * std::exp(-eta(i));
        W += s.W(i);
    }
    if (!(W > 0.0)) return phi_prev;
    auto f = [&](double u) {
        const double phi = std::exp(u);
        return (A - W * u) / phi - W * boost::math::lgamma(1.0 / phi);
    };
    const double u0 = std::log(phi_prev);
    const double u = maximize_1d(f, std::log(1e-6), std::log(1e3), 24);
    return f(u) >= f(u0) ? std::exp(u) : phi_prev;
}

// ---------------------------------------------------------------------------

TailObjective::TailObjective(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, double tau, Majorizer maj)
    : tau_(tau), maj_(std::move(maj)) {
    Eigen::Index nt = 0;
    for (Eigen::Index i = 0; i < y.size(); ++i) nt += y(i) > tau ? 1 : 0;
    Xt_.resize(nt, X.cols());
    yt_.resize(nt);
    Eigen::Index r = 0;
    for (Eigen::Index i = 0; i < y.size(); ++i) {
        if (!(y(i) > tau)) continue;
        Xt_.row(r) = X.row(i);
        yt_(r) = y(i);
        ++r;
    }
}

double TailObjective::loglik(double theta, const Eigen::VectorXd& nu) const {
    if (!(theta > 0.0)) return kNegInf;
    const Eigen::VectorXd lin = linalg::gemv(Xt_, nu);
    const double lt = std::log(tau_ + theta);
    double s = 0.0;
    for (Eigen::Index i = 0; i < yt_.size(); ++i) {
        const double eta = std::exp(lin(i));
        s += lin(i) + eta * lt - (eta + 1.0) * std::log(yt_(i) + theta);
    }
    return s;
}

double TailObjective::value(double theta, const Eigen::VectorXd& nu) const {
    return loglik(theta, nu) - maj_.value(nu);
}

Eigen::VectorXd TailObjective::gradient(double theta, const Eigen::VectorXd& nu) const {
    const Eigen::VectorXd lin = linalg::gemv(Xt_, nu);
    const double lt = std::log(tau_ + theta);
    Eigen::VectorXd r(yt_.size());
    for (Eigen::Index i = 0; i < yt_.size(); ++i)
        r(i) = 1.0 - std::exp(lin(i)) * (std::log(yt_(i) + theta) - lt);
    Eigen::VectorXd g = linalg::xt_vec(Xt_, r);
    if (maj_.M.size()) g -= maj_.M * nu;
    return g;
}

Eigen::MatrixXd TailObjective::hessian(double theta, const Eigen::VectorXd& nu) const {
    const Eigen::VectorXd lin = linalg::gemv(Xt_, nu);
    const double lt = std::log(tau_ + theta);
    Eigen::VectorXd w(yt_.size());
    for (Eigen::Index i = 0; i < yt_.size(); ++i) w(i) = std::exp(lin(i)) * (std::log(yt_(i) + theta) - lt);
    Eigen::MatrixXd H = -linalg::weighted_gram(Xt_, w);
    if (maj_.M.size()) H -= maj_.M;
    return H;
}

double TailObjective::best_theta(const Eigen::VectorXd& nu, double theta_prev) const {
    if (yt_.size() == 0) return theta_prev;
    const Eigen::VectorXd eta = linalg::gemv(Xt_, nu).array().exp().matrix();
    auto f = [&](double u) {
        const double theta = std::exp(u);
        const double lt = std::log(tau_ + theta);
        double s = 0.0;
        for (Eigen::Index i = 0; i < yt_.size(); ++i) s += eta(i) * lt - (eta(i) + 1.0) * std::log(yt_(i) + theta);
        return s;
    };
    const double u0 = std::log(theta_prev);
    const double u = maximize_1d(f, std::log(1e-6 * tau_), std::log(1e3 * tau_), 40);
    return f(u) >= f(u0) ? std::exp(u) : theta_prev;
}

// ---------------------------------------------------------------------------

Eigen::MatrixXd m_step_alpha(const LatentState& latent, const Dataset& data, const PenaltyPlan& plan,
                             const Eigen::MatrixXd& alpha_prev, const NewtonOptions& opt) {
    Majorizer maj = plan.active() ? build_majorizer(alpha_prev, plan) : Majorizer{};
    MixingObjective S(data.mix().X, latent.z, std::move(maj));
    Eigen::MatrixXd alpha = alpha_prev;
    for (Eigen::Index j = 0; j < alpha.cols(); ++j) {
        Eigen::VectorXd x = alpha.col(j);
        auto with = [&](const Eigen::VectorXd& v) {
            Eigen::MatrixXd a = alpha;
            a.col(j) = v;
            return a;
        };
        newton_ascent(
            x, [&](const Eigen::VectorXd& v) { return S.value(with(v)); },
            [&](const Eigen::VectorXd& v) { return S.gradient(with(v), static_cast<int>(j)); },
            [&](const Eigen::VectorXd& v) { return S.hessian(with(v), static_cast<int>(j)); }, opt);
        alpha.col(j) = x;
    }
    return alpha;
}

Eigen::MatrixXd m_step_beta(const LatentState& latent, const Dataset& data, const PenaltyPlan& plan,
                            const Eigen::MatrixXd& beta_prev, const Eigen::VectorXd& phi, const NewtonOptions& opt) {
    Majorizer maj = plan.active() ? build_majorizer(beta_prev, plan) : Majorizer{};
    BodyObjective T(data.body().X, data.y(), latent, std::move(maj));
    Eigen::MatrixXd beta = beta_prev;
    for (Eigen::Index j = 0; j < beta.cols(); ++j) {
        const int jj = static_cast<int>(j);
        Eigen::VectorXd x = beta.col(j);
        // Only component j's loglik and penalty term vary with beta_j.
        auto value = [&](const Eigen::VectorXd& v) {
            const double pen = T.majorizer().M.size() ? 0.5 * v.dot(T.majorizer().M * v) : 0.0;
            return T.component_loglik(v, phi(j), jj) - pen;
        };
        auto with = [&](const Eigen::VectorXd& v) {
            Eigen::MatrixXd b = beta;
            b.col(j) = v;
            return b;
        };
        newton_ascent(
            x, value, [&](const Eigen::VectorXd& v) { return T.gradient(with(v), phi, jj); },
            [&](const Eigen::VectorXd& v) { return T.hessian(with(v), phi, jj); }, opt);
        beta.col(j) = x;
    }
    return beta;
}

Eigen::VectorXd m_step_phi(const Eigen::MatrixXd& beta_new, const LatentState& latent, const Dataset& data,
                           const Eigen::VectorXd& phi_prev) {
    BodyObjective T(data.body().X, data.y(), latent, Majorizer{});
    Eigen::VectorXd phi = phi_prev;
    for (Eigen::Index j = 0; j < phi.size(); ++j)
        phi(j) = T.best_phi(beta_new.col(j), static_cast<int>(j), phi_prev(j));
    return phi;
}

Eigen::VectorXd m_step_nu(const Dataset& data, const PenaltyPlan& plan, const Eigen::VectorXd& nu_prev, double theta,
                          const NewtonOptions& opt) {
    if (data.n_t() == 0) return nu_prev;
    Majorizer maj = plan.active() ? build_majorizer(Eigen::MatrixXd(nu_prev), plan) : Majorizer{};
    TailObjective V(data.tail().X, data.y(), data.tau(), std::move(maj));
    Eigen::VectorXd x = nu_prev;
    newton_ascent(
        x, [&](const Eigen::VectorXd& v) { return V.value(theta, v); },
        [&](const Eigen::VectorXd& v) { return V.gradient(theta, v); },
        [&](const Eigen::VectorXd& v) { return V.hessian(theta, v); }, opt);
    return x;
}

double m_step_theta(const Eigen::VectorXd& nu_new, const Dataset& data, double theta_prev) {
    if (data.n_t() == 0) return theta_prev;
    TailObjective V(data.tail().X, data.y(), data.tau(), Majorizer{});
    return V.best_theta(nu_new, theta_prev);
}

ParamSet m_step(const ParamSet& p, const LatentState& latent, const Dataset& data, const PenaltySet& plans,
                const NewtonOptions& opt, std::vector<std::string>* warnings) {
    ParamSet out = p;
    out.alpha_free() = m_step_alpha(latent, data, plans.mixing, p.alpha_free(), opt);
    out.beta() = m_step_beta(latent, data, plans.body, p.beta(), p.phi(), opt);
    out.phi() = m_step_phi(out.beta(), latent, data, p.phi());
    if (data.n_t() == 0) {
        if (warnings) warnings->push_back("no tail observations; tail update skipped");
        return out;
    }
    out.nu() = m_step_nu(data, plans.tail, p.nu(), p.theta(), opt);
    out.set_theta(m_step_theta(out.nu(), data, p.theta()));
    return out;
}

}  // namespace mcreg
