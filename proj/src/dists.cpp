#include "mcreg/dists.hpp"

#include "mcreg/quadrature.hpp"

#include <boost/math/special_functions/gamma.hpp>

#include <cmath>
#include <limits>
#include <string>

namespace mcreg {

namespace bm = boost::math;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void check_gamma(GammaMD d) {
    if (!(d.mu > 0.0) || !std::isfinite(d.mu)) throw DomainError("Gamma mean must be positive");
    if (!(d.phi > 0.0) || !std::isfinite(d.phi)) throw DomainError("Gamma dispersion must be positive");
}

void check_lomax(Lomax L) {
    if (!(L.theta > 0.0) || !std::isfinite(L.theta)) throw DomainError("Lomax scale must be positive");
    if (!(L.eta > 0.0) || !std::isfinite(L.eta)) throw DomainError("Lomax index must be positive");
}

// Q(a,x) / (x^(a-1) e^-x / Gamma(a)) by modified Lentz; valid for x > a - 1.
double upper_ratio_cf(double a, double x) {
    constexpr double tiny = 1e-300;
    double b = x + 1.0 - a;
    double c = 1.0 / tiny;
    double d = 1.0 / b;
    double h = d;
    for (int i = 1; i < 10000; ++i) {
        const double an = -i * (i - a);
        b += 2.0;
        d = an * d + b;
        if (std::abs(d) < tiny) d = tiny;
        c = b + an / c;
        if (std::abs(c) < tiny) c = tiny;
        d = 1.0 / d;
        const double del = d * c;
        h *= del;
        if (std::abs(del - 1.0) < 1e-16) break;
    }
    return x * h;
}

double log_gamma_kernel(double a, double x) {
    // log(x^(a-1) e^-x / Gamma(a))
    return (a - 1.0) * std::log(x) - x - bm::lgamma(a);
}

double logsumexp(const double* v, Eigen::Index n) {
    double m = -kInf;
    for (Eigen::Index i = 0; i < n; ++i) m = std::max(m, v[i]);
    if (!std::isfinite(m)) return m;
    double s = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) s += std::exp(v[i] - m);
    return m + std::log(s);
}

}  // namespace

namespace detail {

double gamma_logpdf_raw(double y, double mu, double phi) {
    const double a = 1.0 / phi;
    const double x = y / (phi * mu);
    return a * std::log(x) - x - std::log(y) - bm::lgamma(a);
}

double log_gamma_p(double a, double t) {
    if (t <= 0.0) return -kInf;
    const double p = bm::gamma_p(a, t);
    if (p > 1e-280) return std::log(p);
    // series: P(a,t) = t^a e^-t / Gamma(a+1) * sum_k t^k / ((a+1)...(a+k))
    double term = 1.0, sum = 1.0;
    for (int k = 1; k < 100000; ++k) {
        term *= t / (a + k);
        sum += term;
        if (term < sum * 1e-17) break;
    }
    return a * std::log(t) - t - bm::lgamma(a + 1.0) + std::log(sum);
}

double log_gamma_q(double a, double t) {
    if (t <= 0.0) return 0.0;
    const double q = bm::gamma_q(a, t);
    if (q > 1e-280) return std::log(q);
    return log_gamma_kernel(a, t) + std::log(upper_ratio_cf(a, t));
}

double upper_mean(double a, double t) {
    if (t <= 0.0) return a;
    // E[U | U > t] = a + t^a e^-t / (Gamma(a) Q(a,t))
    if (t > a + 1.0) return a + t / upper_ratio_cf(a, t);
    const double q = bm::gamma_q(a, t);
    return a + t * bm::gamma_p_derivative(a, t) / q;
}

double upper_mean_log(double a, double t) {
    if (t <= 0.0) return bm::digamma(a);
    // u = e^s; integrand e^{a s - e^s} on s > log t, shifted by its value at s_ref
    const double s0 = std::log(t);
    const double s_peak = std::log(a);
    const double s_ref = std::max(s0, s_peak);
    const double e_ref = std::exp(s_ref);
    const double f_ref = a * s_ref - e_ref;
    const double slope = std::abs(a - e_ref);
    const double w = std::min(1.0 / std::sqrt(e_ref), slope > 0.0 ? 1.0 / slope : kInf);

    auto rel = [&](double s) { return a * s - std::exp(s) - f_ref; };
    std::vector<double> breaks;
    double lo = s0;
    if (s0 < s_ref) {
        double step = w;
        double s = s_ref - step;
        while (s > s0 && rel(s) > -60.0) {
            step *= 2.0;
            s = s_ref - step;
        }
        lo = std::max(s0, s);
    }
    double step = w;
    double hi = s_ref + step;
    while (rel(hi) > -60.0) {
        step *= 2.0;
        hi = s_ref + step;
    }
    breaks.push_back(lo);
    for (double k = 1.0; s_ref - k * w > lo; k *= 2.0) breaks.insert(breaks.begin() + 1, s_ref - k * w);
    if (s_ref > lo) breaks.push_back(s_ref);
    for (double k = 1.0; s_ref + k * w < hi; k *= 2.0) breaks.push_back(s_ref + k * w);
    breaks.push_back(hi);

    auto f = [&](double s) {
        const double e = std::exp(rel(s));
        return quad::Pair{e, (s - s_ref) * e};
    };
    quad::Pair r = quad::integrate_pair(f, breaks, 1e-11, w);
    return s_ref + r.v1 / r.v0;
}

double sample_upper(double a, double t, Rng& rng) {
    const double u = uniform01(rng);
    const double q = bm::gamma_q(a, t);
    if (q > 1e-250) {
        double x = bm::gamma_q_inv(a, u * q);
        return std::max(x, t);
    }
    // deep tail: U - t is close to exponential with rate 1 - (a-1)/t
    const double rate = std::max(1.0 - (a - 1.0) / t, 1e-3);
    return t - std::log(u) / rate;
}

}  // namespace detail

double gamma_logpdf(double y, GammaMD d) {
    check_gamma(d);
    if (!(y > 0.0)) throw DomainError("Gamma density needs y > 0");
    return detail::gamma_logpdf_raw(y, d.mu, d.phi);
}

double gamma_cdf(double y, GammaMD d) {
    check_gamma(d);
    if (!(y >= 0.0)) throw DomainError("Gamma CDF needs y >= 0");
    if (y == 0.0) return 0.0;
    if (std::isinf(y)) return 1.0;
    return bm::gamma_p(d.shape(), y / d.scale());
}

double gamma_sf(double y, GammaMD d) {
    check_gamma(d);
    if (!(y >= 0.0)) throw DomainError("Gamma CDF needs y >= 0");
    if (y == 0.0) return 1.0;
    if (std::isinf(y)) return 0.0;
    return bm::gamma_q(d.shape(), y / d.scale());
}

double gamma_cdf_shifted_shape(double y, GammaMD d) {
    check_gamma(d);
    if (!(y >= 0.0)) throw DomainError("Gamma CDF needs y >= 0");
    if (y == 0.0) return 0.0;
    if (std::isinf(y)) return 1.0;
    return bm::gamma_p(d.shape() + 1.0, y / d.scale());
}

double trunc_gamma_mean_below(GammaMD d, double tau) {
    check_gamma(d);
    if (!(tau > 0.0)) throw DomainError("threshold must be positive");
    const double a = d.shape(), t = tau / d.scale();
    const double F = bm::gamma_p(a, t);
    if (F < kMinConditioningProb) throw DegenerateTruncation("Gamma mass below threshold is numerically zero");
    // P(a+1,t) = P(a,t) - t^a e^-t / Gamma(a+1)
    const double ratio = 1.0 - t * bm::gamma_p_derivative(a, t) / (a * F);
    return d.mu * ratio;
}

double trunc_gamma_mean_above(GammaMD d, double tau) {
    check_gamma(d);
    if (!(tau > 0.0)) throw DomainError("threshold must be positive");
    const double a = d.shape(), t = tau / d.scale();
    const double Q = bm::gamma_q(a, t);
    if (Q < kMinConditioningProb) throw DegenerateTruncation("Gamma mass above threshold is numerically zero");
    return d.scale() * detail::upper_mean(a, t);
}

double trunc_gamma_mean_log_above(GammaMD d, double tau) {
    check_gamma(d);
    if (!(tau > 0.0)) throw DomainError("threshold must be positive");
    const double a = d.shape(), t = tau / d.scale();
    if (bm::gamma_q(a, t) < kMinConditioningProb)
        throw DegenerateTruncation("Gamma mass above threshold is numerically zero");
    return std::log(d.scale()) + detail::upper_mean_log(a, t);
}

double lomax_logpdf(double y, Lomax L) {
    check_lomax(L);
    if (!(y >= 0.0)) throw DomainError("Lomax density needs y >= 0");
    return std::log(L.eta) + L.eta * std::log(L.theta) - (L.eta + 1.0) * std::log(y + L.theta);
}

double lomax_cdf(double y, Lomax L) {
    check_lomax(L);
    if (!(y >= 0.0)) throw DomainError("Lomax CDF needs y >= 0");
    return -std::expm1(L.eta * std::log(L.theta / (y + L.theta)));
}

double lomax_sf(double y, Lomax L) {
    check_lomax(L);
    if (!(y >= 0.0)) throw DomainError("Lomax CDF needs y >= 0");
    return std::exp(L.eta * std::log(L.theta / (y + L.theta)));
}

double trunc_lomax_logpdf(double y, Lomax L, double tau) {
    check_lomax(L);
    if (!(y > tau)) throw DomainError("truncated Lomax density needs y > tau");
    return std::log(L.eta) + L.eta * std::log(tau + L.theta) - (L.eta + 1.0) * std::log(y + L.theta);
}

Eigen::VectorXd mixing_log_probs(const Eigen::VectorXd& logits) {
    const double lse = logsumexp(logits.data(), logits.size());
    return logits.array() - lse;
}

Eigen::VectorXd mixing_probs(const Eigen::VectorXd& x, const Eigen::MatrixXd& alpha) {
    Eigen::VectorXd logits = alpha.transpose() * x;
    return mixing_log_probs(logits).array().exp();
}

RowModel row_model(const ParamSet& p, const Eigen::Ref<const Eigen::VectorXd>& x_mix,
                   const Eigen::Ref<const Eigen::VectorXd>& x_body, const Eigen::Ref<const Eigen::VectorXd>& x_tail) {
    RowModel m;
    Eigen::VectorXd logits = p.alpha().transpose() * x_mix;
    m.log_pi = mixing_log_probs(logits);
    m.mu = (p.beta().transpose() * x_body).array().exp();
    m.eta = std::exp(p.nu().dot(x_tail));
    return m;
}

RowModel row_model(const ParamSet& p, const Eigen::Ref<const Eigen::VectorXd>& x) { return row_model(p, x, x, x); }

RowModel row_model(const ParamSet& p, const Dataset& data, Eigen::Index i) {
    return row_model(p, data.mix().X.row(i).transpose(), data.body().X.row(i).transpose(),
                     data.tail().X.row(i).transpose());
}

double composite_logpdf(double y, const RowModel& m, const ParamSet& p) {
    if (!(y > 0.0)) throw DomainError("composite density needs y > 0");
    const int g = p.g();
    const double tau = p.tau();
    if (y > tau) return m.log_pi(g) + trunc_lomax_logpdf(y, {p.theta(), m.eta}, tau);
    Eigen::VectorXd terms(g);
    for (int j = 0; j < g; ++j) {
        GammaMD d{m.mu(j), p.phi()(j)};
        const double F = gamma_cdf(tau, d);
        if (F < kMinConditioningProb)
            throw DegenerateTruncation("component " + std::to_string(j + 1) + " has no mass below the threshold");
        terms(j) = m.log_pi(j) + gamma_logpdf(y, d) - std::log(F);
    }
    return logsumexp(terms.data(), g);
}

double composite_cdf(double y, const RowModel& m, const ParamSet& p) {
    if (!(y >= 0.0)) throw DomainError("composite CDF needs y >= 0");
    const int g = p.g();
    const double tau = p.tau();
    if (y > tau) {
        double body = 0.0;
        for (int j = 0; j < g; ++j) body += std::exp(m.log_pi(j));
        const double surv = std::exp(m.eta * std::log((tau + p.theta()) / (y + p.theta())));
        return body + std::exp(m.log_pi(g)) * (1.0 - surv);
    }
    double s = 0.0;
    for (int j = 0; j < g; ++j) {
        GammaMD d{m.mu(j), p.phi()(j)};
        const double F = gamma_cdf(tau, d);
        if (F < kMinConditioningProb)
            throw DegenerateTruncation("component " + std::to_string(j + 1) + " has no mass below the threshold");
        s += std::exp(m.log_pi(j)) * gamma_cdf(y, d) / F;
    }
    return s;
}

double composite_mean(const RowModel& m, const ParamSet& p) {
    const int g = p.g();
    const double tau = p.tau();
    double s = 0.0;
    for (int j = 0; j < g; ++j) s += std::exp(m.log_pi(j)) * trunc_gamma_mean_below({m.mu(j), p.phi()(j)}, tau);
    const double pt = std::exp(m.log_pi(g));
    if (pt > 0.0) {
        if (m.eta <= 1.0) return kInf;
        s += pt * ((p.theta() + tau) / (m.eta - 1.0) + tau);
    }
    return s;
}

double composite_logpdf(double y, const Eigen::VectorXd& x, const ParamSet& p) {
    return composite_logpdf(y, row_model(p, x), p);
}

double composite_cdf(double y, const Eigen::VectorXd& x, const ParamSet& p) {
    return composite_cdf(y, row_model(p, x), p);
}

double composite_mean(const Eigen::VectorXd& x, const ParamSet& p) { return composite_mean(row_model(p, x), p); }

double sample_trunc_gamma_below(GammaMD d, double tau, Rng& rng) {
    check_gamma(d);
    const double a = d.shape(), s = d.scale();
    const double F = bm::gamma_p(a, tau / s);
    if (F < kMinConditioningProb) throw DegenerateTruncation("Gamma mass below threshold is numerically zero");
    const double x = bm::gamma_p_inv(a, uniform01(rng) * F) * s;
    return std::min(x, tau);
}

double sample_trunc_gamma_above(GammaMD d, double tau, Rng& rng) {
    check_gamma(d);
    const double a = d.shape(), s = d.scale();
    const double Q = bm::gamma_q(a, tau / s);
    if (Q < kMinConditioningProb) throw DegenerateTruncation("Gamma mass above threshold is numerically zero");
    double x = bm::gamma_q_inv(a, uniform01(rng) * Q) * s;
    if (!(x > tau)) x = std::nextafter(tau, kInf);
    return x;
}

double sample_trunc_lomax_above(Lomax L, double tau, Rng& rng) {
    check_lomax(L);
    const double v = uniform01(rng);
    double y = (tau + L.theta) * std::exp(-std::log(v) / L.eta) - L.theta;
    if (!(y > tau)) y = std::nextafter(tau, kInf);
    return y;
}

double sample_composite(const RowModel& m, const ParamSet& p, Rng& rng) {
    const int g = p.g();
    const double u = uniform01(rng);
    double c = 0.0;
    int comp = g;
    for (int j = 0; j < g; ++j) {
        c += std::exp(m.log_pi(j));
        if (u < c) {
            comp = j;
            break;
        }
    }
    if (comp == g) return sample_trunc_lomax_above({p.theta(), m.eta}, p.tau(), rng);
    return sample_trunc_gamma_below({m.mu(comp), p.phi()(comp)}, p.tau(), rng);
}

double sample_composite(const Eigen::VectorXd& x, const ParamSet& p, std::uint64_t seed) {
    Rng rng(seed);
    return sample_composite(row_model(p, x), p, rng);
}

}  // namespace mcreg
