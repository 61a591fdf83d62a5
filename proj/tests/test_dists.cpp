#include "oracles.hpp"

#include "mcreg/diagnostics.hpp"
#include "mcreg/dists.hpp"

#include <doctest.h>

#include <algorithm>

using namespace mcreg;

namespace {

GammaMD random_gamma(Rng& rng) {
    return {std::exp(2.0 * uniform01(rng) - 0.5), 0.05 + 1.5 * uniform01(rng)};
}

}  // namespace

TEST_CASE("gamma cdf matches the integrated density") {
    Rng rng = make_rng(1, "gamma-cdf");
    for (int k = 0; k < 20; ++k) {
        const GammaMD d = random_gamma(rng);
        const double y = d.mu * (0.3 + 2.0 * uniform01(rng));
        const double ref = oracle::integrate_from_zero([&](double t) { return std::exp(gamma_logpdf(t, d)); }, y, 1e-14);
        CHECK(std::abs(gamma_cdf(y, d) - ref) < 1e-9);
        CHECK(std::abs(gamma_cdf(y, d) + gamma_sf(y, d) - 1.0) < 1e-14);
    }
}

TEST_CASE("shifted-shape cdf is the size-biased distribution function") {
    Rng rng = make_rng(2, "shift");
    for (int k = 0; k < 10; ++k) {
        const GammaMD d = random_gamma(rng);
        const double y = d.mu * (0.5 + uniform01(rng));
        const double ref =
            oracle::integrate_from_zero([&](double t) { return t * std::exp(gamma_logpdf(t, d)); }, y, 1e-14) / d.mu;
        CHECK(std::abs(gamma_cdf_shifted_shape(y, d) - ref) < 1e-9);
    }
}

TEST_CASE("truncated gamma moments match quadrature") {
    Rng rng = make_rng(3, "trunc");
    for (int k = 0; k < 50; ++k) {
        const GammaMD d = random_gamma(rng);
        const double tau = d.mu * (0.4 + 2.0 * uniform01(rng));
        auto f = [&](double t) { return std::exp(gamma_logpdf(t, d)); };
        const double F = oracle::integrate_from_zero(f, tau, 1e-15);
        const double below = oracle::integrate_from_zero([&](double t) { return t * f(t); }, tau, 1e-15) / F;
        const double S = 1.0 - F;
        const double above = (d.mu - below * F) / S;
        CHECK(std::abs(trunc_gamma_mean_below(d, tau) - below) < 1e-8 * std::max(1.0, below));
        CHECK(std::abs(trunc_gamma_mean_above(d, tau) - above) < 1e-8 * std::max(1.0, above));
        const double logabove =
            oracle::integrate([&](double t) { return std::log(t) * f(t); }, tau, std::numeric_limits<double>::infinity()) / S;
        CHECK(std::abs(trunc_gamma_mean_log_above(d, tau) - logabove) < 1e-7);
    }
}

TEST_CASE("exponential case is memoryless") {
    for (double mu : {0.5, 1.0, 3.0})
        for (double tau : {0.1, 1.0, 7.0}) {
            const GammaMD d{mu, 1.0};
            CHECK(std::abs(trunc_gamma_mean_above(d, tau) - (tau + mu)) < 1e-10);
            const double F = 1.0 - std::exp(-tau / mu);
            const double below = mu - tau * std::exp(-tau / mu) / F;
            CHECK(std::abs(trunc_gamma_mean_below(d, tau) - below) < 1e-10);
        }
}

TEST_CASE("degenerate truncation is reported") {
    CHECK_THROWS_AS(trunc_gamma_mean_below({1000.0, 0.001}, 1.0), DegenerateTruncation);
    CHECK_THROWS_AS(trunc_gamma_mean_above({0.01, 0.001}, 10.0), DegenerateTruncation);
    CHECK_THROWS_AS(gamma_logpdf(1.0, {-1.0, 1.0}), DomainError);
}

TEST_CASE("lomax density, cdf and truncated density") {
    const Lomax L{2.0, 1.7};
    const double ref = oracle::integrate([&](double t) { return std::exp(lomax_logpdf(t, L)); }, 0.0, 3.0);
    CHECK(std::abs(lomax_cdf(3.0, L) - ref) < 1e-12);
    CHECK(std::abs(lomax_sf(3.0, L) - std::pow(2.0 / 5.0, 1.7)) < 1e-14);
    const double tail_mass = oracle::integrate([&](double t) { return std::exp(trunc_lomax_logpdf(t, L, 4.0)); }, 4.0,
                                               std::numeric_limits<double>::infinity());
    CHECK(std::abs(tail_mass - 1.0) < 1e-9);
    CHECK_THROWS(trunc_lomax_logpdf(3.0, L, 4.0));
}

TEST_CASE("composite density integrates to one and its mean matches") {
    Rng rng = make_rng(4, "composite");
    const auto schema = oracle::mixed_schema();
    const DesignMatrix X = oracle::random_design(schema, 10, 5);
    for (int k = 0; k < 10; ++k) {
        const double tau = 5.0 + 10.0 * uniform01(rng);
        ParamSet p = oracle::random_params(2, 6, tau, rng);
        p.nu()(0) = std::log(2.5 + uniform01(rng));  // finite mean
        const Eigen::VectorXd x = X.X.row(k).transpose();
        const RowModel m = row_model(p, x);
        auto f = [&](double y) { return std::exp(composite_logpdf(y, m, p)); };
        const double mass = oracle::integrate_from_zero(f, tau) +
                            oracle::integrate(f, tau, std::numeric_limits<double>::infinity());
        CHECK(std::abs(mass - 1.0) < 1e-6);
        auto g = [&](double y) { return y * f(y); };
        const double mean =
            oracle::integrate_from_zero(g, tau) + oracle::integrate(g, tau, std::numeric_limits<double>::infinity());
        CHECK(oracle::rel_err(composite_mean(m, p), mean) < 1e-4);
        CHECK(std::abs(composite_cdf(tau, m, p) - (1.0 - std::exp(m.log_pi(2)))) < 1e-12);
    }
}

TEST_CASE("mean is infinite for eta <= 1 with tail mass") {
    ParamSet p(1, 1, 1, 1, 2.0);
    p.nu()(0) = std::log(0.9);
    Eigen::VectorXd x(1);
    x << 1.0;
    CHECK(std::isinf(composite_mean(x, p)));
}

TEST_CASE("mixing probabilities are a softmax with a pinned last column") {
    Eigen::MatrixXd alpha(2, 3);
    alpha << 0.3, -0.2, 0.0, 1.0, 0.5, 0.0;
    Eigen::VectorXd x(2);
    x << 1.0, 0.7;
    const Eigen::VectorXd pi = mixing_probs(x, alpha);
    CHECK(std::abs(pi.sum() - 1.0) < 1e-15);
    CHECK(std::abs(std::log(pi(0) / pi(2)) - (0.3 + 0.7)) < 1e-12);
    Eigen::VectorXd big(2);
    big << 1000.0, 0.0;
    CHECK(mixing_log_probs(big).allFinite());
}

TEST_CASE("composite sampler respects the support and matches the cdf") {
    Rng prng = make_rng(6, "sampler-params");
    const ParamSet p = oracle::random_params(2, 1, 10.0, prng, 0.0);
    Eigen::VectorXd x(1);
    x << 1.0;
    const RowModel m = row_model(p, x);
    Rng rng = make_rng(7, "sampler");
    std::vector<double> y(100000);
    for (auto& v : y) v = sample_composite(m, p, rng);
    const double ks = ks_statistic(y, [&](double t) { return composite_cdf(t, m, p); });
    CHECK(ks < 0.006);
    for (int k = 0; k < 2000; ++k) {
        CHECK(sample_trunc_gamma_below({8.0, 0.3}, 10.0, rng) <= 10.0);
        CHECK(sample_trunc_gamma_above({8.0, 0.3}, 10.0, rng) > 10.0);
        CHECK(sample_trunc_lomax_above({3.0, 1.2}, 10.0, rng) > 10.0);
    }
}

TEST_CASE("deep truncation: public sampler refuses, internal sampler falls back") {
    Rng rng = make_rng(8, "deep");
    CHECK_THROWS_AS(sample_trunc_gamma_above({1.0, 0.01}, 3.0, rng), DegenerateTruncation);
    for (int k = 0; k < 100; ++k) {
        const double v = detail::sample_upper(100.0, 300.0, rng);
        CHECK(v > 300.0);
        CHECK(std::isfinite(v));
    }
}
