#include "oracles.hpp"

#include "mcreg/benchmarks.hpp"

#include <doctest.h>

#include <random>

using namespace mcreg;

namespace {

std::vector<double> exp_sample(std::size_t n, double mean, std::uint64_t seed) {
    Rng rng = make_rng(seed, "bench");
    std::vector<double> y(n);
    for (auto& v : y) v = -mean * std::log(1.0 - uniform01(rng));
    return y;
}

double exp_loglik(const std::vector<double>& y) {
    double s = 0.0;
    for (double v : y) s += v;
    const double m = s / static_cast<double>(y.size());
    return -static_cast<double>(y.size()) * (std::log(m) + 1.0);
}

}  // namespace

TEST_CASE("gamma fit to exponential data") {
    const auto y = exp_sample(5000, 2.0, 1);
    const BenchmarkResult r = fit_simple(y, SimpleFamily::ga);
    CHECK(r.converged);
    CHECK(r.df == 2);
    CHECK(std::abs(r.params[0] - 2.0) < 0.1);
    CHECK(std::abs(r.params[1] - 1.0) < 0.06);
    CHECK(r.loglik >= exp_loglik(y) - 1e-8);
    CHECK(r.loglik == doctest::Approx(simple_loglik(y, SimpleFamily::ga, r.params)));
}

TEST_CASE("nested families are ordered by likelihood") {
    Rng rng = make_rng(2, "nest");
    std::vector<double> y(3000);
    for (auto& v : y) v = std::exp(0.5 * std::sqrt(-2.0 * std::log(uniform01(rng))) * std::cos(6.283185307 * uniform01(rng)));
    const auto ga = fit_simple(y, SimpleFamily::ga);
    const auto wei = fit_simple(y, SimpleFamily::wei);
    const auto gg = fit_simple(y, SimpleFamily::gg);
    CHECK(gg.loglik >= ga.loglik - 1e-6);
    CHECK(gg.loglik >= wei.loglik - 1e-6);
    CHECK(wei.loglik >= exp_loglik(y) - 1e-6);
    CHECK(gg.df == 3);
    for (const auto* r : {&ga, &wei, &gg}) {
        CHECK(r->aic == doctest::Approx(-2.0 * r->loglik + 2.0 * r->df));
        CHECK(r->bic == doctest::Approx(-2.0 * r->loglik + std::log(3000.0) * r->df));
    }
}

TEST_CASE("generalized Pareto recovers a Pareto tail") {
    Rng rng = make_rng(3, "gp");
    std::vector<double> y(20000);
    for (auto& v : y) v = 1.0 * (std::pow(1.0 - uniform01(rng), -0.5) - 1.0) / 0.5;  // sigma 1, xi 0.5
    const auto r = fit_simple(y, SimpleFamily::gp);
    CHECK(std::abs(r.params[1] - 0.5) < 0.04);
    REQUIRE(r.tail_index.has_value());
    CHECK(std::abs(*r.tail_index - 2.0) < 0.2);
    CHECK_THROWS(simple_family_from_string("lognormal"));
    CHECK(simple_family_from_string("GG") == SimpleFamily::gg);
}

TEST_CASE("exponential mixture NPMLE") {
    const auto one = exp_sample(4000, 3.0, 4);
    const auto r1 = fit_npmle_expmix(one);
    CHECK(r1.params.size() >= 2);
    CHECK(r1.loglik >= exp_loglik(one) - 1e-6);

    auto two = exp_sample(3000, 0.5, 5);
    const auto b = exp_sample(3000, 20.0, 6);
    two.insert(two.end(), b.begin(), b.end());
    const auto r2 = fit_npmle_expmix(two);
    CHECK(r2.df >= 3);
    CHECK(r2.df % 2 == 1);
    CHECK(r2.loglik > exp_loglik(two) + 100.0);
    for (std::size_t k = 1; k < r2.trajectory.size(); ++k) CHECK(r2.trajectory[k] >= r2.trajectory[k - 1] - 1e-8);
}

TEST_CASE("gamma plus lomax mixture") {
    Rng rng = make_rng(7, "mix");
    std::vector<double> y(4000);
    for (std::size_t i = 0; i < y.size(); ++i) {
        if (uniform01(rng) < 0.7) {
            std::gamma_distribution<double> gd(4.0, 0.5);
            y[i] = gd(rng);
        } else {
            y[i] = 2.0 * (std::pow(1.0 - uniform01(rng), -1.0 / 1.5) - 1.0);
        }
    }
    MixtureConfig cfg;
    const auto r = fit_mixture_gamma_lomax(y, 1, cfg);
    CHECK(r.df == 5);
    CHECK(r.converged);
    for (std::size_t k = 1; k < r.trajectory.size(); ++k) CHECK(r.trajectory[k] >= r.trajectory[k - 1] - 1e-6);
    REQUIRE(r.tail_index.has_value());
    CHECK(std::abs(*r.tail_index - 1.5) < 0.35);
    const auto r2 = fit_mixture_gamma_lomax(y, 2, cfg);
    CHECK(r2.loglik >= r.loglik - 1.0);
}

TEST_CASE("composite without covariates is reported like the others") {
    const auto y = exp_sample(1500, 2.0, 8);
    FitConfig cfg;
    cfg.estep = EStepMode::quadrature;
    cfg.tol = 1e-6;
    const auto r = fit_composite_plain(y, 1, 4.0, cfg);
    CHECK(r.df == 3 * 1 + 2);
    CHECK(r.tail_index.has_value());
    CHECK(r.aic == doctest::Approx(-2.0 * r.loglik + 2.0 * r.df));
}
