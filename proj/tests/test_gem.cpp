#include "oracles.hpp"

#include "mcreg/dists.hpp"
#include "mcreg/gem.hpp"
#include "mcreg/simulate.hpp"

#include <doctest.h>

using namespace mcreg;

namespace {

using oracle::Fixture;
using oracle::make_fixture;

PenaltyPlan random_plan(Part part, const Dataset& data, Rng& rng) {
    PenaltySet set = make_penalty_set(oracle::mixed_schema(), data, PenaltyFamily::scad);
    PenaltyPlan plan = set[part];
    plan.lambda = 0.01 + 0.05 * uniform01(rng);
    return plan;
}

double max_rel(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
    return (a - b).cwiseAbs().maxCoeff() / std::max(1.0, a.cwiseAbs().maxCoeff());
}

}  // namespace

TEST_CASE("block gradients and Hessians match finite differences") {
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
        const Fixture fx = make_fixture(200, seed);
        Rng rng = make_rng(seed, "grad");
        const ParamSet p = oracle::random_params(2, 6, 10.0, rng);
        Rng erng = make_rng(seed, "e");
        const LatentState lat = e_step(fx.data, p, EStepMode::quadrature, erng);

        const PenaltyPlan pm = random_plan(Part::mixing, fx.data, rng);
        const Eigen::MatrixXd a0 = p.alpha_free();
        const MixingObjective S(fx.data.mix().X, lat.z, build_majorizer(a0 * 0.9, pm));
        for (int j = 0; j < 2; ++j) {
            auto f = [&](const Eigen::VectorXd& v) {
                Eigen::MatrixXd a = a0;
                a.col(j) = v;
                return S.value(a);
            };
            CHECK(max_rel(S.gradient(a0, j), oracle::fd_gradient(f, a0.col(j))) < 1e-5);
            auto gj = [&](const Eigen::VectorXd& v) {
                Eigen::MatrixXd a = a0;
                a.col(j) = v;
                return S.gradient(a, j);
            };
            const Eigen::MatrixXd H = S.hessian(a0, j);
            for (Eigen::Index c = 0; c < 6; ++c) {
                Eigen::VectorXd e = Eigen::VectorXd::Zero(6);
                const double h = 1e-6;
                e(c) = h;
                const Eigen::VectorXd col = (gj(a0.col(j) + e) - gj(a0.col(j) - e)) / (2 * h);
                CHECK(max_rel(H.col(c), col) < 1e-5);
            }
        }

        const PenaltyPlan pb = random_plan(Part::body, fx.data, rng);
        const Eigen::MatrixXd b0 = p.beta();
        const BodyObjective T(fx.data.body().X, fx.data.y(), lat, build_majorizer(b0 * 1.1, pb));
        for (int j = 0; j < 2; ++j) {
            auto f = [&](const Eigen::VectorXd& v) {
                Eigen::MatrixXd b = b0;
                b.col(j) = v;
                return T.value(b, p.phi());
            };
            CHECK(max_rel(T.gradient(b0, p.phi(), j), oracle::fd_gradient(f, b0.col(j))) < 1e-5);
        }

        const PenaltyPlan pt = random_plan(Part::tail, fx.data, rng);
        const TailObjective V(fx.data.tail().X, fx.data.y(), fx.data.tau(), build_majorizer(p.nu() * 0.8, pt));
        auto fv = [&](const Eigen::VectorXd& v) { return V.value(p.theta(), v); };
        CHECK(max_rel(V.gradient(p.theta(), p.nu()), oracle::fd_gradient(fv, p.nu())) < 1e-5);
        const Eigen::MatrixXd HV = V.hessian(p.theta(), p.nu());
        for (Eigen::Index c = 0; c < 6; ++c) {
            auto gc = [&](const Eigen::VectorXd& v) { return V.gradient(p.theta(), v)(c); };
            CHECK(max_rel(HV.row(c).transpose(), oracle::fd_gradient(gc, p.nu())) < 1e-5);
        }
    }
}

TEST_CASE("E-step responsibilities respect the support") {
    const Fixture fx = make_fixture(500, 11);
    Rng rng = make_rng(1, "e");
    const EStepResult r = e_step_full(fx.data, fx.truth, EStepMode::quadrature, 1, rng);
    for (Eigen::Index i = 0; i < fx.data.n(); ++i) {
        CHECK(std::abs(r.latent.z.row(i).sum() - 1.0) < 1e-12);
        if (fx.data.in_body(i)) {
            CHECK(r.latent.z(i, 2) == 0.0);
        } else {
            CHECK(r.latent.z(i, 2) == 1.0);
        }
        CHECK((r.latent.k.row(i).array() >= 0.0).all());
    }
    CHECK(std::abs(r.loglik - observed_loglik(fx.data, fx.truth)) < 1e-8 * std::abs(r.loglik));
}

TEST_CASE("stochastic E-step averages to the quadrature values") {
    const Fixture fx = make_fixture(50, 12);
    Rng q = make_rng(1, "q");
    const LatentState exact = e_step(fx.data, fx.truth, EStepMode::quadrature, q);
    Rng s = make_rng(1, "s");
    const LatentState mc = e_step(fx.data, fx.truth, EStepMode::stochastic, s, 20000);
    for (Eigen::Index i = 0; i < fx.data.n(); ++i)
        for (int j = 0; j < 2; ++j) {
            if (!fx.data.in_body(i)) continue;
            CHECK(std::abs(mc.y_above(i, j) - exact.y_above(i, j)) < 0.03 * exact.y_above(i, j));
            CHECK(std::abs(mc.logy_above(i, j) - exact.logy_above(i, j)) < 0.01 * std::abs(exact.logy_above(i, j)) + 0.01);
        }
}

TEST_CASE("penalized GEM ascends monotonically in quadrature mode") {
    for (std::uint64_t seed = 21; seed <= 22; ++seed) {
        const Fixture fx = make_fixture(2000, seed);
        PenaltySet plans = make_penalty_set(oracle::mixed_schema(), fx.data, PenaltyFamily::lasso);
        for (Part part : {Part::mixing, Part::body, Part::tail}) plans[part].lambda = 0.01;
        FitConfig cfg;
        cfg.estep = EStepMode::quadrature;
        cfg.tol = 1e-6;
        cfg.max_iters = 60;
        cfg.seed = seed;
        const FitReport fit = fit_gem(fx.data, 2, 10.0, plans, cfg);
        REQUIRE_FALSE(fit.failed);
        CHECK(fit.monotone);
        for (std::size_t k = 1; k < fit.trajectory.size(); ++k)
            CHECK(fit.trajectory[k] >= fit.trajectory[k - 1] - 1e-8);
        CHECK(std::abs(fit.penalized - penalized_objective(fx.data, fit.params, plans)) < 1e-6 * std::abs(fit.penalized));
    }
}

TEST_CASE("intercept-only fit recovers the generating parameters") {
    ParamSet truth(2, 1, 1, 1, 10.0);
    truth.alpha_free() << 1.0, 0.6;
    truth.beta() << std::log(2.0), std::log(6.0);
    truth.phi() << 0.1, 0.05;
    truth.nu() << std::log(1.8);
    truth.set_theta(8.0);
    Rng rng = make_rng(5, "recover");
    Eigen::VectorXd y(20000);
    for (auto& v : y) v = sample_composite(row_model(truth, Eigen::VectorXd::Ones(1)), truth, rng);
    const Dataset data(y, intercept_design(y.size()), 10.0);
    FitConfig cfg;
    cfg.estep = EStepMode::quadrature;
    cfg.tol = 1e-8;
    cfg.max_iters = 2000;
    const FitReport fit = fit_gem(data, 2, 10.0, PenaltySet{}, cfg);
    REQUIRE_FALSE(fit.failed);
    CHECK(std::abs(fit.params.beta()(0, 0) - truth.beta()(0, 0)) < 0.03);
    CHECK(std::abs(fit.params.beta()(0, 1) - truth.beta()(0, 1)) < 0.03);
    CHECK(std::abs(fit.params.alpha()(0, 0) - 1.0) < 0.1);
    CHECK(std::abs(fit.params.nu()(0) - truth.nu()(0)) < 0.1);
    CHECK(fit.df == 3 * 2 + 2);
    CHECK(fit.aic == doctest::Approx(-2.0 * fit.loglik + 2.0 * fit.df));
}

TEST_CASE("fits are deterministic and components come out ordered") {
    const Fixture fx = make_fixture(800, 31);
    FitConfig cfg;
    cfg.seed = 4;
    const FitReport a = fit_gem(fx.data, 2, 10.0, PenaltySet{}, cfg);
    const FitReport b = fit_gem(fx.data, 2, 10.0, PenaltySet{}, cfg);
    CHECK(a.params.beta() == b.params.beta());
    CHECK(a.trajectory == b.trajectory);
    const auto order = canonical_order(a.params, fx.data);
    CHECK(order == std::vector<int>{0, 1});
}

TEST_CASE("initialization and validation") {
    const Fixture fx = make_fixture(400, 41);
    Rng rng = make_rng(1, "init");
    const ParamSet p0 = init_cmm(fx.data, 3, 10.0, rng);
    CHECK_NOTHROW(p0.validate());
    CHECK(p0.g() == 3);
    CHECK(p0.beta()(0, 0) <= p0.beta()(0, 1));
    FitConfig bad;
    bad.tol = -1.0;
    CHECK_THROWS(bad.validate());
    CHECK_THROWS(fit_gem(fx.data, 0, 10.0, PenaltySet{}, FitConfig{}));
}

TEST_CASE("component count selection finds two modes") {
    ParamSet truth(2, 1, 1, 1, 30.0);
    truth.alpha_free() << 1.0, 1.0;
    truth.beta() << std::log(2.0), std::log(12.0);
    truth.phi() << 0.02, 0.02;
    truth.nu() << std::log(2.0);
    truth.set_theta(30.0);
    Rng rng = make_rng(9, "choose");
    Eigen::VectorXd y(4000);
    for (auto& v : y) v = sample_composite(row_model(truth, Eigen::VectorXd::Ones(1)), truth, rng);
    const Dataset data(y, intercept_design(y.size()), 30.0);
    FitConfig cfg;
    cfg.estep = EStepMode::quadrature;
    const ChooseGResult r = choose_g(data, 30.0, {1, 2, 3}, 0.5, cfg);
    CHECK(r.empirical_nodes.size() == 2);
    CHECK(r.matched);
    CHECK(r.g == 2);
}
