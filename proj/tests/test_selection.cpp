#include "oracles.hpp"

#include "mcreg/gem.hpp"
#include "mcreg/pipeline.hpp"
#include "mcreg/selection.hpp"

#include <doctest.h>

#include <algorithm>
#include <limits>

using namespace mcreg;

namespace {

struct Fitted {
    oracle::Fixture fx;
    FitReport fit;
    PenaltySet plans;
};

Fitted fitted_fixture(Eigen::Index n, std::uint64_t seed, double lambda) {
    Fitted f{oracle::make_fixture(n, seed), {}, {}};
    FitConfig cfg;
    cfg.estep = EStepMode::quadrature;
    cfg.tol = 1e-6;
    const FitReport pilot = fit_gem(f.fx.data, 2, 10.0, PenaltySet{}, cfg);
    f.plans = adaptive_plans(f.fx.data, oracle::mixed_schema(), pilot.params, PenaltyFamily::lasso, 3.7);
    for (Part p : {Part::mixing, Part::body, Part::tail}) f.plans[p].lambda = lambda;
    f.fit = fit_gem(f.fx.data, 2, 10.0, f.plans, cfg, pilot.params);
    return f;
}

}  // namespace

TEST_CASE("effective parameter counts") {
    Eigen::VectorXd y = Eigen::VectorXd::LinSpaced(50, 0.1, 5.0);
    const Dataset data(y, intercept_design(50), 2.0);
    ParamSet p(5, 1, 1, 1, 2.0);
    const EffectiveParams e = effective_params(p, data);
    CHECK(e.total == 17);
    CHECK(e.n1 == 5);
    CHECK(e.n2 == 10);
    CHECK(e.n3 == 2);

    // Merged and zeroed rows count once or not at all.
    const auto fx = oracle::make_fixture(100, 1);
    ParamSet q = fx.truth;
    const int full = effective_params(q, fx.data).total;
    q.beta().row(5).setZero();
    CHECK(effective_params(q, fx.data).total == full - 2);
    q.beta().row(2) = q.beta().row(1);  // region=south and region=west merge
    CHECK(effective_params(q, fx.data).total == full - 4);
}

TEST_CASE("automatic adjustment contract") {
    const Fitted f = fitted_fixture(2000, 3, 0.002);
    REQUIRE_FALSE(f.fit.failed);
    AdjustConfig cfg;
    const AdjustResult r = auto_adjust(f.fit.params, f.fit.latent, f.fx.data, f.plans, cfg);
    REQUIRE_FALSE(r.audit.empty());
    for (const auto& s : r.audit) {
        if (s.accepted) CHECK(s.before - s.after <= cfg.xi);
        else CHECK(s.before - s.after > cfg.xi);
    }
    // Rows are exactly equal or exactly zero where the adjustment acted.
    for (Part part : {Part::mixing, Part::body, Part::tail}) {
        const Eigen::MatrixXd th = part_coefficients(r.params, part);
        const Eigen::MatrixXd before = part_coefficients(f.fit.params, part);
        for (Eigen::Index a = 1; a < th.rows(); ++a) {
            if ((th.row(a).array() == 0.0).all()) continue;
            for (Eigen::Index b = a + 1; b < th.rows(); ++b) {
                const bool same = (th.row(a).array() == th.row(b).array()).all();
                if (same) CHECK((before.row(a) - before.row(b)).norm() > 0.0);  // merged by the adjustment
            }
        }
    }
    CHECK(effective_params(r.params, f.fx.data).total <= effective_params(f.fit.params, f.fx.data).total);
}

TEST_CASE("trivially equal rows merge at the initial tolerance") {
    const auto fx = oracle::make_fixture(500, 4);
    ParamSet p = fx.truth;
    p.beta().row(2) = p.beta().row(1);
    p.beta()(2, 0) += 1e-7;  // south and west differ by far less than delta0
    Rng rng = make_rng(1, "e");
    const LatentState lat = e_step(fx.data, p, EStepMode::quadrature, rng);
    const PenaltySet plans = make_penalty_set(oracle::mixed_schema(), fx.data, PenaltyFamily::lasso);
    AdjustConfig cfg;
    const AdjustResult r = auto_adjust_part(Part::body, p, lat, fx.data, plans.body, cfg);
    REQUIRE_FALSE(r.audit.empty());
    CHECK(r.audit.front().delta == cfg.delta0);
    CHECK(r.audit.front().accepted);
    CHECK(r.audit.front().merges >= 1);
    CHECK((r.params.beta().row(1).array() == r.params.beta().row(2).array()).all());
}

TEST_CASE("adjust config validation") {
    AdjustConfig c;
    c.xi = -1.0;
    CHECK_THROWS(c.validate());
    c = {};
    c.delta0 = 0.0;
    CHECK_THROWS(c.validate());
}

TEST_CASE("information criteria follow their definitions") {
    const Fitted f = fitted_fixture(1500, 5, 0.0);
    TuneConfig cfg;
    const TuningGrid grid = TuningGrid::geometric(1e-4, 4.0, 6);
    for (Criterion c : {Criterion::paic, Criterion::pbic}) {
        cfg.criterion = c;
        const TuningResult r = tune_lambda(f.fx.data, f.fit.params, f.fit.latent, f.plans, grid, cfg);
        CHECK(r.rows.size() == 18);
        for (Part part : {Part::mixing, Part::body, Part::tail}) {
            const double n = part == Part::mixing ? f.fx.data.n() : part == Part::body ? f.fx.data.n_b() : f.fx.data.n_t();
            const double pen = c == Criterion::paic ? 2.0 : std::log(n);
            double best = std::numeric_limits<double>::infinity();
            for (const auto& row : r.rows) {
                if (row.part != part) continue;
                CHECK(row.criterion == doctest::Approx(-2.0 * row.partial_objective + pen * row.df));
                best = std::min(best, row.criterion);
            }
            for (const auto& row : r.rows)
                if (row.part == part && row.lambda == r[part]) CHECK(row.criterion == best);
        }
    }
}

TEST_CASE("cross-validation applies the one-standard-error rule") {
    const Fitted f = fitted_fixture(1500, 6, 0.0);
    TuneConfig cfg;
    cfg.criterion = Criterion::cv;
    cfg.folds = 3;
    const TuningGrid grid = TuningGrid::geometric(1e-4, 4.0, 5);
    const TuningResult r = tune_lambda(f.fx.data, f.fit.params, f.fit.latent, f.plans, grid, cfg);
    for (Part part : {Part::mixing, Part::body, Part::tail}) {
        std::vector<TuningRow> rows;
        for (const auto& row : r.rows)
            if (row.part == part) rows.push_back(row);
        REQUIRE(rows.size() == 5);
        std::size_t best = 0;
        for (std::size_t k = 1; k < rows.size(); ++k)
            if (rows[k].criterion <= rows[best].criterion) best = k;
        double chosen = rows[best].lambda;
        for (const auto& row : rows)
            if (row.criterion <= rows[best].criterion + rows[best].sd) chosen = std::max(chosen, row.lambda);
        CHECK(r[part] == chosen);
    }
    // Same seed, same answer; thread count does not matter.
    TuneConfig c2 = cfg;
    c2.threads = 3;
    const TuningResult r2 = tune_lambda(f.fx.data, f.fit.params, f.fit.latent, f.plans, grid, c2);
    for (std::size_t k = 0; k < r.rows.size(); ++k) CHECK(r.rows[k].criterion == r2.rows[k].criterion);
}

TEST_CASE("reduction maps merged and zeroed rows to a smaller design and back") {
    const auto fx = oracle::make_fixture(300, 7);
    ParamSet p = fx.truth;
    p.alpha_free().row(5).setZero();
    p.beta().row(2) = p.beta().row(1);
    p.nu().segment(1, 4).setZero();
    const Reduction red = reduction_pattern(p, fx.data);
    CHECK(red.mixing.size() == 5);
    CHECK(red.body.size() == 5);
    CHECK(red.tail.size() == 2);
    const Dataset rd = apply_reduction(fx.data, red);
    CHECK(rd.body().D() == 5);
    const ParamSet rp = reduce_params(p, red);
    CHECK(std::abs(observed_loglik(rd, rp) - observed_loglik(fx.data, p)) < 1e-8 * std::abs(observed_loglik(fx.data, p)));
    const ParamSet back = expand_params(rp, red, fx.data);
    CHECK((back.beta() - p.beta()).norm() < 1e-14);
    CHECK((back.alpha() - p.alpha()).norm() < 1e-14);
    CHECK((back.nu() - p.nu()).norm() < 1e-14);
}

TEST_CASE("collapse and refit improves the unpenalized likelihood on the reduced model") {
    const Fitted f = fitted_fixture(1500, 8, 0.003);
    const AdjustResult adj = auto_adjust(f.fit.params, f.fit.latent, f.fx.data, f.plans, AdjustConfig{});
    FitConfig cfg;
    cfg.estep = EStepMode::quadrature;
    cfg.tol = 1e-6;
    const RefitResult r = collapse_and_refit(f.fx.data, adj.params, cfg);
    REQUIRE_FALSE(r.fit.failed);
    CHECK(observed_loglik(f.fx.data, r.full_layout) >= observed_loglik(f.fx.data, adj.params) - 1e-6);
    CHECK(std::abs(observed_loglik(f.fx.data, r.full_layout) - r.fit.loglik) < 1e-6 * std::abs(r.fit.loglik));
    CHECK(r.fit.df == effective_params(r.full_layout, f.fx.data).total);
}
