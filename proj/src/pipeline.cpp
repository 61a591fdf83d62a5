#include "mcreg/pipeline.hpp"

namespace mcreg {

PenaltySet adaptive_plans(const Dataset& data, const CovariateSchema& schema, const ParamSet& pilot,
                          PenaltyFamily family, double scad_a, std::vector<std::string>* warnings) {
    PenaltySet plans = make_penalty_set(schema, data, family, scad_a);
    for (Part part : {Part::mixing, Part::body, Part::tail}) {
        const DesignMatrix& d = part == Part::mixing ? data.mix() : part == Part::body ? data.body() : data.tail();
        plans[part].weights = adaptive_std_weights(part_coefficients(pilot, part), plans[part], schema,
                                                   level_counts(d, schema), data.n(), 1e8, warnings);
    }
    return plans;
}

PipelineResult run_pipeline(const Dataset& data, const CovariateSchema& schema, const PipelineConfig& cfg) {
    PipelineResult r;
    r.pilot = fit_gem(data, cfg.g, cfg.tau, PenaltySet{}, cfg.fit);
    if (r.pilot.failed) throw FitFailure("pilot fit failed: " + r.pilot.message);

    Dataset d = data;
    d.set_tau(cfg.tau);
    if (cfg.adaptive) {
        r.plans = adaptive_plans(d, schema, r.pilot.params, cfg.family, cfg.scad_a, &r.warnings);
    } else {
        r.plans = make_penalty_set(schema, d, cfg.family, cfg.scad_a);
    }
    TuneConfig tc = cfg.tune;
    tc.threads = cfg.threads;
    r.tuning = tune_lambda(d, r.pilot.params, r.pilot.latent, r.plans, cfg.grid, tc);
    for (Part part : {Part::mixing, Part::body, Part::tail}) r.plans[part].lambda = r.tuning[part];

    r.penalized = fit_gem(d, cfg.g, cfg.tau, r.plans, cfg.fit, r.pilot.params);
    if (r.penalized.failed) throw FitFailure("penalized fit failed: " + r.penalized.message);
    r.adjusted = auto_adjust(r.penalized.params, r.penalized.latent, d, r.plans, tc.adjust);

    r.refit = collapse_and_refit(d, r.adjusted.params, cfg.fit);
    if (r.refit.fit.failed) throw FitFailure("refit failed: " + r.refit.fit.message);

    const Dataset& red = r.refit.reduced_data;
    r.labels = param_labels(r.refit.fit.params, red.mix().column_names(schema), red.body().column_names(schema),
                            red.tail().column_names(schema));
    r.info = fisher_info_reduced(r.refit.fit.params, red);
    r.wald = wald_ci(r.refit.fit.params, red, r.info, cfg.wald, r.labels);
    if (cfg.bootstrap_B > 0) {
        BootstrapConfig bc;
        bc.B = cfg.bootstrap_B;
        bc.level = cfg.wald.level;
        bc.seed = cfg.fit.seed;
        bc.threads = cfg.threads;
        bc.fit = cfg.fit;
        r.bootstrap = bootstrap_ci(r.refit.fit.params, red, bc, r.labels);
    }
    return r;
}

}  // namespace mcreg
