#include "mcreg/cli.hpp"

#include "mcreg/benchmarks.hpp"
#include "mcreg/diagnostics.hpp"
#include "mcreg/io.hpp"
#include "mcreg/pipeline.hpp"
#include "mcreg/report.hpp"
#include "mcreg/simulate.hpp"

#include <CLI11.hpp>

#include <cstring>
#include <filesystem>
#include <ostream>
#include <sstream>

namespace mcreg::cli {

using nlohmann::json;
namespace fs = std::filesystem;

NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE_WITH_DEFAULT(RunConfig, command, data, schema, truth, model, pilot, tau, g,
                                                n, penalty, scad_a, adaptive, criterion, folds, lambda_grid, lambda,
                                                lambda_mixing, lambda_body, lambda_tail, seed, threads, estep, draws,
                                                max_iters, tol, delta0, delta_growth, xi, B, level, g_list,
                                                tail_robustness)

json to_json(const RunConfig& c) {
    json j;
    nlohmann::to_json(j, c);
    return j;
}

RunConfig from_json(const json& j) {
    RunConfig c;
    try {
        nlohmann::from_json(j.contains("run_config") ? j.at("run_config") : j, c);
    } catch (const json::exception& e) {
        throw SchemaError(std::string("malformed run configuration: ") + e.what());
    }
    return c;
}

namespace {

// ---------------------------------------------------------------------------
// Flag conversion

std::vector<double> parse_doubles(const std::string& s, const char* what) {
    std::vector<double> v;
    std::stringstream ss(s);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
        try {
            std::size_t used = 0;
            v.push_back(std::stod(tok, &used));
            if (used != tok.size()) throw std::invalid_argument(tok);
        } catch (const std::exception&) {
            throw DomainError(std::string("cannot parse ") + what + " entry '" + tok + "'");
        }
    }
    if (v.empty()) throw DomainError(std::string(what) + " is empty");
    return v;
}

TuningGrid parse_grid(const std::string& s) {
    if (s.rfind("geom:", 0) == 0) {
        const auto v = parse_doubles(s.substr(5), "lambda grid");
        if (v.size() != 3) throw DomainError("geometric lambda grid needs base,ratio,count");
        if (!(v[0] > 0.0) || !(v[1] > 1.0) || v[2] < 1.0) throw DomainError("geometric lambda grid out of range");
        return TuningGrid::geometric(v[0], v[1], static_cast<int>(v[2]));
    }
    const auto v = parse_doubles(s, "lambda grid");
    for (double x : v)
        if (!(x >= 0.0)) throw DomainError("lambda grid values must be nonnegative");
    return {v, v, v};
}

FitConfig fit_config(const RunConfig& c) {
    FitConfig f;
    f.max_iters = c.max_iters;
    f.tol = c.tol;
    f.estep = estep_mode_from_string(c.estep);
    f.draws = c.draws;
    f.seed = c.seed;
    f.validate();
    return f;
}

TuneConfig tune_config(const RunConfig& c) {
    TuneConfig t;
    t.criterion = criterion_from_string(c.criterion);
    t.folds = c.folds;
    t.seed = c.seed;
    t.threads = c.threads;
    t.adjust = {c.delta0, c.delta_growth, c.xi};
    t.adjust.validate();
    return t;
}

double part_lambda(const RunConfig& c, Part p) {
    const double v = p == Part::mixing ? c.lambda_mixing : p == Part::body ? c.lambda_body : c.lambda_tail;
    return v >= 0.0 ? v : c.lambda;
}

// ---------------------------------------------------------------------------
// Inputs and outputs

struct Inputs {
    CovariateSchema schema;
    Dataset data;
    std::optional<ParamSet> model;
    double tau = 0.0;
};

void require(const std::string& v, const char* flag) {
    if (v.empty()) throw DomainError(std::string("missing required flag ") + flag);
}

void check_layout(const ParamSet& p, const Dataset& d) {
    if (p.d_mix() != d.mix().D() || p.d_body() != d.body().D() || p.d_tail() != d.tail().D())
        throw SchemaError("model coefficients do not match the design implied by the schema");
}

Inputs load_inputs(const RunConfig& c, bool need_model) {
    Inputs in;
    require(c.data, "--data");
    require(c.schema, "--schema");
    in.schema = load_schema(c.schema);
    if (need_model) {
        require(c.model, "--model");
        in.model = read_model(c.model);
    }
    in.tau = c.tau > 0.0 ? c.tau : in.model ? in.model->tau() : 0.0;
    if (!(in.tau > 0.0)) throw DomainError("--tau must be positive");
    in.data = load_dataset(c.data, in.schema, in.tau);
    if (in.model) {
        check_layout(*in.model, in.data);
        in.model->set_tau(in.tau);
    }
    return in;
}

std::vector<double> read_y(const std::string& path) {
    const RawTable t = read_csv(path);
    const int yc = t.column("y");
    if (yc < 0) throw IngestError("data has no 'y' column");
    std::vector<double> y;
    y.reserve(t.rows.size());
    for (std::size_t i = 0; i < t.rows.size(); ++i) {
        const std::string& s = t.rows[i][static_cast<std::size_t>(yc)];
        double v = 0.0;
        try {
            v = std::stod(s);
        } catch (const std::exception&) {
            throw IngestError("row " + std::to_string(i + 1) + ": cannot parse response '" + s + "'");
        }
        if (!(v > 0.0)) throw IngestError("row " + std::to_string(i + 1) + ": response must be positive");
        y.push_back(v);
    }
    return y;
}

class Writer {
public:
    Writer(const RunConfig& c, std::ostream& out) : cfg_(to_json(c)), dir_(c.out_dir), out_(out) {
        std::error_code ec;
        fs::create_directories(dir_, ec);
        if (ec) throw IoError("cannot create output directory '" + dir_.string() + "': " + ec.message());
    }

    const json& config() const { return cfg_; }

    void json_file(const std::string& name, json body) {
        body["version"] = kLibraryVersion;
        body["run_config"] = cfg_;
        text(name, body.dump(2) + "\n");
    }
    void model(const std::string& name, const ParamSet& p, const ColumnNames& names) {
        write_model(dir_ / name, p, names, cfg_);
        out_ << "wrote " << (dir_ / name).string() << "\n";
    }
    void text(const std::string& name, const std::string& body) {
        write_text(dir_ / name, body);
        out_ << "wrote " << (dir_ / name).string() << "\n";
    }
    // CSV files carry no header block; run_config.json sits next to them.
    void run_config() {
        json j{{"version", kLibraryVersion}, {"run_config", cfg_}};
        write_text(dir_ / "run_config.json", j.dump(2) + "\n");
    }

private:
    json cfg_;
    fs::path dir_;
    std::ostream& out_;
};

ColumnNames names_of(const Inputs& in) { return column_names(in.data, in.schema); }

PenaltySet plans_for(const RunConfig& c, const Inputs& in, std::vector<std::string>& warnings) {
    const PenaltyFamily fam = penalty_family_from_string(c.penalty);
    PenaltySet plans;
    const bool any = part_lambda(c, Part::mixing) > 0 || part_lambda(c, Part::body) > 0 || part_lambda(c, Part::tail) > 0;
    if (!any) return plans;
    if (c.adaptive) {
        ParamSet pilot;
        if (!c.pilot.empty()) {
            pilot = read_model(c.pilot);
            check_layout(pilot, in.data);
        } else {
            const FitReport pf = fit_gem(in.data, in.model ? in.model->g() : c.g, in.tau, PenaltySet{}, fit_config(c));
            if (pf.failed) throw FitFailure("pilot fit failed: " + pf.message);
            pilot = pf.params;
        }
        plans = adaptive_plans(in.data, in.schema, pilot, fam, c.scad_a, &warnings);
    } else {
        plans = make_penalty_set(in.schema, in.data, fam, c.scad_a);
    }
    for (Part p : {Part::mixing, Part::body, Part::tail}) plans[p].lambda = part_lambda(c, p);
    return plans;
}

// ---------------------------------------------------------------------------
// Commands

int cmd_simulate(const RunConfig& c, std::ostream& out) {
    require(c.schema, "--schema");
    require(c.truth, "--truth");
    if (c.n < 0) throw DomainError("--n must be nonnegative");
    const CovariateSchema schema = load_schema(c.schema);
    ParamSet truth = read_model(c.truth);
    if (c.tau > 0.0) truth.set_tau(c.tau);
    const Simulated sim = simulate_dataset(schema, truth, static_cast<Eigen::Index>(c.n), c.seed);
    Writer w(c, out);
    w.text("data.csv", format_csv(sim.table));
    w.model("truth.json", truth, column_names(sim.data, schema));
    return ok;
}

int cmd_fit(const RunConfig& c, std::ostream& out) {
    const Inputs in = load_inputs(c, false);
    std::vector<std::string> warnings;
    const PenaltySet plans = plans_for(c, in, warnings);
    std::optional<ParamSet> init;
    if (!c.model.empty()) {
        init = read_model(c.model);
        check_layout(*init, in.data);
    }
    FitReport fit = fit_gem(in.data, init ? init->g() : c.g, in.tau, plans, fit_config(c), init);
    fit.warnings.insert(fit.warnings.begin(), warnings.begin(), warnings.end());
    Writer w(c, out);
    w.json_file("fit.json", fit_to_json(fit, names_of(in)));
    w.model("model.json", fit.params, names_of(in));
    return fit.failed ? fit_failure : ok;
}

int cmd_tune(const RunConfig& c, std::ostream& out) {
    Inputs in = load_inputs(c, false);
    ParamSet pilot;
    LatentState latent;
    if (!c.pilot.empty()) {
        pilot = read_model(c.pilot);
        check_layout(pilot, in.data);
        pilot.set_tau(in.tau);
        Rng rng = make_rng(c.seed, "e-step");
        latent = e_step(in.data, pilot, EStepMode::quadrature, rng);
    } else {
        const FitReport pf = fit_gem(in.data, c.g, in.tau, PenaltySet{}, fit_config(c));
        if (pf.failed) throw FitFailure("pilot fit failed: " + pf.message);
        pilot = pf.params;
        latent = pf.latent;
    }
    const PenaltyFamily fam = penalty_family_from_string(c.penalty);
    std::vector<std::string> warnings;
    const PenaltySet plans = c.adaptive ? adaptive_plans(in.data, in.schema, pilot, fam, c.scad_a, &warnings)
                                        : make_penalty_set(in.schema, in.data, fam, c.scad_a);
    TuningResult r = tune_lambda(in.data, pilot, latent, plans, parse_grid(c.lambda_grid), tune_config(c));
    r.warnings.insert(r.warnings.begin(), warnings.begin(), warnings.end());
    Writer w(c, out);
    w.json_file("tuning.json", tuning_to_json(r));
    w.text("tuning.csv", tuning_csv(r));
    w.run_config();
    return ok;
}

int cmd_adjust(const RunConfig& c, std::ostream& out) {
    const Inputs in = load_inputs(c, true);
    std::vector<std::string> warnings;
    PenaltySet plans = plans_for(c, in, warnings);
    Rng rng = make_rng(c.seed, "e-step");
    const LatentState latent = e_step(in.data, *in.model, EStepMode::quadrature, rng);
    AdjustConfig ac{c.delta0, c.delta_growth, c.xi};
    ac.validate();
    const AdjustResult r = auto_adjust(*in.model, latent, in.data, plans, ac);
    Writer w(c, out);
    json body = adjust_to_json(r, names_of(in));
    body["warnings"] = warnings;
    w.json_file("adjust.json", body);
    w.model("model.json", r.params, names_of(in));
    return ok;
}

json refit_json(const RefitResult& r, const CovariateSchema& schema, const ColumnNames& full_names) {
    const ColumnNames red = column_names(r.reduced_data, schema);
    return {{"reduced_fit", fit_to_json(r.fit, red)}, {"full_layout", params_to_json(r.full_layout, full_names)}};
}

int cmd_refit(const RunConfig& c, std::ostream& out) {
    const Inputs in = load_inputs(c, true);
    const RefitResult r = collapse_and_refit(in.data, *in.model, fit_config(c));
    Writer w(c, out);
    w.json_file("refit.json", refit_json(r, in.schema, names_of(in)));
    w.model("model.json", r.full_layout, names_of(in));
    return r.fit.failed ? fit_failure : ok;
}

int cmd_bootstrap(const RunConfig& c, std::ostream& out) {
    const Inputs in = load_inputs(c, true);
    const Reduction red = reduction_pattern(*in.model, in.data);
    const Dataset rd = apply_reduction(in.data, red);
    const ParamSet rp = reduce_params(*in.model, red);
    const ColumnNames rn = column_names(rd, in.schema);
    const auto labels = param_labels(rp, rn.mixing, rn.body, rn.tail);
    const FisherInfo info = fisher_info_reduced(rp, rd);
    const CITable wald = wald_ci(rp, rd, info, {c.level, 10000, c.seed}, labels);
    BootstrapConfig bc;
    bc.B = c.B;
    bc.level = c.level;
    bc.seed = c.seed;
    bc.threads = c.threads;
    bc.fit = fit_config(c);
    const CITable boot = bootstrap_ci(rp, rd, bc, labels);
    Writer w(c, out);
    w.json_file("ci.json", {{"wald", ci_to_json(wald)}, {"bootstrap", ci_to_json(boot)}, {"singular", info.singular}});
    w.text("ci_wald.csv", ci_csv(wald));
    w.text("ci_bootstrap.csv", ci_csv(boot));
    w.run_config();
    return ok;
}

std::vector<int> parse_g_list(const std::string& s) {
    std::vector<int> gs;
    for (double v : parse_doubles(s, "g list")) {
        if (v < 1.0 || v != std::floor(v)) throw DomainError("g list entries must be positive integers");
        gs.push_back(static_cast<int>(v));
    }
    return gs;
}

int cmd_benchmark(const RunConfig& c, std::ostream& out) {
    require(c.data, "--data");
    if (!(c.tau > 0.0)) throw DomainError("--tau must be positive");
    const std::vector<double> y = read_y(c.data);
    const std::vector<int> gs = parse_g_list(c.g_list);
    MixtureConfig mc;
    mc.seed = c.seed;
    std::vector<BenchmarkResult> rows;
    for (SimpleFamily f : {SimpleFamily::ga, SimpleFamily::wei, SimpleFamily::gg, SimpleFamily::gp})
        rows.push_back(fit_simple(y, f));
    rows.push_back(fit_npmle_expmix(y));
    for (int g : gs) rows.push_back(fit_mixture_gamma_lomax(y, g, mc));
    rows.push_back(fit_composite_plain(y, c.g, c.tau, fit_config(c)));
    Writer w(c, out);
    json arr = json::array();
    for (const auto& r : rows) arr.push_back(benchmark_to_json(r));
    json body{{"models", arr}};
    if (c.tail_robustness) {
        const TailRobustness t = tail_robustness_experiment(y, gs, c.tau, fit_config(c), mc);
        body["tail_robustness"] = {{"sd_composite", t.sd_composite}, {"sd_noncomposite", t.sd_noncomposite}};
        w.text("tail_robustness.csv", tail_robustness_csv(t));
    }
    w.json_file("benchmarks.json", body);
    w.text("benchmarks.csv", benchmarks_csv(rows));
    w.run_config();
    return ok;
}

int cmd_diagnose(const RunConfig& c, std::ostream& out) {
    const Inputs in = load_inputs(c, true);
    const ParamSet& p = *in.model;
    Writer w(c, out);
    w.text("density.csv", density_csv(density_curve(p, in.data)));
    w.text("qq.csv", qq_csv(qq_points(p, in.data)));
    w.text("loglog.csv", loglog_csv(loglog_points(p, in.data)));
    const Eigen::VectorXd& yv = in.data.y();
    w.text("mean_excess.csv", mean_excess_csv(mean_excess(std::span<const double>(yv.data(), yv.size()))));
    w.run_config();
    return ok;
}

int cmd_pipeline(const RunConfig& c, std::ostream& out) {
    const Inputs in = load_inputs(c, false);
    PipelineConfig pc;
    pc.g = c.g;
    pc.tau = in.tau;
    pc.family = penalty_family_from_string(c.penalty);
    pc.scad_a = c.scad_a;
    pc.adaptive = c.adaptive;
    pc.fit = fit_config(c);
    pc.tune = tune_config(c);
    pc.grid = parse_grid(c.lambda_grid);
    pc.wald = {c.level, 10000, c.seed};
    pc.bootstrap_B = c.B;
    pc.threads = c.threads;
    const PipelineResult r = run_pipeline(in.data, in.schema, pc);
    const ColumnNames names = names_of(in);
    Writer w(c, out);
    w.json_file("pilot.json", fit_to_json(r.pilot, names));
    w.json_file("tuning.json", tuning_to_json(r.tuning));
    w.text("tuning.csv", tuning_csv(r.tuning));
    w.json_file("penalized.json", fit_to_json(r.penalized, names));
    w.json_file("adjust.json", adjust_to_json(r.adjusted, names));
    w.json_file("refit.json", refit_json(r.refit, in.schema, names));
    w.model("model.json", r.refit.full_layout, names);
    json ci{{"wald", ci_to_json(r.wald)}, {"singular", r.info.singular}};
    w.text("ci_wald.csv", ci_csv(r.wald));
    if (r.bootstrap) {
        ci["bootstrap"] = ci_to_json(*r.bootstrap);
        w.text("ci_bootstrap.csv", ci_csv(*r.bootstrap));
    }
    w.json_file("ci.json", ci);
    w.json_file("pipeline.json", {{"warnings", r.warnings},
                                  {"lambda",
                                   {{"mixing", r.tuning.lambda_mixing},
                                    {"body", r.tuning.lambda_body},
                                    {"tail", r.tuning.lambda_tail}}},
                                  {"refit_loglik", r.refit.fit.loglik},
                                  {"refit_df", r.refit.fit.df}});
    return ok;
}

int dispatch(const RunConfig& c, std::ostream& out) {
    if (c.command == "simulate") return cmd_simulate(c, out);
    if (c.command == "fit") return cmd_fit(c, out);
    if (c.command == "tune") return cmd_tune(c, out);
    if (c.command == "adjust") return cmd_adjust(c, out);
    if (c.command == "refit") return cmd_refit(c, out);
    if (c.command == "bootstrap") return cmd_bootstrap(c, out);
    if (c.command == "benchmark") return cmd_benchmark(c, out);
    if (c.command == "diagnose") return cmd_diagnose(c, out);
    if (c.command == "pipeline") return cmd_pipeline(c, out);
    throw DomainError("unknown command '" + c.command + "'");
}

int report_error(std::ostream& err, const std::string& out_dir, const char* kind, const std::string& msg, int code) {
    const json j{{"error", {{"class", kind}, {"message", msg}, {"exit_code", code}}}, {"version", kLibraryVersion}};
    err << j.dump() << "\n";
    std::error_code ec;
    if (!out_dir.empty() && fs::is_directory(out_dir, ec)) {
        try {
            write_text(fs::path(out_dir) / "error.json", j.dump(2) + "\n");
        } catch (const Error&) {
        }
    }
    return code;
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    RunConfig c;
    // A --config file supplies defaults; explicit flags override it.
    for (int i = 1; i + 1 < argc; ++i) {
        if (std::strcmp(argv[i], "--config") == 0) {
            try {
                c = from_json(json::parse(read_text(argv[i + 1])));
            } catch (const json::exception& e) {
                return report_error(err, "", "parse", std::string("config is not valid JSON: ") + e.what(), parse_error);
            } catch (const IoError& e) {
                return report_error(err, "", "io", e.what(), io_error);
            } catch (const Error& e) {
                return report_error(err, "", "parse", e.what(), parse_error);
            }
        }
    }

    CLI::App app{"Mixture composite Gamma-Lomax regression"};
    app.fallthrough();
    app.require_subcommand(1, 1);
    std::string config_path;
    app.add_option("--config", config_path, "JSON run configuration (any output file embedding one)");
    app.add_option("--data", c.data, "CSV with covariate columns and a y column");
    app.add_option("--schema", c.schema, "covariate schema JSON");
    app.add_option("--truth", c.truth, "model file used by simulate");
    app.add_option("--model", c.model, "model file (initial values for fit)");
    app.add_option("--pilot", c.pilot, "pilot model for adaptive weights");
    app.add_option("--out-dir", c.out_dir, "output directory");
    app.add_option("--tau", c.tau, "splicing threshold");
    app.add_option("--g", c.g, "number of Gamma components")->check(CLI::PositiveNumber);
    app.add_option("--n", c.n, "simulated sample size");
    app.add_option("--penalty", c.penalty)->check(CLI::IsMember({"lasso", "scad"}));
    app.add_option("--scad-a", c.scad_a);
    app.add_flag("--adaptive,!--no-adaptive", c.adaptive, "adaptive x standardization penalty weights");
    app.add_option("--criterion", c.criterion)->check(CLI::IsMember({"paic", "pbic", "cv"}));
    app.add_option("--folds", c.folds);
    app.add_option("--lambda-grid", c.lambda_grid, "comma list, or geom:base,ratio,count");
    app.add_option("--lambda", c.lambda, "penalty level for all parts");
    app.add_option("--lambda-mixing", c.lambda_mixing);
    app.add_option("--lambda-body", c.lambda_body);
    app.add_option("--lambda-tail", c.lambda_tail);
    app.add_option("--seed", c.seed);
    app.add_option("--threads", c.threads)->check(CLI::PositiveNumber);
    app.add_option("--estep", c.estep)->check(CLI::IsMember({"stochastic", "quadrature"}));
    app.add_option("--draws", c.draws);
    app.add_option("--max-iters", c.max_iters);
    app.add_option("--tol", c.tol);
    app.add_option("--delta0", c.delta0);
    app.add_option("--delta-growth", c.delta_growth);
    app.add_option("--xi", c.xi);
    app.add_option("--B", c.B, "bootstrap replicates (0 skips it in pipeline)");
    app.add_option("--level", c.level, "confidence level");
    app.add_option("--g-list", c.g_list, "component counts for benchmark mixtures");
    app.add_flag("--tail-robustness", c.tail_robustness);

    for (const char* name : {"simulate", "fit", "tune", "adjust", "refit", "bootstrap", "benchmark", "diagnose",
                             "pipeline"}) {
        app.add_subcommand(name);
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        out << app.help();
        return ok;
    } catch (const CLI::ParseError& e) {
        return report_error(err, "", "parse", e.what(), parse_error);
    }
    c.command = app.get_subcommands().front()->get_name();

    try {
        return dispatch(c, out);
    } catch (const DegenerateTruncation& e) {
        return report_error(err, c.out_dir, "fit", e.what(), fit_failure);
    } catch (const FitFailure& e) {
        return report_error(err, c.out_dir, "fit", e.what(), fit_failure);
    } catch (const IoError& e) {
        return report_error(err, c.out_dir, "io", e.what(), io_error);
    } catch (const SchemaError& e) {
        return report_error(err, c.out_dir, "parse", e.what(), parse_error);
    } catch (const IngestError& e) {
        return report_error(err, c.out_dir, "parse", e.what(), parse_error);
    } catch (const DomainError& e) {
        return report_error(err, c.out_dir, "parse", e.what(), parse_error);
    } catch (const std::exception& e) {
        return report_error(err, c.out_dir, "fit", e.what(), fit_failure);
    }
}

}  // namespace mcreg::cli
