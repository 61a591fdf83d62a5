#include "mcreg/report.hpp"

#include "mcreg/io.hpp"

#include <charconv>
#include <cmath>
#include <sstream>

namespace mcreg {

using nlohmann::json;

namespace {

json matrix_json(const Eigen::MatrixXd& m) {
    json rows = json::array();
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
        json row = json::array();
        for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
        rows.push_back(std::move(row));
    }
    return rows;
}

Eigen::MatrixXd matrix_from(const json& j, Eigen::Index rows, Eigen::Index cols, const char* what) {
    if (!j.is_array() || static_cast<Eigen::Index>(j.size()) != rows)
        throw SchemaError(std::string("model field '") + what + "' has the wrong number of rows");
    Eigen::MatrixXd m(rows, cols);
    for (Eigen::Index r = 0; r < rows; ++r) {
        const json& row = j[static_cast<std::size_t>(r)];
        if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != cols)
            throw SchemaError(std::string("model field '") + what + "' has the wrong number of columns");
        for (Eigen::Index c = 0; c < cols; ++c) m(r, c) = row[static_cast<std::size_t>(c)].get<double>();
    }
    return m;
}

template <class T>
json vec_json(const std::vector<T>& v) {
    return json(v);
}

std::string join_row(const std::vector<std::string>& cells) {
    std::string s;
    for (std::size_t k = 0; k < cells.size(); ++k) {
        if (k) s += ',';
        const bool quote = cells[k].find_first_of(",\"\n") != std::string::npos;
        if (quote) {
            s += '"';
            for (char c : cells[k]) {
                if (c == '"') s += '"';
                s += c;
            }
            s += '"';
        } else {
            s += cells[k];
        }
    }
    return s + '\n';
}

}  // namespace

std::string format_double(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[64];
    const auto r = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, r.ptr);
}

ColumnNames column_names(const Dataset& data, const CovariateSchema& schema) {
    return {data.mix().column_names(schema), data.body().column_names(schema), data.tail().column_names(schema)};
}

json params_to_json(const ParamSet& p, const ColumnNames& names) {
    json j;
    j["g"] = p.g();
    j["tau"] = p.tau();
    j["theta"] = p.theta();
    j["alpha"] = matrix_json(p.alpha_free());
    j["beta"] = matrix_json(p.beta());
    j["phi"] = vec_json(std::vector<double>(p.phi().begin(), p.phi().end()));
    j["nu"] = vec_json(std::vector<double>(p.nu().begin(), p.nu().end()));
    if (!names.mixing.empty()) {
        j["columns"] = {{"mixing", names.mixing}, {"body", names.body}, {"tail", names.tail}};
    }
    return j;
}

ParamSet params_from_json(const json& j) {
    try {
        const int g = j.at("g").get<int>();
        if (g < 1) throw SchemaError("model g must be at least 1");
        const double tau = j.at("tau").get<double>();
        const json& a = j.at("alpha");
        const json& b = j.at("beta");
        const auto phi = j.at("phi").get<std::vector<double>>();
        const auto nu = j.at("nu").get<std::vector<double>>();
        const auto d_mix = static_cast<Eigen::Index>(a.size());
        const auto d_body = static_cast<Eigen::Index>(b.size());
        ParamSet p(g, d_mix, d_body, static_cast<Eigen::Index>(nu.size()), tau);
        p.alpha_free() = matrix_from(a, d_mix, g, "alpha");
        p.beta() = matrix_from(b, d_body, g, "beta");
        if (static_cast<int>(phi.size()) != g) throw SchemaError("model field 'phi' must have g entries");
        for (int k = 0; k < g; ++k) p.phi()(k) = phi[static_cast<std::size_t>(k)];
        for (std::size_t k = 0; k < nu.size(); ++k) p.nu()(static_cast<Eigen::Index>(k)) = nu[k];
        p.set_theta(j.at("theta").get<double>());
        p.validate();
        return p;
    } catch (const json::exception& e) {
        throw SchemaError(std::string("malformed model: ") + e.what());
    } catch (const DomainError& e) {
        throw SchemaError(std::string("invalid model: ") + e.what());
    }
}

void write_model(const std::filesystem::path& path, const ParamSet& p, const ColumnNames& names,
                 const json& config) {
    json j;
    j["version"] = kLibraryVersion;
    j["params"] = params_to_json(p, names);
    j["config"] = config;
    write_text(path, j.dump(2) + "\n");
}

ParamSet read_model(const std::filesystem::path& path) {
    json j;
    try {
        j = json::parse(read_text(path));
    } catch (const json::exception& e) {
        throw SchemaError("model file " + path.string() + " is not valid JSON: " + e.what());
    }
    return params_from_json(j.contains("params") ? j["params"] : j);
}

json fit_to_json(const FitReport& fit, const ColumnNames& names) {
    json j;
    j["params"] = params_to_json(fit.params, names);
    j["loglik"] = fit.loglik;
    j["penalized"] = fit.penalized;
    j["df"] = fit.df;
    j["aic"] = fit.aic;
    j["bic"] = fit.bic;
    j["iterations"] = fit.iterations;
    j["converged"] = fit.converged;
    j["monotone"] = fit.monotone;
    j["failed"] = fit.failed;
    j["message"] = fit.message;
    j["warnings"] = fit.warnings;
    j["trajectory"] = fit.trajectory;
    return j;
}

json adjust_to_json(const AdjustResult& r, const ColumnNames& names) {
    json audit = json::array();
    for (const auto& s : r.audit) {
        audit.push_back({{"part", to_string(s.part)},
                         {"delta", s.delta},
                         {"before", s.before},
                         {"after", s.after},
                         {"accepted", s.accepted},
                         {"merges", s.merges},
                         {"zeros", s.zeros}});
    }
    return {{"params", params_to_json(r.params, names)}, {"audit", audit}};
}

json tuning_to_json(const TuningResult& r) {
    json rows = json::array();
    for (const auto& t : r.rows) {
        rows.push_back({{"part", to_string(t.part)},
                        {"lambda", t.lambda},
                        {"partial_objective", t.partial_objective},
                        {"df", t.df},
                        {"criterion", t.criterion},
                        {"sd", t.sd}});
    }
    return {{"lambda", {{"mixing", r.lambda_mixing}, {"body", r.lambda_body}, {"tail", r.lambda_tail}}},
            {"rows", rows},
            {"warnings", r.warnings}};
}

json ci_to_json(const CITable& t) {
    json rows = json::array();
    for (const auto& c : t.rows) {
        rows.push_back({{"quantity", c.quantity},
                        {"point", c.point},
                        {"lower", c.lower},
                        {"upper", c.upper},
                        {"level", c.level},
                        {"method", to_string(c.method)},
                        {"reliable", c.reliable}});
    }
    return {{"rows", rows}, {"warnings", t.warnings}, {"replicates", t.replicates}, {"failures", t.failures}};
}

json benchmark_to_json(const BenchmarkResult& r) {
    json j{{"model", r.model},     {"df", r.df},         {"loglik", r.loglik},
           {"aic", r.aic},         {"bic", r.bic},       {"converged", r.converged},
           {"message", r.message}, {"params", json::object()}};
    for (std::size_t k = 0; k < r.params.size() && k < r.param_names.size(); ++k)
        j["params"][r.param_names[k]] = r.params[k];
    j["tail_index"] = r.tail_index ? json(*r.tail_index) : json(nullptr);
    return j;
}

json choose_g_to_json(const ChooseGResult& r) {
    json cands = json::array();
    for (std::size_t k = 0; k < r.gs.size(); ++k) {
        cands.push_back({{"g", r.gs[k]},
                         {"fitted_nodes", r.fitted_nodes[k]},
                         {"match", static_cast<bool>(r.match[k])},
                         {"loglik", r.loglik[k]},
                         {"aic", r.aic[k]},
                         {"bic", r.bic[k]},
                         {"df", r.df[k]}});
    }
    return {{"g", r.g}, {"matched", r.matched}, {"empirical_nodes", r.empirical_nodes}, {"candidates", cands}};
}

std::string ci_csv(const CITable& t) {
    std::string s = join_row({"quantity", "method", "level", "point", "lower", "upper", "reliable"});
    for (const auto& c : t.rows) {
        s += join_row({c.quantity, std::string(to_string(c.method)), format_double(c.level), format_double(c.point),
                       format_double(c.lower), format_double(c.upper), c.reliable ? "1" : "0"});
    }
    return s;
}

std::string tuning_csv(const TuningResult& r) {
    std::string s = join_row({"part", "lambda", "partial_objective", "df", "criterion", "sd", "selected"});
    for (const auto& t : r.rows) {
        s += join_row({std::string(to_string(t.part)), format_double(t.lambda), format_double(t.partial_objective),
                       std::to_string(t.df), format_double(t.criterion), format_double(t.sd),
                       t.lambda == r[t.part] ? "1" : "0"});
    }
    return s;
}

std::string benchmarks_csv(const std::vector<BenchmarkResult>& rows) {
    std::string s = join_row({"model", "df", "loglik", "aic", "bic", "tail_index", "converged", "message"});
    for (const auto& r : rows) {
        s += join_row({r.model, std::to_string(r.df), format_double(r.loglik), format_double(r.aic),
                       format_double(r.bic), r.tail_index ? format_double(*r.tail_index) : "",
                       r.converged ? "1" : "0", r.message});
    }
    return s;
}

std::string tail_robustness_csv(const TailRobustness& t) {
    std::string s = join_row({"g", "family", "tail_index", "ok"});
    for (const auto& r : t.rows)
        s += join_row({std::to_string(r.g), r.family, format_double(r.tail_index), r.ok ? "1" : "0"});
    s += join_row({"sd", "composite", format_double(t.sd_composite), "1"});
    s += join_row({"sd", "non-composite", format_double(t.sd_noncomposite), "1"});
    return s;
}

std::string density_csv(const DensityCurve& d) {
    std::string s = join_row({"y", "empirical", "fitted"});
    for (std::size_t k = 0; k < d.y.size(); ++k)
        s += join_row({format_double(d.y[k]), format_double(d.empirical[k]), format_double(d.fitted[k])});
    return s;
}

std::string qq_csv(const QQPoints& q) {
    std::string s = join_row({"prob", "empirical", "model"});
    for (std::size_t k = 0; k < q.prob.size(); ++k)
        s += join_row({format_double(q.prob[k]), format_double(q.empirical[k]), format_double(q.model[k])});
    return s;
}

std::string loglog_csv(const LogLogPoints& l) {
    std::string s = join_row({"log_y", "empirical_log_sf", "fitted_log_sf"});
    for (std::size_t k = 0; k < l.log_y.size(); ++k)
        s += join_row({format_double(l.log_y[k]), format_double(l.empirical_log_sf[k]),
                       format_double(l.fitted_log_sf[k])});
    return s;
}

std::string mean_excess_csv(const MeanExcessPoints& m) {
    std::string s = join_row({"u", "mean_excess", "count"});
    for (std::size_t k = 0; k < m.u.size(); ++k)
        s += join_row({format_double(m.u[k]), format_double(m.excess[k]), std::to_string(m.count[k])});
    return s;
}

}  // namespace mcreg
