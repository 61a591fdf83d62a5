#include "mcreg/inference.hpp"

#include "mcreg/dists.hpp"
#include "mcreg/parallel.hpp"
#include "mcreg/simulate.hpp"

#include <boost/math/special_functions/erf.hpp>

#include <algorithm>
#include <cmath>
#include <limits>

namespace mcreg {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

Eigen::Index vector_size(const ParamSet& p) {
    return p.d_mix() * p.g() + p.d_body() * p.g() + p.g() + 1 + p.d_tail();
}

// Indices of param_vector holding log phi or log theta.
bool is_log_scale(const ParamSet& p, Eigen::Index k) {
    const Eigen::Index start = p.d_mix() * p.g() + p.d_body() * p.g();
    return k >= start && k <= start + p.g();
}

double normal_quantile(double prob) { return -std::sqrt(2.0) * boost::math::erfc_inv(2.0 * prob); }

std::vector<double> natural_values(const ParamSet& q, const Eigen::VectorXd& v) {
    std::vector<double> out(static_cast<std::size_t>(v.size()));
    for (Eigen::Index k = 0; k < v.size(); ++k) out[static_cast<std::size_t>(k)] = is_log_scale(q, k) ? std::exp(v(k)) : v(k);
    return out;
}

// Labels of the pinned tail mixing column, derived from the component-1 alpha labels.
std::vector<std::string> pinned_labels(const ParamSet& p, const std::vector<std::string>& labels) {
    std::vector<std::string> out;
    for (Eigen::Index c = 0; c < p.d_mix(); ++c) {
        std::string l = labels[static_cast<std::size_t>(c)];
        const auto comma = l.rfind(',');
        out.push_back(comma == std::string::npos ? l + "[tail]" : l.substr(0, comma) + ",tail]");
    }
    return out;
}

}  // namespace

Eigen::VectorXd param_vector(const ParamSet& p) {
    Eigen::VectorXd v(vector_size(p));
    Eigen::Index k = 0;
    for (int j = 0; j < p.g(); ++j)
        for (Eigen::Index c = 0; c < p.d_mix(); ++c) v(k++) = p.alpha()(c, j);
    for (int j = 0; j < p.g(); ++j)
        for (Eigen::Index c = 0; c < p.d_body(); ++c) v(k++) = p.beta()(c, j);
    for (int j = 0; j < p.g(); ++j) v(k++) = std::log(p.phi()(j));
    v(k++) = std::log(p.theta());
    for (Eigen::Index c = 0; c < p.d_tail(); ++c) v(k++) = p.nu()(c);
    return v;
}

ParamSet param_from_vector(const Eigen::VectorXd& v, const ParamSet& layout) {
    if (v.size() != vector_size(layout)) throw DomainError("parameter vector has the wrong length");
    ParamSet p = layout;
    Eigen::Index k = 0;
    for (int j = 0; j < p.g(); ++j)
        for (Eigen::Index c = 0; c < p.d_mix(); ++c) p.alpha_free()(c, j) = v(k++);
    for (int j = 0; j < p.g(); ++j)
        for (Eigen::Index c = 0; c < p.d_body(); ++c) p.beta()(c, j) = v(k++);
    for (int j = 0; j < p.g(); ++j) p.phi()(j) = std::exp(v(k++));
    p.set_theta(std::exp(v(k++)));
    for (Eigen::Index c = 0; c < p.d_tail(); ++c) p.nu()(c) = v(k++);
    return p;
}

std::vector<std::string> param_labels(const ParamSet& p, const std::vector<std::string>& mix_names,
                                      const std::vector<std::string>& body_names,
                                      const std::vector<std::string>& tail_names) {
    auto name = [](const std::vector<std::string>& names, Eigen::Index c) {
        return static_cast<std::size_t>(c) < names.size() ? names[static_cast<std::size_t>(c)] : "c" + std::to_string(c);
    };
    std::vector<std::string> out;
    for (int j = 0; j < p.g(); ++j)
        for (Eigen::Index c = 0; c < p.d_mix(); ++c)
            out.push_back("alpha[" + name(mix_names, c) + "," + std::to_string(j + 1) + "]");
    for (int j = 0; j < p.g(); ++j)
        for (Eigen::Index c = 0; c < p.d_body(); ++c)
            out.push_back("beta[" + name(body_names, c) + "," + std::to_string(j + 1) + "]");
    for (int j = 0; j < p.g(); ++j) out.push_back("phi[" + std::to_string(j + 1) + "]");
    out.push_back("theta");
    for (Eigen::Index c = 0; c < p.d_tail(); ++c) out.push_back("nu[" + name(tail_names, c) + "]");
    return out;
}

FisherInfo fisher_info_reduced(const ParamSet& p, const Dataset& data) {
    const Eigen::VectorXd x0 = param_vector(p);
    const Eigen::Index P = x0.size();
    Eigen::VectorXd h(P);
    for (Eigen::Index q = 0; q < P; ++q) h(q) = std::max(1e-5, 1e-5 * std::abs(x0(q)));
    auto f = [&](const Eigen::VectorXd& x) { return observed_loglik(data, param_from_vector(x, p)); };

    const double f0 = f(x0);
    Eigen::MatrixXd H(P, P);
    for (Eigen::Index i = 0; i < P; ++i) {
        Eigen::VectorXd xp = x0, xm = x0;
        xp(i) += h(i);
        xm(i) -= h(i);
        H(i, i) = (f(xp) - 2.0 * f0 + f(xm)) / (h(i) * h(i));
        for (Eigen::Index j = i + 1; j < P; ++j) {
            Eigen::VectorXd a = x0, b = x0, c = x0, d = x0;
            a(i) += h(i), a(j) += h(j);
            b(i) += h(i), b(j) -= h(j);
            c(i) -= h(i), c(j) += h(j);
            d(i) -= h(i), d(j) -= h(j);
            H(i, j) = (f(a) - f(b) - f(c) + f(d)) / (4.0 * h(i) * h(j));
            H(j, i) = H(i, j);
        }
    }
    FisherInfo fi;
    fi.hessian = H;
    const double scale = H.cwiseAbs().maxCoeff();
    fi.asymmetry = scale > 0.0 ? (H - H.transpose()).cwiseAbs().maxCoeff() / scale : 0.0;
    fi.info = -0.5 * (H + H.transpose()) / static_cast<double>(data.n());

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(fi.info);
    const Eigen::VectorXd ev = es.eigenvalues();
    const double top = ev.cwiseAbs().maxCoeff();
    const double cut = 1e-10 * std::max(top, 1e-300);
    fi.singular = ev.minCoeff() <= cut;
    Eigen::VectorXd inv = Eigen::VectorXd::Zero(P);
    for (Eigen::Index k = 0; k < P; ++k)
        if (ev(k) > cut) inv(k) = 1.0 / ev(k);
    fi.covariance = es.eigenvectors() * inv.asDiagonal() * es.eigenvectors().transpose();
    if (fi.singular) fi.warnings.push_back("information matrix is not positive definite; pseudo-inverse used");
    return fi;
}

std::string_view to_string(CIMethod m) { return m == CIMethod::wald ? "wald" : "bootstrap"; }

const CIRow* CITable::find(std::string_view quantity) const {
    for (const auto& r : rows)
        if (r.quantity == quantity) return &r;
    return nullptr;
}

std::vector<DerivedQuantity> standard_derived(const Dataset& data, const std::vector<Eigen::Index>& rows) {
    std::vector<DerivedQuantity> out;
    for (Eigen::Index i : rows) {
        if (i < 0 || i >= data.n()) throw DomainError("derived-quantity row out of range");
        const Eigen::VectorXd xm = data.mix().X.row(i).transpose();
        const Eigen::VectorXd xb = data.body().X.row(i).transpose();
        const Eigen::VectorXd xt = data.tail().X.row(i).transpose();
        const std::string tag = "[row " + std::to_string(i) + "]";
        out.push_back({"pi_tail" + tag, [=](const ParamSet& q) {
                           return std::exp(row_model(q, xm, xb, xt).log_pi(q.g()));
                       }});
        out.push_back({"mean" + tag, [=](const ParamSet& q) { return composite_mean(row_model(q, xm, xb, xt), q); }});
    }
    return out;
}

double empirical_quantile(const std::vector<double>& sorted, double prob) {
    if (sorted.empty()) return kNaN;
    const double h = std::clamp(prob, 0.0, 1.0) * static_cast<double>(sorted.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(h));
    const auto hi = std::min(lo + 1, sorted.size() - 1);
    if (lo == hi || sorted[lo] == sorted[hi]) return sorted[lo];
    return sorted[lo] + (h - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

CITable wald_ci(const ParamSet& p, const Dataset& data, const FisherInfo& info, const WaldConfig& cfg,
                const std::vector<std::string>& labels_in, const std::vector<DerivedQuantity>& derived) {
    if (!(cfg.level >= 0.0 && cfg.level < 1.0)) throw DomainError("confidence level must lie in [0, 1)");
    const Eigen::VectorXd x0 = param_vector(p);
    const Eigen::Index P = x0.size();
    if (info.covariance.rows() != P) throw DomainError("information matrix does not match the parameters");
    const auto labels = labels_in.empty() ? param_labels(p) : labels_in;
    const double n = static_cast<double>(data.n());
    const double z = normal_quantile(0.5 + 0.5 * cfg.level);
    const bool reliable = !info.singular;

    CITable t;
    t.warnings = info.warnings;
    for (Eigen::Index k = 0; k < P; ++k) {
        const double se = std::sqrt(std::max(info.covariance(k, k), 0.0) / n);
        double lo = x0(k) - z * se, hi = x0(k) + z * se, pt = x0(k);
        if (is_log_scale(p, k)) {
            lo = std::exp(lo);
            hi = std::exp(hi);
            pt = std::exp(pt);
        }
        t.rows.push_back({labels[static_cast<std::size_t>(k)], pt, lo, hi, cfg.level, CIMethod::wald, reliable});
    }
    for (const auto& l : pinned_labels(p, labels)) t.rows.push_back({l, 0.0, 0.0, 0.0, cfg.level, CIMethod::wald, true});

    if (!derived.empty()) {
        Eigen::MatrixXd S = info.covariance / n;
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(S);
        const Eigen::MatrixXd L = es.eigenvectors() * es.eigenvalues().cwiseMax(0.0).cwiseSqrt().asDiagonal();
        Rng rng = make_rng(cfg.seed, "wald");
        std::vector<std::vector<double>> vals(derived.size());
        Eigen::VectorXd zv(P);
        for (int d = 0; d < cfg.draws; ++d) {
            for (Eigen::Index k = 0; k < P; ++k) zv(k) = standard_normal(rng);
            const ParamSet q = param_from_vector(x0 + L * zv, p);
            for (std::size_t m = 0; m < derived.size(); ++m) {
                double v = kNaN;
                try {
                    v = derived[m].eval(q);
                } catch (const Error&) {
                }
                if (!std::isnan(v)) vals[m].push_back(v);
            }
        }
        for (std::size_t m = 0; m < derived.size(); ++m) {
            auto& s = vals[m];
            std::sort(s.begin(), s.end());
            const double pt = derived[m].eval(p);
            const double a = 0.5 - 0.5 * cfg.level;
            double lo = empirical_quantile(s, a), hi = empirical_quantile(s, 1.0 - a);
            lo = std::min(lo, pt);
            hi = std::max(hi, pt);
            const bool ok = reliable && static_cast<int>(s.size()) * 10 >= cfg.draws * 9;
            t.rows.push_back({derived[m].label, pt, lo, hi, cfg.level, CIMethod::wald, ok});
        }
    }
    return t;
}

CITable bootstrap_ci(const ParamSet& p, const Dataset& data, const BootstrapConfig& cfg,
                     const std::vector<std::string>& labels_in, const std::vector<DerivedQuantity>& derived) {
    if (cfg.B < 1) throw DomainError("bootstrap needs at least one replicate");
    if (!(cfg.level >= 0.0 && cfg.level < 1.0)) throw DomainError("confidence level must lie in [0, 1)");
    const auto labels = labels_in.empty() ? param_labels(p) : labels_in;
    const Eigen::VectorXd x0 = param_vector(p);
    const auto P = static_cast<std::size_t>(x0.size());
    const std::size_t Q = P + derived.size();

    std::vector<std::vector<double>> rep(static_cast<std::size_t>(cfg.B));
    parallel_for(static_cast<std::size_t>(cfg.B), cfg.threads, [&](std::size_t b) {
        Rng rng = make_rng(cfg.seed, "bootstrap", b);
        try {
            const Dataset db = data.with_y(simulate_response(data, p, rng));
            FitConfig fc = cfg.fit;
            fc.seed = derive_seed(cfg.seed, "bootstrap-fit", b);
            const FitReport fit = fit_gem(db, p.g(), p.tau(), PenaltySet{}, fc, p);
            if (fit.failed) return;
            std::vector<double> v = natural_values(fit.params, param_vector(fit.params));
            for (const auto& d : derived) v.push_back(d.eval(fit.params));
            rep[b] = std::move(v);
        } catch (const Error&) {
        }
    });

    CITable t;
    std::vector<std::vector<double>> cols(Q);
    for (const auto& r : rep) {
        if (r.size() != Q) {
            ++t.failures;
            continue;
        }
        ++t.replicates;
        for (std::size_t q = 0; q < Q; ++q) cols[q].push_back(r[q]);
    }
    const bool reliable = t.failures <= cfg.max_failure_rate * cfg.B;
    if (!reliable)
        t.warnings.push_back("bootstrap unreliable: " + std::to_string(t.failures) + " of " + std::to_string(cfg.B) +
                             " refits failed");
    const double a = 0.5 - 0.5 * cfg.level;
    const std::vector<double> point = natural_values(p, x0);
    for (std::size_t q = 0; q < Q; ++q) {
        auto& s = cols[q];
        std::sort(s.begin(), s.end());
        const std::string label = q < P ? labels[q] : derived[q - P].label;
        const double pt = q < P ? point[q] : derived[q - P].eval(p);
        t.rows.push_back({label, pt, empirical_quantile(s, a), empirical_quantile(s, 1.0 - a), cfg.level,
                          CIMethod::bootstrap, reliable && !s.empty()});
    }
    for (const auto& l : pinned_labels(p, labels)) t.rows.push_back({l, 0.0, 0.0, 0.0, cfg.level, CIMethod::bootstrap, true});
    return t;
}

}  // namespace mcreg
