#include "mcreg/diagnostics.hpp"

#include "mcreg/dists.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <numbers>
#include <string>
#include <unordered_map>

namespace mcreg {

RowGroups group_rows(const Dataset& data, std::size_t max_groups) {
    std::unordered_map<std::string, std::size_t> index;
    std::vector<Eigen::Index> rep;
    std::vector<double> count;
    std::string key;
    for (Eigen::Index i = 0; i < data.n(); ++i) {
        key.clear();
        for (const DesignMatrix* d : {&data.mix(), &data.body(), &data.tail()}) {
            for (Eigen::Index c = 0; c < d->D(); ++c) {
                const auto bits = std::bit_cast<std::uint64_t>(d->X(i, c));
                key.append(reinterpret_cast<const char*>(&bits), sizeof bits);
            }
            key.push_back('|');
        }
        auto [it, fresh] = index.emplace(key, rep.size());
        if (fresh) {
            rep.push_back(i);
            count.push_back(1.0);
        } else {
            count[it->second] += 1.0;
        }
    }
    RowGroups out;
    const std::size_t stride = max_groups > 0 && rep.size() > max_groups ? (rep.size() + max_groups - 1) / max_groups : 1;
    double total = 0.0;
    for (std::size_t k = 0; k < rep.size(); k += stride) {
        out.representative.push_back(rep[k]);
        out.weight.push_back(count[k]);
        total += count[k];
    }
    for (double& w : out.weight) w /= total;
    return out;
}

double silverman_bandwidth(std::span<const double> x) {
    const auto n = x.size();
    if (n < 2) return 1.0;
    std::vector<double> s(x.begin(), x.end());
    std::sort(s.begin(), s.end());
    double mean = 0.0;
    for (double v : s) mean += v;
    mean /= static_cast<double>(n);
    double var = 0.0;
    for (double v : s) var += (v - mean) * (v - mean);
    const double sd = std::sqrt(var / static_cast<double>(n - 1));
    auto q = [&](double p) {
        const double h = p * static_cast<double>(n - 1);
        const auto lo = static_cast<std::size_t>(std::floor(h));
        const auto hi = std::min(lo + 1, n - 1);
        return s[lo] + (h - static_cast<double>(lo)) * (s[hi] - s[lo]);
    };
    const double iqr = q(0.75) - q(0.25);
    double spread = std::min(sd, iqr / 1.34);
    if (!(spread > 0.0)) spread = sd > 0.0 ? sd : 1.0;
    return 0.9 * spread * std::pow(static_cast<double>(n), -0.2);
}

std::vector<double> kde(std::span<const double> x, double h, std::span<const double> grid) {
    if (!(h > 0.0)) throw DomainError("kernel bandwidth must be positive");
    std::vector<double> s(x.begin(), x.end());
    std::sort(s.begin(), s.end());
    const double norm = 1.0 / (static_cast<double>(s.size()) * h * std::sqrt(2.0 * std::numbers::pi));
    std::vector<double> out(grid.size(), 0.0);
    for (std::size_t k = 0; k < grid.size(); ++k) {
        const double g = grid[k];
        auto lo = std::lower_bound(s.begin(), s.end(), g - 8.0 * h);
        auto hi = std::upper_bound(s.begin(), s.end(), g + 8.0 * h);
        double acc = 0.0;
        for (auto it = lo; it != hi; ++it) {
            const double u = (g - *it) / h;
            acc += std::exp(-0.5 * u * u);
        }
        out[k] = acc * norm;
    }
    return out;
}

std::vector<double> local_maxima(std::span<const double> grid, std::span<const double> values,
                                 double min_relative_height) {
    std::vector<double> out;
    if (values.size() < 3) return out;
    const double top = *std::max_element(values.begin(), values.end());
    const double floor = min_relative_height * top;
    for (std::size_t k = 1; k + 1 < values.size(); ++k) {
        if (!(values[k] > values[k - 1])) continue;
        // Plateau: walk to its end and take the midpoint.
        std::size_t e = k;
        while (e + 1 < values.size() && values[e + 1] == values[k]) ++e;
        if (e + 1 < values.size() && values[e + 1] < values[k] && values[k] >= floor && values[k] > 0.0)
            out.push_back(0.5 * (grid[k] + grid[e]));
        k = e;
    }
    return out;
}

std::vector<double> linspace(double lo, double hi, int n) {
    std::vector<double> v(static_cast<std::size_t>(std::max(n, 0)));
    if (n == 1) v[0] = lo;
    for (int k = 0; k < n && n > 1; ++k) v[static_cast<std::size_t>(k)] = lo + (hi - lo) * k / (n - 1);
    return v;
}

namespace {

struct GroupModel {
    RowModel m;
    std::vector<double> logF;  // log F_j(tau)
    double w;
};

std::vector<GroupModel> group_models(const ParamSet& p, const Dataset& data, const RowGroups& groups) {
    std::vector<GroupModel> out;
    out.reserve(groups.representative.size());
    for (std::size_t k = 0; k < groups.representative.size(); ++k) {
        GroupModel gm{row_model(p, data, groups.representative[k]), {}, groups.weight[k]};
        for (int j = 0; j < p.g(); ++j) {
            const double F = gamma_cdf(p.tau(), {gm.m.mu(j), p.phi()(j)});
            if (F < kMinConditioningProb)
                throw DegenerateTruncation("component " + std::to_string(j + 1) + " has no mass below the threshold");
            gm.logF.push_back(std::log(F));
        }
        out.push_back(std::move(gm));
    }
    return out;
}

double pdf_at(double y, const GroupModel& gm, const ParamSet& p) {
    if (y > p.tau()) return std::exp(gm.m.log_pi(p.g()) + trunc_lomax_logpdf(y, {p.theta(), gm.m.eta}, p.tau()));
    double s = 0.0;
    for (int j = 0; j < p.g(); ++j)
        s += std::exp(gm.m.log_pi(j) + gamma_logpdf(y, {gm.m.mu(j), p.phi()(j)}) - gm.logF[static_cast<std::size_t>(j)]);
    return s;
}

}  // namespace

std::vector<double> marginal_pdf(const ParamSet& p, const Dataset& data, const RowGroups& groups,
                                 std::span<const double> grid) {
    const auto gms = group_models(p, data, groups);
    std::vector<double> out(grid.size(), 0.0);
    for (std::size_t k = 0; k < grid.size(); ++k) {
        if (!(grid[k] > 0.0)) continue;
        double s = 0.0;
        for (const auto& gm : gms) s += gm.w * pdf_at(grid[k], gm, p);
        out[k] = s;
    }
    return out;
}

double marginal_cdf(const ParamSet& p, const Dataset& data, const RowGroups& groups, double y) {
    double s = 0.0;
    for (std::size_t k = 0; k < groups.representative.size(); ++k)
        s += groups.weight[k] * composite_cdf(y, row_model(p, data, groups.representative[k]), p);
    return s;
}

double marginal_quantile(const ParamSet& p, const Dataset& data, const RowGroups& groups, double prob) {
    if (!(prob > 0.0 && prob < 1.0)) throw DomainError("quantile probability must lie in (0, 1)");
    double lo = 0.0, hi = p.tau();
    while (marginal_cdf(p, data, groups, hi) < prob) {
        lo = hi;
        hi *= 2.0;
        if (!std::isfinite(hi)) return hi;
    }
    for (int it = 0; it < 200 && hi - lo > 1e-12 * hi; ++it) {
        const double mid = 0.5 * (lo + hi);
        (marginal_cdf(p, data, groups, mid) < prob ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
}

double ks_statistic(std::vector<double> sample, const std::function<double(double)>& cdf) {
    std::sort(sample.begin(), sample.end());
    const double n = static_cast<double>(sample.size());
    double d = 0.0;
    for (std::size_t i = 0; i < sample.size(); ++i) {
        const double F = cdf(sample[i]);
        d = std::max({d, F - static_cast<double>(i) / n, static_cast<double>(i + 1) / n - F});
    }
    return d;
}

DensityCurve density_curve(const ParamSet& p, const Dataset& data, int points) {
    DensityCurve c;
    if (data.n() == 0) return c;
    std::vector<double> y(data.y().data(), data.y().data() + data.n());
    std::sort(y.begin(), y.end());
    // The plotted range stops at the 99th percentile, past which the tail is better read on log-log axes.
    const double top = y[static_cast<std::size_t>(0.99 * static_cast<double>(y.size() - 1))];
    c.y = linspace(top / points, top, points);
    c.empirical = kde(y, silverman_bandwidth(y), c.y);
    c.fitted = marginal_pdf(p, data, group_rows(data), c.y);
    return c;
}

QQPoints qq_points(const ParamSet& p, const Dataset& data, int points) {
    QQPoints q;
    if (data.n() == 0) return q;
    std::vector<double> y(data.y().data(), data.y().data() + data.n());
    std::sort(y.begin(), y.end());
    const auto groups = group_rows(data);
    const int m = std::min<int>(points, static_cast<int>(y.size()));
    for (int k = 0; k < m; ++k) {
        const double prob = (k + 0.5) / m;
        const auto idx = static_cast<std::size_t>(std::min<double>(static_cast<double>(y.size() - 1),
                                                                   std::floor(prob * static_cast<double>(y.size()))));
        q.prob.push_back(prob);
        q.empirical.push_back(y[idx]);
        q.model.push_back(marginal_quantile(p, data, groups, prob));
    }
    return q;
}

LogLogPoints loglog_points(const ParamSet& p, const Dataset& data, int points) {
    LogLogPoints l;
    if (data.n() == 0) return l;
    std::vector<double> y(data.y().data(), data.y().data() + data.n());
    std::sort(y.begin(), y.end());
    const auto groups = group_rows(data);
    const auto n = y.size();
    const int m = std::min<int>(points, static_cast<int>(n));
    for (int k = 0; k < m; ++k) {
        // Log-spaced ranks so the tail is well covered.
        const double frac = std::pow(static_cast<double>(n), -static_cast<double>(k) / m);
        const auto idx = std::min(n - 1, static_cast<std::size_t>(std::floor((1.0 - frac) * static_cast<double>(n))));
        const double sf_emp = static_cast<double>(n - idx) / static_cast<double>(n);
        const double sf_fit = 1.0 - marginal_cdf(p, data, groups, y[idx]);
        l.log_y.push_back(std::log(y[idx]));
        l.empirical_log_sf.push_back(std::log(sf_emp));
        l.fitted_log_sf.push_back(sf_fit > 0.0 ? std::log(sf_fit) : -INFINITY);
    }
    return l;
}

MeanExcessPoints mean_excess(std::span<const double> y, int points, Eigen::Index min_count) {
    MeanExcessPoints me;
    std::vector<double> s(y.begin(), y.end());
    std::sort(s.begin(), s.end());
    const auto n = s.size();
    if (n == 0) return me;
    // Suffix sums give every e(u) in O(1).
    std::vector<double> suffix(n + 1, 0.0);
    for (std::size_t i = n; i-- > 0;) suffix[i] = suffix[i + 1] + s[i];
    for (int k = 0; k < points; ++k) {
        const auto idx = static_cast<std::size_t>(std::floor(static_cast<double>(k) / points * static_cast<double>(n)));
        const double u = s[idx];
        const auto first = static_cast<std::size_t>(std::upper_bound(s.begin(), s.end(), u) - s.begin());
        const auto cnt = static_cast<Eigen::Index>(n - first);
        if (cnt < min_count) break;
        me.u.push_back(u);
        me.excess.push_back((suffix[first] - static_cast<double>(cnt) * u) / static_cast<double>(cnt));
        me.count.push_back(cnt);
    }
    return me;
}

}  // namespace mcreg
