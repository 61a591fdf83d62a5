#include "mcreg/gem.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace mcreg {

namespace {

struct Clustering {
    std::vector<double> centers;
    std::vector<int> label;
    double sse = std::numeric_limits<double>::infinity();
};

// k-means++ seeding on sorted 1-D data.
std::vector<double> seed_centers(const std::vector<double>& x, int k, Rng& rng) {
    std::vector<double> c;
    c.push_back(x[uniform_index(rng, x.size())]);
    std::vector<double> d2(x.size());
    while (static_cast<int>(c.size()) < k) {
        double total = 0.0;
        for (std::size_t i = 0; i < x.size(); ++i) {
            double best = std::numeric_limits<double>::infinity();
            for (double ci : c) best = std::min(best, (x[i] - ci) * (x[i] - ci));
            d2[i] = best;
            total += best;
        }
        if (!(total > 0.0)) {
            c.push_back(x[uniform_index(rng, x.size())]);
            continue;
        }
        double u = uniform01(rng) * total;
        std::size_t pick = x.size() - 1;
        for (std::size_t i = 0; i < x.size(); ++i) {
            u -= d2[i];
            if (u <= 0.0) {
                pick = i;
                break;
            }
        }
        c.push_back(x[pick]);
    }
    return c;
}

Clustering lloyd(const std::vector<double>& x, std::vector<double> centers) {
    const int k = static_cast<int>(centers.size());
    Clustering cl;
    cl.label.assign(x.size(), -1);
    for (int iter = 0; iter < 200; ++iter) {
        bool changed = false;
        for (std::size_t i = 0; i < x.size(); ++i) {
            int best = 0;
            double bd = std::abs(x[i] - centers[0]);
            for (int j = 1; j < k; ++j) {
                const double d = std::abs(x[i] - centers[static_cast<std::size_t>(j)]);
                if (d < bd) {
                    bd = d;
                    best = j;
                }
            }
            if (cl.label[i] != best) {
                cl.label[i] = best;
                changed = true;
            }
        }
        std::vector<double> sum(static_cast<std::size_t>(k), 0.0);
        std::vector<int> cnt(static_cast<std::size_t>(k), 0);
        for (std::size_t i = 0; i < x.size(); ++i) {
            sum[static_cast<std::size_t>(cl.label[i])] += x[i];
            ++cnt[static_cast<std::size_t>(cl.label[i])];
        }
        for (int j = 0; j < k; ++j)
            if (cnt[static_cast<std::size_t>(j)] > 0)
                centers[static_cast<std::size_t>(j)] = sum[static_cast<std::size_t>(j)] / cnt[static_cast<std::size_t>(j)];
        if (!changed) break;
    }
    cl.sse = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double d = x[i] - centers[static_cast<std::size_t>(cl.label[i])];
        cl.sse += d * d;
    }
    cl.centers = std::move(centers);
    return cl;
}

int smallest_cluster(const Clustering& cl, int k) {
    std::vector<int> cnt(static_cast<std::size_t>(k), 0);
    for (int l : cl.label) ++cnt[static_cast<std::size_t>(l)];
    int worst = -1;
    for (int j = 0; j < k; ++j)
        if (cnt[static_cast<std::size_t>(j)] < 2 && (worst < 0 || cnt[static_cast<std::size_t>(j)] < cnt[static_cast<std::size_t>(worst)]))
            worst = j;
    return worst;
}

Clustering best_of_restarts(const std::vector<double>& x, int k, Rng& rng, int restarts) {
    Clustering best;
    for (int r = 0; r < restarts; ++r) {
        Clustering cl = lloyd(x, seed_centers(x, k, rng));
        if (cl.sse < best.sse) best = std::move(cl);
    }
    return best;
}

// Merge clusters with fewer than two points into the nearest remaining cluster.
Clustering merge_small(Clustering cl, const std::vector<double>& x) {
    for (;;) {
        const int k = static_cast<int>(cl.centers.size());
        const int s = smallest_cluster(cl, k);
        if (s < 0 || k == 1) break;
        int target = -1;
        double bd = std::numeric_limits<double>::infinity();
        for (int j = 0; j < k; ++j) {
            if (j == s) continue;
            const double d = std::abs(cl.centers[static_cast<std::size_t>(j)] - cl.centers[static_cast<std::size_t>(s)]);
            if (d < bd) {
                bd = d;
                target = j;
            }
        }
        cl.centers.erase(cl.centers.begin() + s);
        if (target > s) --target;
        for (int& l : cl.label) {
            if (l == s) l = target;
            else if (l > s) --l;
        }
        std::vector<double> sum(cl.centers.size(), 0.0);
        std::vector<int> cnt(cl.centers.size(), 0);
        for (std::size_t i = 0; i < x.size(); ++i) {
            sum[static_cast<std::size_t>(cl.label[i])] += x[i];
            ++cnt[static_cast<std::size_t>(cl.label[i])];
        }
        for (std::size_t j = 0; j < cl.centers.size(); ++j)
            if (cnt[j] > 0) cl.centers[j] = sum[j] / cnt[j];
    }
    return cl;
}

struct TailInit {
    double theta = 1.0;
    double eta = 1.0;
};

TailInit init_tail(const std::vector<double>& exc, double tau) {
    TailInit t{tau, 2.0};
    const auto nt = exc.size();
    if (nt == 0) return t;
    auto closed_form_eta = [&](double theta) {
        double s = 0.0;
        for (double y : exc) s += std::log((y + theta) / (tau + theta));
        return s > 0.0 ? static_cast<double>(nt) / s : 2.0;
    };
    if (nt < 3) {
        t.eta = closed_form_eta(tau);
        return t;
    }
    // Slope of the empirical log survival against log y.
    std::vector<double> ys = exc;
    std::sort(ys.begin(), ys.end());
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < nt; ++i) {
        const double lx = std::log(ys[i]);
        const double ly = std::log((static_cast<double>(nt - i) - 0.5) / static_cast<double>(nt));
        sx += lx;
        sy += ly;
        sxx += lx * lx;
        sxy += lx * ly;
    }
    const double m = static_cast<double>(nt);
    const double var = sxx - sx * sx / m;
    double eta = var > 0 ? -(sxy - sx * sy / m) / var : 2.0;
    if (!(eta > 0.05) || !std::isfinite(eta)) eta = 2.0;
    eta = std::min(eta, 50.0);
    const double med = nt % 2 ? ys[nt / 2] : 0.5 * (ys[nt / 2 - 1] + ys[nt / 2]);
    double theta = tau;
    for (int it = 0; it < 5; ++it) {
        const double r = std::pow(2.0, 1.0 / eta);
        theta = (med - tau * r) / (r - 1.0);
        theta = std::clamp(std::isfinite(theta) ? theta : tau, 1e-3 * tau, 1e2 * tau);
        eta = closed_form_eta(theta);
    }
    t.theta = theta;
    t.eta = eta;
    return t;
}

}  // namespace

ParamSet init_cmm(const Dataset& data, int g, double tau, Rng& rng) {
    if (g < 1) throw DomainError("component count g must be at least 1");
    std::vector<double> logy, exc;
    std::vector<double> ybody;
    for (Eigen::Index i = 0; i < data.n(); ++i) {
        const double y = data.y()(i);
        if (y <= tau) {
            ybody.push_back(y);
            logy.push_back(std::log(y));
        } else {
            exc.push_back(y);
        }
    }
    if (static_cast<int>(ybody.size()) < g)
        throw DomainError("need at least g body observations to initialize, have " + std::to_string(ybody.size()));

    Clustering cl = best_of_restarts(logy, g, rng, 10);
    for (int attempt = 0; attempt < 5 && smallest_cluster(cl, g) >= 0; ++attempt)
        cl = best_of_restarts(logy, g, rng, 10);
    cl = merge_small(std::move(cl), logy);
    const int k = static_cast<int>(cl.centers.size());

    std::vector<double> sum(static_cast<std::size_t>(k), 0.0), sum2(static_cast<std::size_t>(k), 0.0);
    std::vector<double> cnt(static_cast<std::size_t>(k), 0.0);
    for (std::size_t i = 0; i < ybody.size(); ++i) {
        const auto j = static_cast<std::size_t>(cl.label[i]);
        sum[j] += ybody[i];
        sum2[j] += ybody[i] * ybody[i];
        cnt[j] += 1.0;
    }
    struct Comp {
        double mu, phi, share;
    };
    std::vector<Comp> comps;
    for (int j = 0; j < k; ++j) {
        const auto jj = static_cast<std::size_t>(j);
        const double mean = sum[jj] / cnt[jj];
        const double var = std::max(0.0, sum2[jj] / cnt[jj] - mean * mean);
        double phi = var / (mean * mean);
        if (!(phi > 0.0)) phi = 1e-3;
        comps.push_back({mean, std::clamp(phi, 1e-6, 1e3), cnt[jj]});
    }
    std::sort(comps.begin(), comps.end(), [](const Comp& a, const Comp& b) { return a.mu < b.mu; });
    // Duplicate components when clusters had to be merged.
    while (static_cast<int>(comps.size()) < g) {
        auto big = std::max_element(comps.begin(), comps.end(), [](const Comp& a, const Comp& b) { return a.share < b.share; });
        Comp c = *big;
        big->share *= 0.5;
        c.share = big->share;
        c.mu *= 1.1;
        comps.push_back(c);
    }

    const double n = static_cast<double>(data.n());
    const double p_tail = std::max(static_cast<double>(exc.size()), 0.5) / n;
    const TailInit ti = init_tail(exc, tau);

    ParamSet p(g, data.mix().D(), data.body().D(), data.tail().D(), tau);
    for (int j = 0; j < g; ++j) {
        const Comp& c = comps[static_cast<std::size_t>(j)];
        p.alpha_free()(0, j) = std::log(c.share / n) - std::log(p_tail);
        p.beta()(0, j) = std::log(c.mu);
        p.phi()(j) = c.phi;
    }
    p.nu()(0) = std::log(ti.eta);
    p.set_theta(ti.theta);
    return p;
}

}  // namespace mcreg
