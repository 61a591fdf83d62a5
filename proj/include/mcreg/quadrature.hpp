#pragma once

#include <algorithm>
#include <cmath>
#include <queue>
#include <vector>

namespace mcreg::quad {

/// Two integrals evaluated on the same nodes.
struct Pair {
    double v0 = 0.0;
    double v1 = 0.0;
};

extern const double kKronrodNodes[8];
extern const double kKronrodWeights[8];
extern const double kGaussWeights[4];

struct Segment {
    double a, b;
    Pair value, error;
    bool operator<(const Segment& o) const { return std::max(error.v0, error.v1) < std::max(o.error.v0, o.error.v1); }
};

template <class F>
Segment gk15(F& f, double a, double b) {
    const double c = 0.5 * (a + b), h = 0.5 * (b - a);
    Pair fc = f(c);
    Pair k{fc.v0 * kKronrodWeights[7], fc.v1 * kKronrodWeights[7]};
    Pair g{fc.v0 * kGaussWeights[3], fc.v1 * kGaussWeights[3]};
    for (int i = 0; i < 7; ++i) {
        const double dx = h * kKronrodNodes[i];
        Pair lo = f(c - dx), hi = f(c + dx);
        k.v0 += kKronrodWeights[i] * (lo.v0 + hi.v0);
        k.v1 += kKronrodWeights[i] * (lo.v1 + hi.v1);
        if (i % 2 == 1) {
            g.v0 += kGaussWeights[i / 2] * (lo.v0 + hi.v0);
            g.v1 += kGaussWeights[i / 2] * (lo.v1 + hi.v1);
        }
    }
    Segment s{a, b, {k.v0 * h, k.v1 * h}, {std::abs((k.v0 - g.v0) * h), std::abs((k.v1 - g.v1) * h)}};
    return s;
}

/// Globally adaptive Gauss-Kronrod over consecutive breakpoints.
/// Stops when err0 <= tol0 and err1 <= tol1 where tol_k = max(abs_tol, rel_tol*|v0|*scale1).
template <class F>
Pair integrate_pair(F f, const std::vector<double>& breaks, double rel_tol, double scale1 = 1.0, double abs_tol = 0.0,
                    int max_segments = 400) {
    std::priority_queue<Segment> heap;
    Pair total, err;
    for (std::size_t i = 0; i + 1 < breaks.size(); ++i) {
        if (!(breaks[i + 1] > breaks[i])) continue;
        Segment s = gk15(f, breaks[i], breaks[i + 1]);
        total.v0 += s.value.v0;
        total.v1 += s.value.v1;
        err.v0 += s.error.v0;
        err.v1 += s.error.v1;
        heap.push(s);
    }
    int segments = static_cast<int>(heap.size());
    while (!heap.empty() && segments < max_segments) {
        const double tol0 = std::max(abs_tol, rel_tol * std::abs(total.v0));
        const double tol1 = std::max(abs_tol, rel_tol * std::abs(total.v0) * scale1);
        if (err.v0 <= tol0 && err.v1 <= tol1) break;
        Segment s = heap.top();
        heap.pop();
        const double m = 0.5 * (s.a + s.b);
        Segment l = gk15(f, s.a, m), r = gk15(f, m, s.b);
        total.v0 += l.value.v0 + r.value.v0 - s.value.v0;
        total.v1 += l.value.v1 + r.value.v1 - s.value.v1;
        err.v0 += l.error.v0 + r.error.v0 - s.error.v0;
        err.v1 += l.error.v1 + r.error.v1 - s.error.v1;
        heap.push(l);
        heap.push(r);
        ++segments;
    }
    return total;
}

}  // namespace mcreg::quad
