#include "mcreg/diagnostics.hpp"
#include "mcreg/gem.hpp"

#include <algorithm>
#include <cmath>

namespace mcreg {

namespace {

bool nodes_matched(const std::vector<double>& empirical, const std::vector<double>& fitted) {
    for (double e : empirical) {
        const bool hit = std::any_of(fitted.begin(), fitted.end(), [&](double f) { return std::abs(f - e) <= 0.15 * e; });
        if (!hit) return false;
    }
    return true;
}

}  // namespace

ChooseGResult choose_g(const Dataset& data_in, double tau, const std::vector<int>& candidate_gs,
                       double node_threshold, const FitConfig& config, double min_relative_height) {
    if (candidate_gs.empty()) throw DomainError("candidate list for g is empty");
    if (!std::is_sorted(candidate_gs.begin(), candidate_gs.end()) || candidate_gs.front() < 1)
        throw DomainError("candidate g values must be positive and ascending");
    if (!(node_threshold < tau)) throw DomainError("node threshold must lie below tau");
    Dataset data = data_in;
    if (data.tau() != tau) data.set_tau(tau);

    std::vector<double> body;
    for (Eigen::Index i = 0; i < data.n(); ++i)
        if (data.in_body(i)) body.push_back(data.y()(i));
    if (body.size() < 2) throw DomainError("too few body observations to locate density nodes");

    const double lo = std::max(node_threshold, 0.0);
    const auto grid = linspace(lo + (tau - lo) / 2000.0, tau, 2000);
    const auto emp = kde(body, silverman_bandwidth(body), grid);

    ChooseGResult res;
    res.empirical_nodes = local_maxima(grid, emp, min_relative_height);
    const RowGroups groups = group_rows(data);
    PenaltySet none;

    int chosen = -1;
    for (int g : candidate_gs) {
        FitReport fit = fit_gem(data, g, tau, none, config);
        std::vector<double> nodes;
        bool ok = !fit.failed || fit.iterations > 0;
        if (ok) {
            try {
                const auto fitted = marginal_pdf(fit.params, data, groups, grid);
                nodes = local_maxima(grid, fitted, min_relative_height);
            } catch (const Error&) {
                ok = false;
            }
        }
        const bool m = ok && nodes_matched(res.empirical_nodes, nodes);
        res.gs.push_back(g);
        res.fitted_nodes.push_back(std::move(nodes));
        res.match.push_back(m);
        res.loglik.push_back(fit.loglik);
        res.aic.push_back(fit.aic);
        res.bic.push_back(fit.bic);
        res.df.push_back(fit.df);
        if (m && chosen < 0) chosen = g;
    }
    res.matched = chosen >= 0;
    res.g = res.matched ? chosen : candidate_gs.back();
    return res;
}

}  // namespace mcreg
