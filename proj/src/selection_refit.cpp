#include "mcreg/selection.hpp"

#include <algorithm>
#include <map>

namespace mcreg {

namespace {

const DesignMatrix& part_design(const Dataset& data, Part part) {
    return part == Part::mixing ? data.mix() : part == Part::body ? data.body() : data.tail();
}

std::vector<std::vector<int>> part_pattern(const Eigen::MatrixXd& th, const DesignMatrix& d) {
    std::vector<std::vector<int>> out;
    // Rows of one variable that are bit-identical pool into one column; all-zero rows drop.
    std::map<int, std::vector<std::pair<Eigen::RowVectorXd, std::size_t>>> seen;
    for (int c = 0; c < static_cast<int>(d.columns.size()); ++c) {
        const ColumnOrigin& o = d.columns[static_cast<std::size_t>(c)];
        if (o.kind == ColumnKind::intercept) {
            out.push_back({c});
            continue;
        }
        if (th.row(c).isZero(0.0)) continue;
        auto& bucket = seen[o.variable];
        bool pooled = false;
        if (o.kind != ColumnKind::continuous) {
            for (auto& [row, slot] : bucket)
                if (row == th.row(c)) {
                    out[slot].push_back(c);
                    pooled = true;
                    break;
                }
        }
        if (!pooled) {
            bucket.emplace_back(th.row(c), out.size());
            out.push_back({c});
        }
    }
    return out;
}

DesignMatrix reduce_design(const DesignMatrix& d, const std::vector<std::vector<int>>& groups) {
    DesignMatrix r;
    r.X = Eigen::MatrixXd::Zero(d.n(), static_cast<Eigen::Index>(groups.size()));
    for (std::size_t k = 0; k < groups.size(); ++k) {
        const auto kk = static_cast<Eigen::Index>(k);
        ColumnOrigin o = d.columns[static_cast<std::size_t>(groups[k].front())];
        o.levels.clear();
        o.sources.clear();
        for (int c : groups[k]) {
            r.X.col(kk) += d.X.col(c);
            const ColumnOrigin& s = d.columns[static_cast<std::size_t>(c)];
            o.levels.insert(o.levels.end(), s.levels.begin(), s.levels.end());
            o.sources.insert(o.sources.end(), s.sources.begin(), s.sources.end());
        }
        if (groups[k].size() > 1) o.kind = ColumnKind::pooled;
        r.columns.push_back(std::move(o));
    }
    return r;
}

}  // namespace

Reduction reduction_pattern(const ParamSet& adjusted, const Dataset& data) {
    Reduction r;
    for (Part part : {Part::mixing, Part::body, Part::tail})
        r[part] = part_pattern(part_coefficients(adjusted, part), part_design(data, part));
    return r;
}

Dataset apply_reduction(const Dataset& full, const Reduction& r) {
    return Dataset(full.y(), reduce_design(full.mix(), r.mixing), reduce_design(full.body(), r.body),
                   reduce_design(full.tail(), r.tail), full.tau());
}

ParamSet reduce_params(const ParamSet& full, const Reduction& r) {
    ParamSet out(full.g(), static_cast<Eigen::Index>(r.mixing.size()), static_cast<Eigen::Index>(r.body.size()),
                 static_cast<Eigen::Index>(r.tail.size()), full.tau());
    for (Part part : {Part::mixing, Part::body, Part::tail}) {
        const Eigen::MatrixXd th = part_coefficients(full, part);
        const auto& groups = r[part];
        Eigen::MatrixXd red(static_cast<Eigen::Index>(groups.size()), th.cols());
        for (std::size_t k = 0; k < groups.size(); ++k) red.row(static_cast<Eigen::Index>(k)) = th.row(groups[k].front());
        set_part_coefficients(out, part, red);
    }
    out.phi() = full.phi();
    out.set_theta(full.theta());
    return out;
}

ParamSet expand_params(const ParamSet& reduced, const Reduction& r, const Dataset& full) {
    ParamSet out(reduced.g(), full.mix().D(), full.body().D(), full.tail().D(), reduced.tau());
    for (Part part : {Part::mixing, Part::body, Part::tail}) {
        const Eigen::MatrixXd red = part_coefficients(reduced, part);
        const auto& groups = r[part];
        const Eigen::Index D = part == Part::mixing ? full.mix().D() : part == Part::body ? full.body().D() : full.tail().D();
        Eigen::MatrixXd th = Eigen::MatrixXd::Zero(D, red.cols());
        for (std::size_t k = 0; k < groups.size(); ++k)
            for (int c : groups[k]) th.row(c) = red.row(static_cast<Eigen::Index>(k));
        set_part_coefficients(out, part, th);
    }
    out.phi() = reduced.phi();
    out.set_theta(reduced.theta());
    return out;
}

RefitResult collapse_and_refit(const Dataset& data, const ParamSet& adjusted, const FitConfig& config) {
    RefitResult res;
    res.reduction = reduction_pattern(adjusted, data);
    res.reduced_data = apply_reduction(data, res.reduction);
    const ParamSet init = reduce_params(adjusted, res.reduction);
    res.fit = fit_gem(res.reduced_data, adjusted.g(), adjusted.tau(), PenaltySet{}, config, init);
    res.full_layout = expand_params(res.fit.params, res.reduction, data);
    return res;
}

}  // namespace mcreg
