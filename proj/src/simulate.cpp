#include "mcreg/simulate.hpp"

#include "mcreg/dists.hpp"

#include <charconv>

namespace mcreg {

namespace {

std::string shortest(double v) {
    char buf[64];
    auto r = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, r.ptr);
}

}  // namespace

RawTable simulate_covariates(const CovariateSchema& schema, Eigen::Index n, Rng& rng) {
    RawTable t;
    for (const auto& v : schema.variables()) t.header.push_back(v.name);
    t.rows.reserve(static_cast<std::size_t>(n));
    for (Eigen::Index i = 0; i < n; ++i) {
        std::vector<std::string> row;
        row.reserve(schema.size());
        for (const auto& v : schema.variables()) {
            if (v.categorical())
                row.push_back(v.levels[uniform_index(rng, v.levels.size())]);
            else
                row.push_back(shortest(v.lower + (v.upper - v.lower) * uniform01(rng)));
        }
        t.rows.push_back(std::move(row));
    }
    return t;
}

Eigen::VectorXd simulate_response(const Dataset& data, const ParamSet& p, Rng& rng) {
    Eigen::VectorXd y(data.n());
    for (Eigen::Index i = 0; i < data.n(); ++i) y(i) = sample_composite(row_model(p, data, i), p, rng);
    return y;
}

Simulated simulate_dataset(const CovariateSchema& schema, const ParamSet& truth, Eigen::Index n, std::uint64_t seed) {
    Rng rng = make_rng(seed, "simulate");
    Simulated s;
    s.table = simulate_covariates(schema, n, rng);
    DesignMatrix design = encode_design(schema, s.table);
    if (design.D() != truth.d_mix() || design.D() != truth.d_body() || design.D() != truth.d_tail())
        throw DomainError("truth parameters do not match the schema's design width");
    // Responses need a Dataset to read rows from; y is filled in afterwards.
    Dataset tmp(Eigen::VectorXd::Ones(n), design, truth.tau());
    Eigen::VectorXd y = simulate_response(tmp, truth, rng);
    s.table.header.push_back("y");
    for (Eigen::Index i = 0; i < n; ++i) s.table.rows[static_cast<std::size_t>(i)].push_back(shortest(y(i)));
    s.data = tmp.with_y(std::move(y));
    return s;
}

}  // namespace mcreg
