#pragma once

#include "mcreg/benchmarks.hpp"
#include "mcreg/core_types.hpp"
#include "mcreg/diagnostics.hpp"
#include "mcreg/gem.hpp"
#include "mcreg/inference.hpp"
#include "mcreg/selection.hpp"

#include <json.hpp>

#include <filesystem>
#include <string>
#include <vector>

namespace mcreg {

inline constexpr const char* kLibraryVersion = "1.0.0";

/// Column names per part, stored next to the coefficients in model files.
struct ColumnNames {
    std::vector<std::string> mixing, body, tail;
};
ColumnNames column_names(const Dataset& data, const CovariateSchema& schema);

nlohmann::json params_to_json(const ParamSet& p, const ColumnNames& names = {});
/// Throws SchemaError on missing fields or inconsistent shapes.
ParamSet params_from_json(const nlohmann::json& j);

/// Model file: {"version", "params", "config"}.
void write_model(const std::filesystem::path& path, const ParamSet& p, const ColumnNames& names,
                 const nlohmann::json& config);
ParamSet read_model(const std::filesystem::path& path);

nlohmann::json fit_to_json(const FitReport& fit, const ColumnNames& names = {});
nlohmann::json adjust_to_json(const AdjustResult& r, const ColumnNames& names = {});
nlohmann::json tuning_to_json(const TuningResult& r);
nlohmann::json ci_to_json(const CITable& t);
nlohmann::json benchmark_to_json(const BenchmarkResult& r);
nlohmann::json choose_g_to_json(const ChooseGResult& r);

/// Shortest round-trip decimal form.
std::string format_double(double v);

std::string ci_csv(const CITable& t);
std::string tuning_csv(const TuningResult& r);
/// One row per model; mirrors the usual model-comparison table layout.
std::string benchmarks_csv(const std::vector<BenchmarkResult>& rows);
std::string tail_robustness_csv(const TailRobustness& t);
std::string density_csv(const DensityCurve& d);
std::string qq_csv(const QQPoints& q);
std::string loglog_csv(const LogLogPoints& l);
std::string mean_excess_csv(const MeanExcessPoints& m);

}  // namespace mcreg
