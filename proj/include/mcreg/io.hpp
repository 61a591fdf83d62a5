#pragma once

#include "mcreg/core_types.hpp"

#include <filesystem>
#include <string>

namespace mcreg {

/// Schema document: {"variables":[{"name":..,"kind":..,"levels":[..]}]}.
/// Continuous variables may carry an optional "range":[lo,hi] used by the simulator.
CovariateSchema parse_schema(const std::string& json_text);
CovariateSchema load_schema(const std::filesystem::path& path);
std::string schema_to_json(const CovariateSchema& schema);

RawTable parse_csv(const std::string& text);
RawTable read_csv(const std::filesystem::path& path);
std::string format_csv(const RawTable& table);

/// Reads the `y` column and encodes the schema variables.
Dataset load_dataset(const std::filesystem::path& data, const CovariateSchema& schema, double tau);
Dataset make_dataset(const RawTable& table, const CovariateSchema& schema, double tau);

std::string read_text(const std::filesystem::path& path);
void write_text(const std::filesystem::path& path, const std::string& text);

}  // namespace mcreg
