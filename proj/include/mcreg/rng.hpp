#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace mcreg {

using Rng = std::mt19937_64;

/// Seed for a named substream, e.g. derive_seed(root, "bootstrap", b).
std::uint64_t derive_seed(std::uint64_t root, std::string_view stream, std::uint64_t index = 0);
Rng make_rng(std::uint64_t root, std::string_view stream, std::uint64_t index = 0);

/// Uniform on the open interval (0,1); platform independent.
double uniform01(Rng& rng);
double standard_normal(Rng& rng);
/// Uniform integer in [0, n).
std::uint64_t uniform_index(Rng& rng, std::uint64_t n);

}  // namespace mcreg
