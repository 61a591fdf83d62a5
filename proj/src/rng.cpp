#include "mcreg/rng.hpp"

#include <boost/math/special_functions/erf.hpp>

#include <cmath>

namespace mcreg {

namespace {

std::uint64_t splitmix(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

}  // namespace

std::uint64_t derive_seed(std::uint64_t root, std::string_view stream, std::uint64_t index) {
    std::uint64_t h = splitmix(root);
    for (unsigned char c : stream) h = splitmix(h ^ c);
    return splitmix(h ^ splitmix(index + 0x51ed2701ULL));
}

Rng make_rng(std::uint64_t root, std::string_view stream, std::uint64_t index) {
    return Rng(derive_seed(root, stream, index));
}

double uniform01(Rng& rng) {
    return (static_cast<double>(rng() >> 11) + 0.5) * 0x1.0p-53;
}

// Inverse CDF keeps draws identical across standard libraries.
double standard_normal(Rng& rng) {
    return -std::sqrt(2.0) * boost::math::erfc_inv(2.0 * uniform01(rng));
}

std::uint64_t uniform_index(Rng& rng, std::uint64_t n) {
    if (n <= 1) return 0;
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
    std::uint64_t r;
    do {
        r = rng();
    } while (r >= limit);
    return r % n;
}

}  // namespace mcreg
