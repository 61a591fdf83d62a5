#pragma once

#include <cstddef>

namespace mcreg::kernels {

enum class Isa { scalar, avx2 };

const char* isa_name(Isa isa);

/// Best instruction set supported by the running CPU.
Isa detected_isa();
Isa active_isa();
/// Overrides dispatch (tests, benchmarking). Throws DomainError if unsupported.
void force_isa(Isa isa);

// Dispatched entry points.
double dot(const double* a, const double* b, std::size_t n);
double dot3(const double* w, const double* a, const double* b, std::size_t n);  // sum w*a*b
void axpy(double alpha, const double* x, double* y, std::size_t n);           // y += alpha*x

namespace scalar {
double dot(const double* a, const double* b, std::size_t n);
double dot3(const double* w, const double* a, const double* b, std::size_t n);
void axpy(double alpha, const double* x, double* y, std::size_t n);
}  // namespace scalar

namespace avx2 {
double dot(const double* a, const double* b, std::size_t n);
double dot3(const double* w, const double* a, const double* b, std::size_t n);
void axpy(double alpha, const double* x, double* y, std::size_t n);
}  // namespace avx2

}  // namespace mcreg::kernels
