#include "mcreg/kernels.hpp"

#include "mcreg/core_types.hpp"

#include <atomic>
#include <cstdlib>
#include <cstring>

namespace mcreg::kernels {

namespace {

struct Table {
    double (*dot)(const double*, const double*, std::size_t);
    double (*dot3)(const double*, const double*, const double*, std::size_t);
    void (*axpy)(double, const double*, double*, std::size_t);
};

constexpr Table scalar_table{scalar::dot, scalar::dot3, scalar::axpy};
constexpr Table avx2_table{avx2::dot, avx2::dot3, avx2::axpy};

bool cpu_has_avx2() {
#if defined(__x86_64__) || defined(_M_X64)
    __builtin_cpu_init();
    return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
    return false;
#endif
}

Isa initial_isa() {
    // MCREG_ISA=scalar pins the reference kernels
    if (const char* env = std::getenv("MCREG_ISA"); env && std::strcmp(env, "scalar") == 0) return Isa::scalar;
    return detected_isa();
}

std::atomic<const Table*>& current() {
    static std::atomic<const Table*> t{initial_isa() == Isa::avx2 ? &avx2_table : &scalar_table};
    return t;
}

}  // namespace

const char* isa_name(Isa isa) { return isa == Isa::avx2 ? "avx2" : "scalar"; }

Isa detected_isa() {
    static const bool has = cpu_has_avx2();
    return has ? Isa::avx2 : Isa::scalar;
}

Isa active_isa() { return current().load(std::memory_order_relaxed) == &avx2_table ? Isa::avx2 : Isa::scalar; }

void force_isa(Isa isa) {
    if (isa == Isa::avx2 && detected_isa() != Isa::avx2) throw DomainError("AVX2 not supported on this CPU");
    current().store(isa == Isa::avx2 ? &avx2_table : &scalar_table, std::memory_order_relaxed);
}

double dot(const double* a, const double* b, std::size_t n) { return current().load(std::memory_order_relaxed)->dot(a, b, n); }

double dot3(const double* w, const double* a, const double* b, std::size_t n) {
    return current().load(std::memory_order_relaxed)->dot3(w, a, b, n);
}

void axpy(double alpha, const double* x, double* y, std::size_t n) {
    current().load(std::memory_order_relaxed)->axpy(alpha, x, y, n);
}

}  // namespace mcreg::kernels
