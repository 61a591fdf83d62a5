#include "mcreg/kernels.hpp"
#include "mcreg/linalg.hpp"
#include "mcreg/rng.hpp"

#include <doctest.h>

#include <cmath>
#include <vector>

using namespace mcreg;

namespace {

std::vector<double> random_vec(std::size_t n, Rng& rng) {
    std::vector<double> v(n);
    for (auto& x : v) x = standard_normal(rng);
    return v;
}

bool avx2_available() { return kernels::detected_isa() == kernels::Isa::avx2; }

}  // namespace

TEST_CASE("scalar and avx2 kernels agree for every tail length") {
    if (!avx2_available()) {
        MESSAGE("AVX2 not available on this CPU; only the scalar path is exercised");
        return;
    }
    Rng rng = make_rng(1, "kernels");
    for (std::size_t n = 0; n < 70; ++n) {
        const auto a = random_vec(n, rng), b = random_vec(n, rng), w = random_vec(n, rng);
        double scale = 1.0;
        for (std::size_t i = 0; i < n; ++i) scale += std::abs(a[i] * b[i] * w[i]) + std::abs(a[i] * b[i]);
        CHECK(std::abs(kernels::scalar::dot(a.data(), b.data(), n) - kernels::avx2::dot(a.data(), b.data(), n)) <=
              1e-14 * scale);
        CHECK(std::abs(kernels::scalar::dot3(w.data(), a.data(), b.data(), n) -
                       kernels::avx2::dot3(w.data(), a.data(), b.data(), n)) <= 1e-14 * scale);
        auto y1 = b, y2 = b;
        kernels::scalar::axpy(0.37, a.data(), y1.data(), n);
        kernels::avx2::axpy(0.37, a.data(), y2.data(), n);
        for (std::size_t i = 0; i < n; ++i) CHECK(std::abs(y1[i] - y2[i]) <= 1e-15 * (1.0 + std::abs(y1[i])));
    }
}

TEST_CASE("dispatch can be forced and restored") {
    const auto before = kernels::active_isa();
    kernels::force_isa(kernels::Isa::scalar);
    CHECK(kernels::active_isa() == kernels::Isa::scalar);
    const std::vector<double> a{1, 2, 3}, b{4, 5, 6};
    CHECK(kernels::dot(a.data(), b.data(), 3) == 32.0);
    if (!avx2_available()) CHECK_THROWS(kernels::force_isa(kernels::Isa::avx2));
    kernels::force_isa(before);
    CHECK(std::string(kernels::isa_name(kernels::Isa::scalar)) == "scalar");
}

TEST_CASE("linalg helpers match Eigen expressions") {
    Rng rng = make_rng(2, "linalg");
    Eigen::MatrixXd X(37, 5);
    for (Eigen::Index i = 0; i < X.size(); ++i) X.data()[i] = standard_normal(rng);
    Eigen::VectorXd b(5), r(37), w(37);
    for (auto& v : b) v = standard_normal(rng);
    for (auto& v : r) v = standard_normal(rng);
    for (auto& v : w) v = 0.1 + uniform01(rng);
    CHECK((linalg::gemv(X, b) - X * b).norm() < 1e-12);
    CHECK((linalg::xt_vec(X, r) - X.transpose() * r).norm() < 1e-12);
    CHECK((linalg::weighted_gram(X, w) - X.transpose() * w.asDiagonal() * X).norm() < 1e-11);

    const Eigen::MatrixXd A = X.transpose() * X;
    Eigen::VectorXd d;
    REQUIRE(linalg::spd_solve(A, b, 0.0, d));
    CHECK((A * d - b).norm() < 1e-9);
    // A rank-deficient matrix is rescued by the ridge.
    Eigen::MatrixXd S = Eigen::MatrixXd::Zero(2, 2);
    S(0, 0) = 1.0;
    Eigen::VectorXd g(2);
    g << 1.0, 1.0;
    CHECK(linalg::spd_solve(S, g, 1e-8, d));
    CHECK(d.allFinite());
}
