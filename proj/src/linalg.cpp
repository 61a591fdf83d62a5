#include "mcreg/linalg.hpp"

#include "mcreg/kernels.hpp"

#include <cmath>

namespace mcreg::linalg {

void gemv(const Eigen::MatrixXd& X, const Eigen::VectorXd& b, Eigen::VectorXd& out) {
    const auto n = static_cast<std::size_t>(X.rows());
    out.setZero(X.rows());
    for (Eigen::Index c = 0; c < X.cols(); ++c) {
        if (b(c) == 0.0) continue;
        kernels::axpy(b(c), X.col(c).data(), out.data(), n);
    }
}

Eigen::VectorXd gemv(const Eigen::MatrixXd& X, const Eigen::VectorXd& b) {
    Eigen::VectorXd out;
    gemv(X, b, out);
    return out;
}

Eigen::VectorXd xt_vec(const Eigen::MatrixXd& X, const Eigen::VectorXd& r) {
    const auto n = static_cast<std::size_t>(X.rows());
    Eigen::VectorXd out(X.cols());
    for (Eigen::Index c = 0; c < X.cols(); ++c) out(c) = kernels::dot(X.col(c).data(), r.data(), n);
    return out;
}

Eigen::MatrixXd weighted_gram(const Eigen::MatrixXd& X, const Eigen::VectorXd& w) {
    const auto n = static_cast<std::size_t>(X.rows());
    const Eigen::Index D = X.cols();
    Eigen::MatrixXd G(D, D);
    for (Eigen::Index a = 0; a < D; ++a)
        for (Eigen::Index b = a; b < D; ++b) {
            double v = kernels::dot3(w.data(), X.col(a).data(), X.col(b).data(), n);
            G(a, b) = v;
            G(b, a) = v;
        }
    return G;
}

bool spd_solve(const Eigen::MatrixXd& A, const Eigen::VectorXd& g, double ridge, Eigen::VectorXd& d) {
    const Eigen::Index D = A.rows();
    double scale = A.diagonal().cwiseAbs().maxCoeff();
    if (!std::isfinite(scale)) return false;
    if (scale <= 0.0) scale = 1.0;
    double r = 0.0;
    for (int attempt = 0; attempt < 30; ++attempt) {
        Eigen::MatrixXd M = A;
        M.diagonal().array() += r;
        Eigen::LLT<Eigen::MatrixXd> llt(M);
        if (llt.info() == Eigen::Success) {
            d = llt.solve(g);
            if (d.allFinite()) return true;
        }
        r = (r == 0.0) ? std::max(ridge, 1e-12) * scale : r * 10.0;
    }
    (void)D;
    return false;
}

}  // namespace mcreg::linalg
