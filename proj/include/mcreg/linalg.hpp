#pragma once

#include <Eigen/Dense>

namespace mcreg::linalg {

/// out = X * b for a column-major X.
void gemv(const Eigen::MatrixXd& X, const Eigen::VectorXd& b, Eigen::VectorXd& out);
Eigen::VectorXd gemv(const Eigen::MatrixXd& X, const Eigen::VectorXd& b);

/// X^T r.
Eigen::VectorXd xt_vec(const Eigen::MatrixXd& X, const Eigen::VectorXd& r);

/// X^T diag(w) X.
Eigen::MatrixXd weighted_gram(const Eigen::MatrixXd& X, const Eigen::VectorXd& w);

/// Solves A d = g for a symmetric positive definite A, adding ridge*I and
/// growing it until the factorization succeeds. Returns false when no ridge works.
bool spd_solve(const Eigen::MatrixXd& A, const Eigen::VectorXd& g, double ridge, Eigen::VectorXd& d);

}  // namespace mcreg::linalg
