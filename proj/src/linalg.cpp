#include "steerlab/linalg.hpp"

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include "steerlab/errors.hpp"

namespace steerlab::linalg {

Eigen::MatrixXd solve_sylvester(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b,
                                const Eigen::MatrixXd& c) {
  const auto m = a.rows();
  const auto n = b.cols();
  // vec(AX + XB) = (I (x) A + B^T (x) I) vec(X), column-major vec.
  Eigen::MatrixXd k = Eigen::MatrixXd::Zero(m * n, m * n);
  for (Eigen::Index j = 0; j < n; ++j) {
    k.block(j * m, j * m, m, m) += a;
    for (Eigen::Index i = 0; i < n; ++i) {
      k.block(i * m, j * m, m, m) +=
          b(j, i) * Eigen::MatrixXd::Identity(m, m);
    }
  }
  Eigen::VectorXd rhs(m * n);
  for (Eigen::Index j = 0; j < n; ++j) rhs.segment(j * m, m) = -c.col(j);
  Eigen::FullPivLU<Eigen::MatrixXd> lu(k);
  if (!lu.isInvertible()) {
    throw SolverSingular("Sylvester operator is singular");
  }
  const Eigen::VectorXd x = lu.solve(rhs);
  Eigen::MatrixXd result(m, n);
  for (Eigen::Index j = 0; j < n; ++j) result.col(j) = x.segment(j * m, m);
  return result;
}

Eigen::MatrixXd solve_lyapunov_generic(const Eigen::MatrixXd& a,
                                       const Eigen::MatrixXd& q) {
  return symmetrize(solve_sylvester(a, a.transpose(), q));
}

bool is_hurwitz(const Eigen::MatrixXd& a, double margin) {
  const Eigen::VectorXcd eigs = a.eigenvalues();
  for (Eigen::Index i = 0; i < eigs.size(); ++i) {
    if (eigs(i).real() >= -margin) return false;
  }
  return true;
}

double min_eigenvalue(const Eigen::MatrixXd& symmetric) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(symmetric);
  return es.eigenvalues().minCoeff();
}

}  // namespace steerlab::linalg
