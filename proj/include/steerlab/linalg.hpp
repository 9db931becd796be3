#pragma once

#include <Eigen/Core>

namespace steerlab::linalg {

// Solves A X + X B + C = 0 by vectorization; intended for small dense blocks.
Eigen::MatrixXd solve_sylvester(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b,
                                const Eigen::MatrixXd& c);

// Solves A X + X A^T + Q = 0 (Q symmetric) and symmetrizes the result.
Eigen::MatrixXd solve_lyapunov_generic(const Eigen::MatrixXd& a,
                                       const Eigen::MatrixXd& q);

bool is_hurwitz(const Eigen::MatrixXd& a, double margin = 0.0);

double min_eigenvalue(const Eigen::MatrixXd& symmetric);

inline Eigen::MatrixXd symmetrize(const Eigen::MatrixXd& m) {
  return 0.5 * (m + m.transpose());
}

}  // namespace steerlab::linalg
