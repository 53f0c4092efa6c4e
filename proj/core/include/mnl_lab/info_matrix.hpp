#pragma once

#include <Eigen/Cholesky>
#include <Eigen/Core>

namespace mnl_lab {

// Symmetric positive semidefinite accumulator for the design/information
// matrix V. Solves go through a cached LDLT of V + ridge I with a small
// trace-scaled ridge, so the object stays usable while V is still singular
// (early rounds) without distorting it once V is well conditioned.
class InfoMatrix {
 public:
  explicit InfoMatrix(Eigen::Index dim);

  Eigen::Index dim() const { return v_.rows(); }
  const Eigen::MatrixXd& matrix() const { return v_; }

  // V += weight * u * u^T.
  void add_scaled_outer(double weight, const Eigen::VectorXd& u);

  // V += (a + a^T) / 2. Symmetrizing here keeps roundoff from accumulating
  // into an asymmetric V over many rank updates.
  void add_sym(const Eigen::MatrixXd& a);

  // (V + ridge I)^{-1} rhs.
  Eigen::VectorXd solve(const Eigen::VectorXd& rhs) const;

  // u^T (V + ridge I)^{-1} w and the symmetric special case.
  double inv_quad_form(const Eigen::VectorXd& u, const Eigen::VectorXd& w) const;
  double inv_quad_form(const Eigen::VectorXd& u) const;

  // Smallest eigenvalue of V itself (no ridge); a diagnostics quantity.
  double min_eigenvalue() const;

  // Ridge used by the current factorization: 1e-8 * (1 + trace(V)/dim).
  double ridge() const;

 private:
  void refresh() const;

  Eigen::MatrixXd v_;
  mutable Eigen::LDLT<Eigen::MatrixXd> ldlt_;
  mutable double ridge_ = 0.0;
  mutable bool dirty_ = true;
};

}  // namespace mnl_lab
