#include "mnl_lab/info_matrix.hpp"

#include <Eigen/Eigenvalues>

#include "mnl_lab/errors.hpp"

namespace mnl_lab {

InfoMatrix::InfoMatrix(Eigen::Index dim) {
  if (dim <= 0) {
    throw ConfigError("InfoMatrix: dim must be positive");
  }
  v_ = Eigen::MatrixXd::Zero(dim, dim);
}

void InfoMatrix::add_scaled_outer(double weight, const Eigen::VectorXd& u) {
  if (u.size() != dim()) {
    throw ConfigError("InfoMatrix::add_scaled_outer: dimension mismatch");
  }
  v_.selfadjointView<Eigen::Lower>().rankUpdate(u, weight);
  v_.triangularView<Eigen::StrictlyUpper>() = v_.transpose();
  dirty_ = true;
}

void InfoMatrix::add_sym(const Eigen::MatrixXd& a) {
  if (a.rows() != dim() || a.cols() != dim()) {
    throw ConfigError("InfoMatrix::add_sym: dimension mismatch");
  }
  v_ += 0.5 * (a + a.transpose());
  dirty_ = true;
}

void InfoMatrix::refresh() const {
  if (!dirty_) {
    return;
  }
  ridge_ = 1e-8 * (1.0 + v_.trace() / static_cast<double>(dim()));
  Eigen::MatrixXd regularized = v_;
  regularized.diagonal().array() += ridge_;
  ldlt_.compute(regularized);
  if (ldlt_.info() != Eigen::Success) {
    throw SingularMatrixError("InfoMatrix: LDLT factorization failed");
  }
  dirty_ = false;
}

Eigen::VectorXd InfoMatrix::solve(const Eigen::VectorXd& rhs) const {
  refresh();
  return ldlt_.solve(rhs);
}

double InfoMatrix::inv_quad_form(const Eigen::VectorXd& u, const Eigen::VectorXd& w) const {
  refresh();
  return u.dot(ldlt_.solve(w));
}

double InfoMatrix::inv_quad_form(const Eigen::VectorXd& u) const { return inv_quad_form(u, u); }

double InfoMatrix::min_eigenvalue() const {
  const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(v_, Eigen::EigenvaluesOnly);
  return solver.eigenvalues().minCoeff();
}

double InfoMatrix::ridge() const {
  refresh();
  return ridge_;
}

}  // namespace mnl_lab
