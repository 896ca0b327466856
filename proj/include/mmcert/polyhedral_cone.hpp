#pragma once

#include <Eigen/Dense>

namespace mmcert {

/// {d : A_ineq d + off_ineq <= 0, A_eq d + off_eq = 0}. With zero offsets this
/// is a cone; nonzero offsets describe an inhomogeneous section (e.g. the
/// h-slice of a linearization cone at fixed u).
struct PolyhedralCone {
  int dim = 0;
  Eigen::MatrixXd A_ineq;
  Eigen::VectorXd off_ineq;
  Eigen::MatrixXd A_eq;
  Eigen::VectorXd off_eq;

  static PolyhedralCone full(int dim);
  static PolyhedralCone zero(int dim);

  int n_ineq() const { return static_cast<int>(A_ineq.rows()); }
  int n_eq() const { return static_cast<int>(A_eq.rows()); }
  bool homogeneous() const;

  void add_ineq(const Eigen::VectorXd& row, double offset = 0.0);
  void add_eq(const Eigen::VectorXd& row, double offset = 0.0);

  /// Row-wise test, each row scaled by 1 + ||row||·||d|| + |offset|.
  bool contains(const Eigen::VectorXd& d, double tol = 1e-9) const;
  /// Largest scaled violation (<= 0 when feasible).
  double violation(const Eigen::VectorXd& d) const;
};

}  // namespace mmcert
