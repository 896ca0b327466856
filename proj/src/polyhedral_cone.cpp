#include "mmcert/polyhedral_cone.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace mmcert {

PolyhedralCone PolyhedralCone::full(int dim) {
  PolyhedralCone c;
  c.dim = dim;
  c.A_ineq.resize(0, dim);
  c.off_ineq.resize(0);
  c.A_eq.resize(0, dim);
  c.off_eq.resize(0);
  return c;
}

PolyhedralCone PolyhedralCone::zero(int dim) {
  PolyhedralCone c = full(dim);
  c.A_eq = Eigen::MatrixXd::Identity(dim, dim);
  c.off_eq = Eigen::VectorXd::Zero(dim);
  return c;
}

bool PolyhedralCone::homogeneous() const {
  return (off_ineq.size() == 0 || off_ineq.cwiseAbs().maxCoeff() == 0.0) &&
         (off_eq.size() == 0 || off_eq.cwiseAbs().maxCoeff() == 0.0);
}

namespace {

void append(Eigen::MatrixXd& A, Eigen::VectorXd& off, const Eigen::VectorXd& row, double offset) {
  const Eigen::Index r = A.rows();
  A.conservativeResize(r + 1, Eigen::NoChange);
  off.conservativeResize(r + 1);
  A.row(r) = row.transpose();
  off(r) = offset;
}

}  // namespace

void PolyhedralCone::add_ineq(const Eigen::VectorXd& row, double offset) { append(A_ineq, off_ineq, row, offset); }
void PolyhedralCone::add_eq(const Eigen::VectorXd& row, double offset) { append(A_eq, off_eq, row, offset); }

double PolyhedralCone::violation(const Eigen::VectorXd& d) const {
  double worst = -std::numeric_limits<double>::infinity();
  const double dn = d.norm();
  for (Eigen::Index i = 0; i < A_ineq.rows(); ++i) {
    const double scale = 1.0 + A_ineq.row(i).norm() * dn + std::abs(off_ineq(i));
    worst = std::max(worst, (A_ineq.row(i).dot(d) + off_ineq(i)) / scale);
  }
  for (Eigen::Index i = 0; i < A_eq.rows(); ++i) {
    const double scale = 1.0 + A_eq.row(i).norm() * dn + std::abs(off_eq(i));
    worst = std::max(worst, std::abs(A_eq.row(i).dot(d) + off_eq(i)) / scale);
  }
  return A_ineq.rows() + A_eq.rows() == 0 ? 0.0 : worst;
}

bool PolyhedralCone::contains(const Eigen::VectorXd& d, double tol) const {
  return d.size() == dim && violation(d) <= tol;
}

}  // namespace mmcert
