#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "mmcert/polyhedral_cone.hpp"

namespace mmcert {

// Global tolerance ladder.
inline constexpr double kFeasTol = 1e-9;
inline constexpr double kOptTol = 1e-8;
inline constexpr double kRankTol = 1e-10;
inline constexpr double kPivotTol = 1e-10;

class NumericalBreakdown : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class SingularKkt : public std::runtime_error {
 public:
  SingularKkt(int rank, int size)
      : std::runtime_error("singular KKT matrix: rank " + std::to_string(rank) + " of " + std::to_string(size)),
        rank_(rank),
        size_(size) {}
  int rank() const { return rank_; }
  int size() const { return size_; }

 private:
  int rank_;
  int size_;
};

class FaceBudgetExceeded : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class Sense { Le, Eq, Ge };
enum class LpStatus { Optimal, Infeasible, Unbounded };

const char* to_string(LpStatus s);

/// minimize c^T z subject to A z (sense) b; z_j >= 0 unless free[j].
struct LinearProgram {
  Eigen::VectorXd c;
  Eigen::MatrixXd A;
  Eigen::VectorXd b;
  std::vector<Sense> sense;
  std::vector<bool> free;  // empty means all variables are >= 0

  LinearProgram() = default;
  explicit LinearProgram(int nvars, bool all_free = false);
  int num_vars() const { return static_cast<int>(c.size()); }
  int num_rows() const { return static_cast<int>(A.rows()); }
  void add_row(const Eigen::VectorXd& row, Sense s, double rhs);
  bool is_free(int j) const { return !free.empty() && free[static_cast<std::size_t>(j)]; }
};

struct LpSolution {
  LpStatus status = LpStatus::Infeasible;
  Eigen::VectorXd z;
  double value = 0.0;
  std::vector<int> basis;  // basic columns of the internal standard form
};

/// Two-phase dense tableau simplex with Bland's rule.
LpSolution solve_lp(const LinearProgram& lp);

/// Stationary point of 1/2 d^T H d + g^T d on {A_eq d = 0}:
/// [[H, A^T], [A, 0]] [d; mu] = [-g; 0].
Eigen::VectorXd solve_kkt(const Eigen::MatrixXd& H, const Eigen::VectorXd& g, const Eigen::MatrixXd& A_eq);

struct ConeQuadResult {
  bool feasible = true;       // false when the set itself is empty
  bool unbounded = false;     // supremum is +inf
  double value = 0.0;         // meaningful when feasible && !unbounded
  Eigen::VectorXd argmax;     // attaining point when finite
  std::vector<int> face;      // inequality rows fixed to equality for argmax
  Eigen::VectorXd ray;        // witness of unboundedness
  long faces_examined = 0;
};

/// sup of 1/2 d^T H d + g^T d over the (possibly inhomogeneous) polyhedron,
/// exact by enumeration of faces. Throws FaceBudgetExceeded above 2^20 faces.
ConeQuadResult max_quad_over_cone(const Eigen::MatrixXd& H, const Eigen::VectorXd& g, const PolyhedralCone& cone);

struct SymmetricEigen {
  Eigen::VectorXd values;   // ascending
  Eigen::MatrixXd vectors;  // columns, orthonormal
};

/// Cyclic Jacobi rotations.
SymmetricEigen symmetric_eigen(const Eigen::MatrixXd& H);
double min_eig(const Eigen::MatrixXd& H);

int numerical_rank(const Eigen::MatrixXd& A, double rel_tol = kRankTol);
/// Orthonormal basis (columns) of {d : A d = 0}; A may have zero rows.
Eigen::MatrixXd null_space(const Eigen::MatrixXd& A, int cols, double rel_tol = kRankTol);
/// Least-squares solution of A z = b and whether it solves the system.
std::optional<Eigen::VectorXd> solve_consistent(const Eigen::MatrixXd& A, const Eigen::VectorXd& b,
                                                double tol = 1e-9);

struct VertexEnumeration {
  std::vector<Eigen::VectorXd> vertices;  // deduplicated, in discovery order
  bool truncated = false;                 // basis budget hit
  long bases_examined = 0;
};

/// Vertices of {z : A z <= b, E z = e} by basis enumeration, up to max_bases.
VertexEnumeration enumerate_vertices(const Eigen::MatrixXd& A, const Eigen::VectorXd& b, const Eigen::MatrixXd& E,
                                     const Eigen::VectorXd& e, long max_bases = 4096);

/// Calls visit(subset) for each subset of {0..n-1} of size <= k, by size and
/// then lexicographically. visit returns false to stop.
template <class Visit>
void for_each_subset(int n, int k, Visit&& visit) {
  std::vector<int> s;
  for (int size = 0; size <= std::min(n, k); ++size) {
    s.resize(static_cast<std::size_t>(size));
    for (int i = 0; i < size; ++i) s[static_cast<std::size_t>(i)] = i;
    for (;;) {
      if (!visit(static_cast<const std::vector<int>&>(s))) return;
      int i = size - 1;
      while (i >= 0 && s[static_cast<std::size_t>(i)] == n - size + i) --i;
      if (i < 0) break;
      ++s[static_cast<std::size_t>(i)];
      for (int j = i + 1; j < size; ++j) s[static_cast<std::size_t>(j)] = s[static_cast<std::size_t>(j - 1)] + 1;
    }
  }
}

}  // namespace mmcert
