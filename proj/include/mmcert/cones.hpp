#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "mmcert/polyhedral_cone.hpp"
#include "mmcert/problem.hpp"

namespace mmcert {

class InfeasiblePoint : public std::runtime_error {
 public:
  explicit InfeasiblePoint(std::vector<std::string> violations);
  const std::vector<std::string>& violations() const { return violations_; }

 private:
  std::vector<std::string> violations_;
};

struct ActiveSets {
  std::vector<int> I_phi;     // 0-based indices into phi_ineq
  std::vector<int> I_varphi;  // 0-based indices into varphi_ineq
  double eps_act = 0.0;
};

/// 1e-7 * (1 + largest constraint magnitude at the point).
double default_eps_act(const CandidatePoint& p);

/// Throws InfeasiblePoint when some constraint is violated by more than eps_act.
ActiveSets active_sets(const ProblemSpec& spec, const CandidatePoint& p, double eps_act);

/// {u : grad phi_i^T u <= 0 (i active), grad phi_eq^T u = 0} in R^n.
PolyhedralCone linearization_cone_X(const ProblemSpec& spec, const CandidatePoint& p, const ActiveSets& act);
/// h-section {h : grad varphi_i^T (u, h) <= 0 (i active), grad varphi_eq^T (u, h) = 0} in R^m.
PolyhedralCone linearization_cone_Y(const ProblemSpec& spec, const CandidatePoint& p, const ActiveSets& act,
                                    const Eigen::VectorXd& u);
/// u = 0 section of the y-linearization cone intersected with {grad_y f^T h = 0}.
PolyhedralCone critical_cone_max(const ProblemSpec& spec, const CandidatePoint& p, const ActiveSets& act);
/// linearization_cone_Y(u) intersected with {grad f^T (u, h) = 0}.
PolyhedralCone critical_set_C(const ProblemSpec& spec, const CandidatePoint& p, const ActiveSets& act,
                              const Eigen::VectorXd& u);

/// Generators of a homogeneous cone: lineality basis plus extreme rays of the
/// pointed part (both as unit vectors in the ambient space).
struct ConeGenerators {
  std::vector<Eigen::VectorXd> lineality;  // orthonormal; the cone contains +-v
  std::vector<Eigen::VectorXd> rays;       // extreme rays of the pointed part
  bool is_zero() const { return lineality.empty() && rays.empty(); }
};

/// Double-description enumeration; throws std::invalid_argument for offsets.
ConeGenerators cone_generators(const PolyhedralCone& cone);

struct DirectionSample {
  std::vector<Eigen::VectorXd> directions;
  int structural = 0;                // leading entries that are generators
  bool sampled_only = false;         // generators not enumerated
  bool dimension_too_large = false;  // ambient dimension above 8
};

/// Deterministic unit directions of a homogeneous cone: every generator (for
/// small cones), then quasi-uniform members up to the budget.
DirectionSample sample_directions(const PolyhedralCone& cone, int budget, std::uint64_t seed = 0);

}  // namespace mmcert
