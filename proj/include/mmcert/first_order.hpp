#pragma once

#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "mmcert/cones.hpp"
#include "mmcert/config.hpp"
#include "mmcert/multipliers.hpp"
#include "mmcert/problem.hpp"

namespace mmcert {

struct MfcqResult {
  bool pass = false;
  bool rank_ok = false;  // equality gradients linearly independent
  double s = 0.0;        // optimal strict-decrease margin, capped at 1
  Eigen::VectorXd w;     // witness direction, ||w||_inf <= 1
};

/// Inner MFCQ in y for the active coupled constraints.
MfcqResult mfcq_check(const ProblemSpec& spec, const CandidatePoint& p, const ActiveSets& act);
/// MFCQ in x for the active outer constraints.
MfcqResult outer_mfcq_check(const ProblemSpec& spec, const CandidatePoint& p, const ActiveSets& act);

struct LicqResult {
  bool pass = false;
  int rank = 0;
  int count = 0;
};

LicqResult licq_check(const ProblemSpec& spec, const CandidatePoint& p, const ActiveSets& act);

struct RcrcqResult {
  bool pass = false;
  bool checked = true;  // false when |I_varphi| > 10
  int samples = 0;
  std::optional<Eigen::VectorXd> witness_x;  // sample where a rank changed
  std::optional<Eigen::VectorXd> witness_y;
  std::vector<int> witness_subset;
};

/// Ranks of {grad_y varphi_i : i in eq + K} for every K in I_varphi, at the
/// point and at n_samples uniform points of a radius ball in (x, y).
RcrcqResult rcrcq_check(const ProblemSpec& spec, const CandidatePoint& p, const ActiveSets& act, int n_samples = 32,
                        double radius = 1e-3, std::uint64_t seed = 0);

struct CqReport {
  MfcqResult mfcq;
  MfcqResult outer_mfcq;
  LicqResult licq;
  RcrcqResult rcrcq;
  bool linear_inner = false;  // every coupled constraint affine
  bool linear_outer = false;  // every outer constraint affine
  bool inner_ok = false;
  bool outer_ok = false;
  std::string inner_basis;  // which sufficient condition justified the gate
  std::string outer_basis;
  std::vector<std::string> notes;
};

CqReport cq_report(const ProblemSpec& spec, const CandidatePoint& p, const ActiveSets& act, std::uint64_t seed = 0);

struct DualityGap {
  double primal = 0.0;  // sup of grad f^T (u, h) over the linearization cone; +inf if unbounded, -inf if empty
  double dual = 0.0;    // lambda2_max value; +inf if Lambda_max is empty, -inf if unbounded
  double gap = 0.0;     // |primal - dual|; 0 when both are the same infinity
  bool structural = false;  // an infinite pair
  Eigen::VectorXd h;        // primal maximizer when finite
};

DualityGap duality_gap(const ProblemSpec& spec, const CandidatePoint& p, const ActiveSets& act,
                       const Eigen::VectorXd& u);

struct OuterRecord {
  Eigen::VectorXd u;
  DualityGap duality;
  bool pass = false;  // dual >= -tol
};

struct FirstOrderCertificate {
  ActiveSets act;
  double inner_value = 0.0;  // max of grad_y f^T h over the boxed u = 0 linearization cone
  Eigen::VectorXd inner_h;
  bool inner_pass = false;
  std::vector<OuterRecord> outer;
  bool outer_pass = false;
  bool sampled_only = false;
  double max_gap = 0.0;
  std::optional<MultiplierVector> witness;
  std::optional<KktReport> kkt;
  CqReport cq;
  FoVerdict overall = FoVerdict::Inconclusive;
  std::vector<std::string> notes;
};

/// Throws InfeasiblePoint.
FirstOrderCertificate first_order_certificate(const ProblemSpec& spec, const CandidatePoint& p, const RunConfig& cfg);

/// eps_act from the config, or the point default.
ActiveSets config_active_sets(const ProblemSpec& spec, const CandidatePoint& p, const RunConfig& cfg);

}  // namespace mmcert
