#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "mmcert/cones.hpp"
#include "mmcert/config.hpp"
#include "mmcert/first_order.hpp"
#include "mmcert/multipliers.hpp"
#include "mmcert/problem.hpp"

namespace mmcert {

class NotNegativeDefinite : public std::runtime_error {
 public:
  explicit NotNegativeDefinite(double max_eig)
      : std::runtime_error("inner Lagrangian Hessian is not negative definite (largest eigenvalue " +
                           std::to_string(max_eig) + ")"),
        max_eig_(max_eig) {}
  double max_eig() const { return max_eig_; }

 private:
  double max_eig_;
};

class EmptyCriticalSet : public std::runtime_error {
 public:
  EmptyCriticalSet() : std::runtime_error("critical set C(u) is empty") {}
};

/// grad^2 f + sum alpha_i grad^2 phi_i (x-block) - sum beta_i grad^2 varphi_i.
Eigen::MatrixXd lagrangian_hessian(const ProblemSpec& spec, const CandidatePoint& p, const MultiplierVector& mu);

/// (u, h)^T H (u, h).
double quadratic_form(const Eigen::MatrixXd& H, const Eigen::VectorXd& u, const Eigen::VectorXd& h);

struct InnerDirection {
  Eigen::VectorXd h;
  double value = 0.0;  // min over the multiplier set of h^T grad^2_yy L_max h
};

struct InnerSoncResult {
  bool pass = false;
  bool inconclusive = false;  // Lambda_max empty
  bool vacuous = false;       // C_max = {0}
  bool sampled_only = false;
  std::vector<InnerDirection> directions;
};

InnerSoncResult inner_sonc_check(const ProblemSpec& spec, const CandidatePoint& p, const ActiveSets& act,
                                 int budget = 64, std::uint64_t seed = 0);

struct SsoscResult {
  bool pass = false;
  bool vacuous = false;
  bool sampled_only = false;
  std::vector<InnerDirection> directions;  // value: inf over the optimal face
};

/// Throws LambdaMaxEmpty.
SsoscResult ssosc_u_check(const ProblemSpec& spec, const CandidatePoint& p, const ActiveSets& act,
                          const Eigen::VectorXd& u, int budget = 64, std::uint64_t seed = 0);

struct HStar {
  Eigen::VectorXd h;
  double value = 0.0;
  std::vector<int> face;  // tight inequality rows of C(u)
};

/// Maximizer of the (u, h) form over C(u). Throws NotNegativeDefinite, EmptyCriticalSet.
HStar hstar(const ProblemSpec& spec, const CandidatePoint& p, const ActiveSets& act, const MultiplierVector& mu,
            const Eigen::VectorXd& u);

/// Schur complement in u plus the correction from the constraint rows held
/// tight on `face`, evaluated without solving for h.
double reduced_hessian_value(const ProblemSpec& spec, const CandidatePoint& p, const ActiveSets& act,
                             const MultiplierVector& mu, const Eigen::VectorXd& u, const std::vector<int>& face = {});

struct MultiplierRecord {
  MultiplierVector mu;
  bool extended = false;        // some alpha pairs with this beta
  std::string path;             // "hstar" or "face-enumeration"
  double sup_value = 0.0;       // sup over C(u) of the form for this multiplier
  Eigen::VectorXd h;            // maximizer when finite
};

struct DirectionRecord {
  Eigen::VectorXd u;
  double dual_value = 0.0;
  bool critical = false;
  std::optional<SsoscResult> ssosc;
  std::vector<MultiplierRecord> multipliers;
  bool face_sampled_only = false;
  Eigen::VectorXd best_h;  // common h across the enumerated multipliers
  double value = 0.0;      // min over multipliers of the form at best_h
  double margin = 0.0;     // value minus the sufficient margin
  bool necessary = false;
  bool sufficient = false;
  bool refutes = false;    // every multiplier's sup is below -margin
};

/// Note recorded when the first-order stage did not certify the point.
inline constexpr const char* kFirstOrderBlocked = "first-order conditions not certified";

struct SecondOrderCertificate {
  InnerSoncResult inner;
  std::vector<DirectionRecord> directions;
  bool sampled_only = false;
  bool growth = false;  // second-order growth claimed
  double kappa_estimate = 2.0;
  Verdict overall = Verdict::Inconclusive;
  std::vector<std::string> notes;
};

SecondOrderCertificate second_order_certificate(const ProblemSpec& spec, const CandidatePoint& p, const RunConfig& cfg,
                                                const FirstOrderCertificate& first);
SecondOrderCertificate second_order_certificate(const ProblemSpec& spec, const CandidatePoint& p, const RunConfig& cfg);

}  // namespace mmcert
