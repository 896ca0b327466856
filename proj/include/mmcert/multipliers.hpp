#pragma once

#include <optional>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

#include "mmcert/cones.hpp"
#include "mmcert/problem.hpp"

namespace mmcert {

class LambdaMaxEmpty : public std::runtime_error {
 public:
  LambdaMaxEmpty() : std::runtime_error("inner multiplier set is empty") {}
};

/// Full-length multiplier blocks; inactive inequality entries are zero.
struct MultiplierVector {
  Eigen::VectorXd alpha_ineq;
  Eigen::VectorXd alpha_eq;
  Eigen::VectorXd beta_ineq;
  Eigen::VectorXd beta_eq;

  static MultiplierVector zeros(const ProblemSpec& spec);
};

/// Rows are gradients over z = (x, y).
Eigen::MatrixXd jacobian(const std::vector<FunctionJet>& jets, int cols);

/// grad f + (grad phi^T alpha, 0) - grad varphi^T beta over z = (x, y).
Eigen::VectorXd lagrangian_gradient(const CandidatePoint& p, const MultiplierVector& mu);

/// Hessian in y of f - beta^T varphi.
Eigen::MatrixXd lmax_hessian_yy(const CandidatePoint& p, const MultiplierVector& mu);

struct KktReport {
  double stationarity = 0.0;     // ||grad L||_2
  double sign_violation = 0.0;   // largest negative part of alpha_ineq, beta_ineq
  double complementarity = 0.0;  // largest |alpha_i phi_i|, |beta_i varphi_i|
  bool pass = false;
};

KktReport kkt_residual(const ProblemSpec& spec, const CandidatePoint& p, const MultiplierVector& mu);

/// Some beta with grad_y f = grad_y varphi^T beta, beta_i >= 0 on active
/// inequalities and 0 on inactive ones; nullopt when the set is empty.
std::optional<MultiplierVector> lambda_max_find(const ProblemSpec& spec, const CandidatePoint& p,
                                                const ActiveSets& act);

/// Some (alpha, beta) with grad_(x,y) L = 0 and the sign pattern of the full
/// multiplier set.
std::optional<MultiplierVector> full_multiplier_find(const ProblemSpec& spec, const CandidatePoint& p,
                                                     const ActiveSets& act);

/// min over the inner multiplier set of (grad_x f - grad_x varphi^T beta)^T u.
struct Lambda2Max {
  double value = 0.0;
  bool unbounded = false;          // value is -inf
  MultiplierVector witness;        // an optimal beta
  std::vector<int> zero_ineq;      // active inequality rows with beta_i = 0 at the witness
};

/// Throws LambdaMaxEmpty.
Lambda2Max lambda2_max(const ProblemSpec& spec, const CandidatePoint& p, const ActiveSets& act,
                       const Eigen::VectorXd& u);

struct LambdaMaxMin {
  double value = 0.0;  // -inf when unbounded below
  bool unbounded = false;
  MultiplierVector beta;
};

/// min of w_ineq^T beta_ineq + w_eq^T beta_eq over Lambda_max, optionally cut
/// to {cut^T beta <= cut_rhs} (full-length blocks stacked ineq then eq).
/// Throws LambdaMaxEmpty.
LambdaMaxMin lambda_max_minimize(const ProblemSpec& spec, const CandidatePoint& p, const ActiveSets& act,
                                 const Eigen::VectorXd& w_ineq, const Eigen::VectorXd& w_eq,
                                 const std::optional<std::pair<Eigen::VectorXd, double>>& cut = std::nullopt);

struct AlphaExtension {
  bool feasible = false;
  bool unbounded = false;  // objective unbounded above
  double value = 0.0;
  MultiplierVector mu;  // beta as given, alpha maximizing the objective
};

/// max of w_ineq^T alpha_ineq + w_eq^T alpha_eq over {alpha : (alpha, beta) in Lambda}.
AlphaExtension extend_alpha(const ProblemSpec& spec, const CandidatePoint& p, const ActiveSets& act,
                            const MultiplierVector& beta, const Eigen::VectorXd& w_ineq, const Eigen::VectorXd& w_eq);

/// Vertices of the optimal face of lambda2_max (the argmin set).
struct OptimalFaceVertices {
  std::vector<MultiplierVector> vertices;
  bool sampled_only = false;  // basis budget hit or face without vertices
};

/// Enumerated lazily and memoized per (problem, point, u) behind a mutex.
OptimalFaceVertices lambda2_max_vertices(const ProblemSpec& spec, const CandidatePoint& p, const ActiveSets& act,
                                         const Eigen::VectorXd& u, long max_bases = 4096);

struct JacobianReport {
  bool licq = false;
  int rank = 0;
  int active_count = 0;
  bool kkt = false;
  bool strict_complementarity = false;
  bool sosc = false;
  double sosc_max_eig = 0.0;  // largest eigenvalue of the reduced inner Hessian
  MultiplierVector beta;
  bool overall = false;
};

JacobianReport jacobian_uniqueness_check(const ProblemSpec& spec, const CandidatePoint& p, const ActiveSets& act);

}  // namespace mmcert
