#pragma once

#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "mmcert/config.hpp"
#include "mmcert/problem.hpp"

namespace mmcert {

/// Uniform axis-aligned grid on a Euclidean ball. Each axis carries
/// 2K+1 nodes with K = (resolution - 1) / 2, so the center is always a node
/// (even resolutions round down).
struct GridSpec {
  double delta = 0.1;
  double kappa = 2.0;
  int resolution = 41;
  double feas_tol = 1e-9;

  int half_width() const { return (resolution - 1) / 2; }
  /// Throws std::invalid_argument.
  void validate() const;
};

/// Grid points beyond this count abort a sweep with std::invalid_argument.
inline constexpr double kGridBudget = 5e7;

enum class OracleVerdict { Pass, Fail, Degenerate };
const char* to_string(OracleVerdict v);
OracleVerdict oracle_verdict_from_string(const std::string& s);

struct LocalizedValue {
  double value = 0.0;  // -inf when empty
  bool empty = true;   // no feasible node in the ball
  Eigen::VectorXd argmax;
  long feasible = 0;
};

/// Grid max of f(x, .) over Y(x) intersected with the radius-ball around center_y.
LocalizedValue localized_value(const ProblemSpec& spec, const Eigen::VectorXd& x, const Eigen::VectorXd& center_y,
                               double radius, const GridSpec& grid);

struct OracleWitness {
  std::string inequality;  // "inner" or "outer"
  double delta = 0.0;
  Eigen::VectorXd x;
  Eigen::VectorXd y;   // inner: the y sample; outer: argmax of the localized value (empty if none)
  double lhs = 0.0;
  double rhs = 0.0;
};

struct CalmCheck {
  double delta = 0.0;
  long x_samples = 0;
  long y_samples = 0;
  long empty = 0;              // x samples whose localized feasible set had no node
  long unresolved = 0;         // outer violations within the grid-error allowance
  double inner_slack = 0.0;    // min over samples of f(xb, yb) - f(xb, y)
  double outer_slack = 0.0;    // min over samples of V(x) - f(xb, yb)
  bool inner_ok = true;
  bool outer_ok = true;
};

struct CalmReport {
  std::vector<CalmCheck> checks;
  OracleVerdict verdict = OracleVerdict::Pass;
  std::optional<OracleWitness> witness;  // worst violation
  std::vector<std::string> notes;
};

/// f(xb, y) <= f(xb, yb) <= V_{kappa delta}(x) on the grids of B_delta(xb) in X
/// and B_delta(yb) in Y(xb), with slack 1e-9 (1 + |f(xb, yb)|). The grid value
/// underestimates V, so an outer violation counts only beyond
/// L * step * sqrt(m) / 2 (L: largest |grad_y f| over the feasible nodes);
/// smaller ones make the verdict degenerate.
CalmReport verify_calm_definition(const ProblemSpec& spec, const CandidatePoint& p, const GridSpec& grid,
                                  const std::vector<double>& deltas);

struct FdFirst {
  double estimate = 0.0;
  double analytic = 0.0;
  double diff = 0.0;
  std::vector<double> raw;  // one-sided quotient per step
  bool empty = false;       // some localized value was -inf
};

/// Richardson-extrapolated (V_{kappa t}(xb + t u) - f(xb, yb)) / t against the dual value.
FdFirst fd_directional_derivative(const ProblemSpec& spec, const CandidatePoint& p, const Eigen::VectorXd& u,
                                  const GridSpec& grid, const std::vector<double>& steps);

struct FdSecond {
  double estimate = 0.0;
  double lower_bound = 0.0;  // -inf when no finite maximizer was found
  double residual = 0.0;     // estimate - lower_bound
  double tol_fd = 0.0;
  std::vector<double> raw;
  bool empty = false;
  bool pass = false;
};

FdSecond fd_second_directional(const ProblemSpec& spec, const CandidatePoint& p, const Eigen::VectorXd& u,
                               const GridSpec& grid, const std::vector<double>& steps);

struct GrowthSide {
  double hat = 0.0;                 // inf of gap / r^2 over the grid
  double exponent = 2.0;            // log2 gap(r) / gap(r/2) along the minimizing sample
  Eigen::VectorXd witness;          // the minimizing sample
  OracleVerdict verdict = OracleVerdict::Pass;
};

struct GrowthReport {
  double delta = 0.0;
  GrowthSide inner;  // eps_hat side, over y
  GrowthSide outer;  // mu_hat side, over x
  OracleVerdict verdict = OracleVerdict::Pass;
  std::vector<std::string> notes;
};

/// Estimates eps, mu of the growth condition on the delta-ball. A side whose
/// gap grows slower than r^1.5 has its infimum pinned to the ball boundary
/// and is reported as degenerate rather than as a constant.
GrowthReport verify_growth(const ProblemSpec& spec, const CandidatePoint& p, const GridSpec& grid);

struct FdRecord {
  Eigen::VectorXd u;
  FdFirst first;
  FdSecond second;
};

struct OracleRun {
  GridSpec grid;
  std::vector<double> deltas;
  CalmReport calm;
  std::vector<GrowthReport> growth;  // one per delta
  std::vector<FdRecord> fd;          // diagnostics along sampled outer directions
  OracleVerdict verdict = OracleVerdict::Pass;
  std::vector<std::string> notes;
};

/// Calm definition over cfg.deltas, growth at each delta, and finite
/// differences along up to 8 directions of L_X with the deltas as steps. The
/// verdict combines calm and growth; the finite differences are reported only.
OracleRun run_oracle(const ProblemSpec& spec, const CandidatePoint& p, const RunConfig& cfg, double kappa);

}  // namespace mmcert
