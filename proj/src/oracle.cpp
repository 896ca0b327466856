#include "mmcert/oracle.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <functional>
#include <limits>
#include <stdexcept>

#include "mmcert/cones.hpp"
#include "mmcert/first_order.hpp"
#include "mmcert/multipliers.hpp"
#include "mmcert/numlin.hpp"
#include "mmcert/second_order.hpp"

namespace mmcert {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double eval_at(const Expression& e, const Eigen::VectorXd& x, const Eigen::VectorXd& y) {
  return eval(e, std::span<const double>(x.data(), static_cast<std::size_t>(x.size())),
              std::span<const double>(y.data(), static_cast<std::size_t>(y.size())));
}

bool in_Y(const ProblemSpec& spec, const Eigen::VectorXd& x, const Eigen::VectorXd& y, double tol) {
  for (const auto& g : spec.varphi_ineq)
    if (eval_at(g, x, y) > tol) return false;
  for (const auto& g : spec.varphi_eq)
    if (std::abs(eval_at(g, x, y)) > tol) return false;
  return true;
}

bool in_X(const ProblemSpec& spec, const Eigen::VectorXd& x, double tol) {
  const Eigen::VectorXd none(0);
  for (const auto& g : spec.phi_ineq)
    if (eval_at(g, x, none) > tol) return false;
  for (const auto& g : spec.phi_eq)
    if (std::abs(eval_at(g, x, none)) > tol) return false;
  return true;
}

void check_budget(double points) {
  if (points > kGridBudget) {
    throw std::invalid_argument("grid sweep of " + std::to_string(static_cast<long long>(points)) +
                                " points exceeds the budget; lower the resolution");
  }
}

double ball_count(int dim, int K) { return std::pow(2.0 * K + 1.0, dim); }

// Visits center + step * k for integer k in [-K, K]^d with |k| <= K. The
// center comes first.
template <class Visit>
void for_each_ball_node(const Eigen::VectorXd& center, double radius, int K, Visit&& visit) {
  const int d = static_cast<int>(center.size());
  visit(center);
  if (radius <= 0.0 || d == 0) return;
  const double step = radius / K;
  std::vector<int> k(static_cast<std::size_t>(d), -K);
  Eigen::VectorXd pt(d);
  while (true) {
    long sq = 0;
    bool zero = true;
    for (int i = 0; i < d; ++i) {
      sq += static_cast<long>(k[static_cast<std::size_t>(i)]) * k[static_cast<std::size_t>(i)];
      zero = zero && k[static_cast<std::size_t>(i)] == 0;
    }
    if (!zero && sq <= static_cast<long>(K) * K) {
      for (int i = 0; i < d; ++i) pt(i) = center(i) + step * k[static_cast<std::size_t>(i)];
      visit(pt);
    }
    int i = 0;
    while (i < d && k[static_cast<std::size_t>(i)] == K) k[static_cast<std::size_t>(i++)] = -K;
    if (i == d) break;
    ++k[static_cast<std::size_t>(i)];
  }
}

// Half-diagonal of a grid cell times the largest y-gradient over the
// feasible nodes of the ball.
double grid_allowance(const ProblemSpec& spec, const Eigen::VectorXd& x, const Eigen::VectorXd& center, double radius,
                      const GridSpec& grid) {
  const int K = grid.half_width();
  double L = 0.0;
  for_each_ball_node(center, radius, K, [&](const Eigen::VectorXd& y) {
    if (!in_Y(spec, x, y, grid.feas_tol)) return;
    const Jet j = differentiate(spec.f, std::span<const double>(x.data(), static_cast<std::size_t>(x.size())),
                                std::span<const double>(y.data(), static_cast<std::size_t>(y.size())));
    L = std::max(L, j.gradient.tail(spec.m).norm());
  });
  return L * (radius / K) * std::sqrt(static_cast<double>(spec.m)) / 2.0;
}

// Polynomial extrapolation of (t_i, D_i) to t = 0 (Neville).
double extrapolate_to_zero(const std::vector<double>& t, std::vector<double> D) {
  const std::size_t n = D.size();
  for (std::size_t k = 1; k < n; ++k) {
    for (std::size_t i = 0; i + k < n; ++i) {
      D[i] = (t[i] * D[i + 1] - t[i + k] * D[i]) / (t[i] - t[i + k]);
    }
  }
  return D[0];
}

void validate_steps(const std::vector<double>& steps) {
  if (steps.empty()) throw std::invalid_argument("empty step list");
  for (std::size_t i = 0; i < steps.size(); ++i) {
    if (!(steps[i] > 0.0)) throw std::invalid_argument("steps must be positive");
    for (std::size_t j = 0; j < i; ++j)
      if (steps[i] == steps[j]) throw std::invalid_argument("steps must be distinct");
  }
}

// max over enumerated h of min over the optimal multiplier face of the
// L_max form, h ranging over the maximizers of the first-order LP.
double second_order_lower_bound(const ProblemSpec& spec, const CandidatePoint& p, const ActiveSets& act,
                                const Eigen::VectorXd& u, double vprime) {
  const int n = spec.n;
  const int m = spec.m;
  PolyhedralCone S = linearization_cone_Y(spec, p, act, u);
  S.add_eq(p.f().gradient.tail(m), p.f().gradient.head(n).dot(u) - vprime);
  const OptimalFaceVertices face = lambda2_max_vertices(spec, p, act, u);
  std::vector<Eigen::MatrixXd> hessians;
  std::vector<Eigen::VectorXd> candidates;
  for (const auto& beta : face.vertices) {
    hessians.push_back(lagrangian_hessian(spec, p, beta));
    const Eigen::MatrixXd& H = hessians.back();
    const ConeQuadResult q = max_quad_over_cone(2.0 * H.bottomRightCorner(m, m), 2.0 * H.bottomLeftCorner(m, n) * u, S);
    if (q.feasible && !q.unbounded) candidates.push_back(q.argmax);
  }
  double best = -kInf;
  for (const auto& h : candidates) {
    double worst = kInf;
    for (const auto& H : hessians) worst = std::min(worst, quadratic_form(H, u, h));
    best = std::max(best, worst);
  }
  return best;
}

}  // namespace

void GridSpec::validate() const {
  if (resolution < 3) throw std::invalid_argument("resolution must be at least 3");
  if (!(delta > 0.0)) throw std::invalid_argument("delta must be positive");
  if (!(kappa > 0.0)) throw std::invalid_argument("kappa must be positive");
  if (!(feas_tol >= 0.0)) throw std::invalid_argument("feasibility tolerance must be nonnegative");
}

const char* to_string(OracleVerdict v) {
  switch (v) {
    case OracleVerdict::Pass: return "pass";
    case OracleVerdict::Fail: return "fail";
    case OracleVerdict::Degenerate: return "degenerate";
  }
  return "?";
}

OracleVerdict oracle_verdict_from_string(const std::string& s) {
  if (s == "pass") return OracleVerdict::Pass;
  if (s == "fail") return OracleVerdict::Fail;
  if (s == "degenerate") return OracleVerdict::Degenerate;
  throw std::invalid_argument("unknown oracle verdict: " + s);
}

LocalizedValue localized_value(const ProblemSpec& spec, const Eigen::VectorXd& x, const Eigen::VectorXd& center_y,
                               double radius, const GridSpec& grid) {
  grid.validate();
  const int K = grid.half_width();
  check_budget(ball_count(spec.m, K));
  LocalizedValue out;
  out.value = -kInf;
  for_each_ball_node(center_y, radius, K, [&](const Eigen::VectorXd& y) {
    if (!in_Y(spec, x, y, grid.feas_tol)) return;
    ++out.feasible;
    const double v = eval_at(spec.f, x, y);
    if (out.empty || v > out.value) {
      out.value = v;
      out.argmax = y;
      out.empty = false;
    }
  });
  return out;
}

CalmReport verify_calm_definition(const ProblemSpec& spec, const CandidatePoint& p, const GridSpec& grid,
                                  const std::vector<double>& deltas) {
  grid.validate();
  if (spec.n + spec.m > 6) throw std::invalid_argument("grid oracle limited to n + m <= 6");
  const int K = grid.half_width();
  check_budget(ball_count(spec.n, K) * ball_count(spec.m, K));
  CalmReport r;
  if (deltas.empty()) {
    r.notes.push_back("empty delta list: nothing checked");
    return r;
  }
  const double fbar = p.f().value;
  const double tol = 1e-9 * (1.0 + std::abs(fbar));
  double worst = 0.0;
  long empty_total = 0;
  long unresolved_total = 0;
  for (double delta : deltas) {
    if (!(delta > 0.0)) throw std::invalid_argument("delta must be positive");
    CalmCheck c;
    c.delta = delta;
    c.inner_slack = kInf;
    c.outer_slack = kInf;
    for_each_ball_node(p.y(), delta, K, [&](const Eigen::VectorXd& y) {
      if (!in_Y(spec, p.x(), y, grid.feas_tol)) return;
      ++c.y_samples;
      const double fy = eval_at(spec.f, p.x(), y);
      c.inner_slack = std::min(c.inner_slack, fbar - fy);
      if (fy - fbar > tol && fy - fbar > worst) {
        worst = fy - fbar;
        r.witness = OracleWitness{"inner", delta, p.x(), y, fy, fbar};
      }
    });
    for_each_ball_node(p.x(), delta, K, [&](const Eigen::VectorXd& x) {
      if (!in_X(spec, x, grid.feas_tol)) return;
      ++c.x_samples;
      const LocalizedValue v = localized_value(spec, x, p.y(), grid.kappa * delta, grid);
      if (v.empty) {
        ++c.empty;
        return;
      }
      c.outer_slack = std::min(c.outer_slack, v.value - fbar);
      const double violation = fbar - v.value;
      if (violation <= tol) return;
      if (violation <= tol + grid_allowance(spec, x, p.y(), grid.kappa * delta, grid)) {
        ++c.unresolved;
      } else if (violation > worst) {
        worst = violation;
        r.witness = OracleWitness{"outer", delta, x, v.argmax, fbar, v.value};
      }
    });
    c.inner_ok = c.inner_slack >= -tol;
    c.outer_ok = c.outer_slack >= -tol;
    empty_total += c.empty;
    unresolved_total += c.unresolved;
    r.checks.push_back(c);
  }
  if (r.witness) {
    r.verdict = OracleVerdict::Fail;
  } else if (empty_total > 0 || unresolved_total > 0) {
    r.verdict = OracleVerdict::Degenerate;
  }
  if (empty_total > 0) {
    r.notes.push_back("localized feasible set empty at " + std::to_string(empty_total) + " x samples");
  }
  if (unresolved_total > 0) {
    r.notes.push_back("outer inequality unresolved by the grid at " + std::to_string(unresolved_total) +
                      " x samples");
  }
  return r;
}

FdFirst fd_directional_derivative(const ProblemSpec& spec, const CandidatePoint& p, const Eigen::VectorXd& u,
                                  const GridSpec& grid, const std::vector<double>& steps) {
  validate_steps(steps);
  FdFirst r;
  if (u.norm() == 0.0) return r;
  const ActiveSets act = active_sets(spec, p, default_eps_act(p));
  r.analytic = duality_gap(spec, p, act, u).dual;
  const double fbar = p.f().value;
  for (double t : steps) {
    const LocalizedValue v = localized_value(spec, p.x() + t * u, p.y(), grid.kappa * t * u.norm(), grid);
    if (v.empty) r.empty = true;
    r.raw.push_back((v.value - fbar) / t);
  }
  if (r.empty) {
    r.estimate = -kInf;
    r.diff = kInf;
    return r;
  }
  r.estimate = extrapolate_to_zero(steps, r.raw);
  r.diff = std::abs(r.estimate - r.analytic);
  return r;
}

FdSecond fd_second_directional(const ProblemSpec& spec, const CandidatePoint& p, const Eigen::VectorXd& u,
                               const GridSpec& grid, const std::vector<double>& steps) {
  validate_steps(steps);
  FdSecond r;
  if (u.norm() == 0.0) {
    r.pass = true;
    return r;
  }
  const ActiveSets act = active_sets(spec, p, default_eps_act(p));
  const double vprime = duality_gap(spec, p, act, u).dual;
  for (double t : steps) {
    const double radius = grid.kappa * t * u.norm();
    const LocalizedValue v1 = localized_value(spec, p.x() + t * u, p.y(), radius, grid);
    const LocalizedValue v0 = localized_value(spec, p.x(), p.y(), radius, grid);
    if (v1.empty || v0.empty) r.empty = true;
    r.raw.push_back(2.0 * (v1.value - v0.value - t * vprime) / (t * t));
  }
  const double h = 1.0 / grid.half_width();
  const double curvature = 1.0 + p.f().hessian.cwiseAbs().maxCoeff();
  r.tol_fd = 10.0 * (h + h * h * curvature);
  if (r.empty || !std::isfinite(vprime)) {
    r.estimate = -kInf;
    r.lower_bound = std::isfinite(vprime) ? second_order_lower_bound(spec, p, act, u, vprime) : -kInf;
    r.residual = -kInf;
    return r;
  }
  r.estimate = extrapolate_to_zero(steps, r.raw);
  r.lower_bound = second_order_lower_bound(spec, p, act, u, vprime);
  r.residual = r.estimate - r.lower_bound;
  r.pass = r.estimate >= r.lower_bound - r.tol_fd;
  return r;
}

namespace {

// gap / r^2 over the ball, excluding the center; exponent from halving the
// minimizing sample's offset.
template <class Gap>
GrowthSide growth_side(const Eigen::VectorXd& center, double delta, int K, Gap&& gap) {
  GrowthSide s;
  s.hat = kInf;
  double gap_at_min = 0.0;
  bool empty_seen = false;
  for_each_ball_node(center, delta, K, [&](const Eigen::VectorXd& z) {
    const double r = (z - center).norm();
    if (r == 0.0) return;
    const std::optional<double> g = gap(z, r);
    if (!g) return;
    if (!std::isfinite(*g)) {
      empty_seen = true;
      return;
    }
    const double q = *g / (r * r);
    if (q < s.hat) {
      s.hat = q;
      s.witness = z;
      gap_at_min = *g;
    }
  });
  if (s.witness.size() == 0) {
    s.verdict = empty_seen ? OracleVerdict::Degenerate : OracleVerdict::Pass;
    return s;
  }
  if (s.hat <= 0.0) {
    s.verdict = OracleVerdict::Fail;
    return s;
  }
  const Eigen::VectorXd half = center + 0.5 * (s.witness - center);
  const std::optional<double> g2 = gap(half, 0.5 * (s.witness - center).norm());
  if (g2 && std::isfinite(*g2) && *g2 <= 0.0) {
    s.witness = half;
    s.hat = *g2;
    s.verdict = OracleVerdict::Fail;
    return s;
  }
  if (g2 && std::isfinite(*g2)) s.exponent = std::log2(gap_at_min / *g2);
  s.verdict = s.exponent < 1.5 ? OracleVerdict::Degenerate : OracleVerdict::Pass;
  if (empty_seen && s.verdict == OracleVerdict::Pass) s.verdict = OracleVerdict::Degenerate;
  return s;
}

std::string shortest(double v) {
  std::array<char, 64> buf{};
  auto [end, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  return std::string(buf.data(), end);
}

OracleVerdict combine(OracleVerdict a, OracleVerdict b) {
  if (a == OracleVerdict::Fail || b == OracleVerdict::Fail) return OracleVerdict::Fail;
  if (a == OracleVerdict::Degenerate || b == OracleVerdict::Degenerate) return OracleVerdict::Degenerate;
  return OracleVerdict::Pass;
}

}  // namespace

GrowthReport verify_growth(const ProblemSpec& spec, const CandidatePoint& p, const GridSpec& grid) {
  grid.validate();
  if (spec.n + spec.m > 6) throw std::invalid_argument("grid oracle limited to n + m <= 6");
  const int K = grid.half_width();
  check_budget(ball_count(spec.n, K) * ball_count(spec.m, K));
  const double fbar = p.f().value;
  const double step = grid.delta / K;
  GrowthReport r;
  r.delta = grid.delta;
  r.inner = growth_side(p.y(), grid.delta, K, [&](const Eigen::VectorXd& y, double) -> std::optional<double> {
    if (!in_Y(spec, p.x(), y, grid.feas_tol)) return std::nullopt;
    return fbar - eval_at(spec.f, p.x(), y);
  });
  r.outer = growth_side(p.x(), grid.delta, K, [&](const Eigen::VectorXd& x, double dist) -> std::optional<double> {
    if (!in_X(spec, x, grid.feas_tol)) return std::nullopt;
    const LocalizedValue v = localized_value(spec, x, p.y(), grid.kappa * std::max(dist, step), grid);
    return v.empty ? kInf : v.value - fbar;
  });
  r.verdict = combine(r.inner.verdict, r.outer.verdict);
  if (r.inner.verdict == OracleVerdict::Degenerate) r.notes.push_back("boundary-degenerate inner growth");
  if (r.outer.verdict == OracleVerdict::Degenerate) r.notes.push_back("degenerate outer growth (boundary-pinned or empty localized set)");
  return r;
}

OracleRun run_oracle(const ProblemSpec& spec, const CandidatePoint& p, const RunConfig& cfg, double kappa) {
  OracleRun r;
  r.grid.kappa = kappa;
  r.grid.resolution = cfg.resolution;
  r.deltas = cfg.deltas;
  std::sort(r.deltas.begin(), r.deltas.end(), std::greater<>());
  r.grid.delta = r.deltas.empty() ? 0.1 : r.deltas.front();
  r.grid.validate();

  r.calm = verify_calm_definition(spec, p, r.grid, r.deltas);
  r.verdict = r.calm.verdict;
  for (double delta : r.deltas) {
    GridSpec g = r.grid;
    g.delta = delta;
    r.growth.push_back(verify_growth(spec, p, g));
    r.verdict = combine(r.verdict, r.growth.back().verdict);
  }
  if (r.deltas.empty()) {
    r.notes.push_back("empty delta list: growth and finite differences skipped");
    return r;
  }

  const ActiveSets act = active_sets(spec, p, cfg.eps_act ? *cfg.eps_act : default_eps_act(p));
  const DirectionSample ds = sample_directions(linearization_cone_X(spec, p, act), std::min(cfg.budget, 8), cfg.seed);
  for (const auto& u : ds.directions) {
    FdRecord rec;
    rec.u = u;
    rec.first = fd_directional_derivative(spec, p, u, r.grid, r.deltas);
    try {
      rec.second = fd_second_directional(spec, p, u, r.grid, r.deltas);
    } catch (const LambdaMaxEmpty&) {
      rec.second.lower_bound = -kInf;
      r.notes.push_back("inner multiplier set empty: no second-order bound");
    }
    r.fd.push_back(std::move(rec));
  }
  for (const auto& c : r.calm.notes) r.notes.push_back(c);
  for (const auto& g : r.growth)
    for (const auto& n : g.notes) r.notes.push_back("delta " + shortest(g.delta) + ": " + n);
  return r;
}

}  // namespace mmcert
