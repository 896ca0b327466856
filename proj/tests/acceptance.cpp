// Acceptance checks 1-9: one PASS/FAIL line each, exit status 1 if any fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>
#include <string>

#include "mmcert/cli.hpp"
#include "mmcert/first_order.hpp"
#include "mmcert/numlin.hpp"
#include "mmcert/oracle.hpp"
#include "mmcert/second_order.hpp"
#include "support/fixtures.hpp"
#include "support/lp_oracle.hpp"
#include "support/nd_instance.hpp"
#include "support/oracles.hpp"
#include "support/random_problem.hpp"

#ifndef MMCERT_CLI_PATH
#error "MMCERT_CLI_PATH must be defined by the build"
#endif

using namespace mmcert;

namespace {

using Clock = std::chrono::steady_clock;

struct Outcome {
  bool pass = true;
  std::string detail;

  void require(bool ok, const std::string& what) {
    if (!ok) {
      if (pass) detail = what;
      pass = false;
    }
  }
};

int failures = 0;

void report(int id, const char* title, const std::function<Outcome()>& body) {
  const auto t0 = Clock::now();
  Outcome o;
  try {
    o = body();
  } catch (const std::exception& e) {
    o.pass = false;
    o.detail = std::string("exception: ") + e.what();
  }
  const double secs = std::chrono::duration<double>(Clock::now() - t0).count();
  if (!o.pass) ++failures;
  std::printf("criterion %d: %s  %s  [%.2fs] %s\n", id, o.pass ? "PASS" : "FAIL", title, secs, o.detail.c_str());
  std::fflush(stdout);
}

double since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

std::string g(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3g", v);
  return buf;
}

Eigen::VectorXd scalar(double v) { return Eigen::VectorXd::Constant(1, v); }

ProblemSpec fixture(const char* name) { return load_problem(fixture_path(name)); }

// ---------------------------------------------------------------------------

Outcome autodiff() {
  const auto t0 = Clock::now();
  Outcome o;
  oracle::ExpressionGenerator gen(2, 2, 1001);
  int checked = 0;
  double worst_g = 0.0, worst_h = 0.0;
  for (int trial = 0; checked < 1000 && trial < 10000; ++trial) {
    const Expression e = gen(4);
    const auto x = gen.point(2);
    const auto y = gen.point(2);
    Jet jet;
    try {
      jet = differentiate(e, x, y);
    } catch (const DomainError&) {
      continue;
    }
    // steep draws leave the FD reference itself inaccurate
    if (std::abs(jet.value) > 1e4 || jet.hessian.cwiseAbs().maxCoeff() > 1e4) continue;
    Eigen::VectorXd z(4);
    z << x[0], x[1], y[0], y[1];
    const oracle::ZFunction f{&e, 2};
    double eg = 0.0, eh = 0.0;
    bool usable = true;
    for (int i = 0; i < 4 && usable; ++i) {
      const auto gi = oracle::fd_first(f, z, Eigen::VectorXd::Unit(4, i));
      if (!gi) {
        usable = false;
        break;
      }
      eg = std::max(eg, std::abs(*gi - jet.gradient(i)) / std::max(1.0, std::abs(jet.gradient(i))));
      for (int j = 0; j <= i; ++j) {
        const auto hij = oracle::fd_second(f, z, Eigen::VectorXd::Unit(4, i), Eigen::VectorXd::Unit(4, j));
        if (!hij) {
          usable = false;
          break;
        }
        eh = std::max(eh, std::abs(*hij - jet.hessian(i, j)) / std::max(1.0, std::abs(jet.hessian(i, j))));
      }
    }
    if (!usable) continue;
    ++checked;
    worst_g = std::max(worst_g, eg);
    worst_h = std::max(worst_h, eh);
  }
  const double secs = since(t0);
  o.require(checked >= 1000, "only " + std::to_string(checked) + " usable expressions");
  o.require(worst_g <= 1e-6, "gradient error " + g(worst_g));
  o.require(worst_h <= 1e-5, "hessian error " + g(worst_h));
  o.require(secs < 30, "runtime " + g(secs) + "s");
  if (o.pass) {
    o.detail = std::to_string(checked) + " expressions, max rel gradient err " + g(worst_g) + ", hessian " +
               g(worst_h);
  }
  return o;
}

Outcome lp() {
  const auto t0 = Clock::now();
  Outcome o;
  std::mt19937_64 rng(2025);
  int counts[3] = {0, 0, 0};
  double worst = 0.0;
  const int total = 600;
  for (int t = 0; t < total; ++t) {
    const LinearProgram prog = oracle::random_lp(rng, 6, 8);
    const auto ref = oracle::lp_reference(prog);
    const LpSolution s = solve_lp(prog);
    o.require(s.status == ref.status, "status mismatch on LP " + std::to_string(t));
    ++counts[static_cast<int>(s.status)];
    if (s.status == LpStatus::Optimal && ref.status == LpStatus::Optimal) {
      worst = std::max(worst, std::abs(s.value - ref.value));
    }
  }
  const double secs = since(t0);
  o.require(worst <= 1e-8, "value error " + g(worst));
  o.require(secs < 30, "runtime " + g(secs) + "s");
  if (o.pass) {
    o.detail = std::to_string(total) + " LPs (" + std::to_string(counts[0]) + " optimal, " +
               std::to_string(counts[1]) + " infeasible, " + std::to_string(counts[2]) + " unbounded), max |diff| " +
               g(worst);
  }
  return o;
}

Outcome strong_duality() {
  Outcome o;
  std::mt19937_64 rng(303);
  std::normal_distribution<double> N;
  int fixtures = 0;
  long directions = 0;
  double worst = 0.0;
  for (int trial = 0; trial < 2000 && fixtures < 120; ++trial) {
    const auto rp = oracle::random_problem(rng);
    const CandidatePoint p(rp.spec, Eigen::VectorXd::Zero(rp.spec.n), Eigen::VectorXd::Zero(rp.spec.m));
    ActiveSets act;
    try {
      act = active_sets(rp.spec, p, default_eps_act(p));
    } catch (const InfeasiblePoint&) {
      continue;
    }
    if (!mfcq_check(rp.spec, p, act).pass) continue;
    ++fixtures;
    for (int k = 0; k < 64; ++k) {
      Eigen::VectorXd u(rp.spec.n);
      for (int i = 0; i < rp.spec.n; ++i) u(i) = N(rng);
      u.normalize();
      const DualityGap gap = duality_gap(rp.spec, p, act, u);
      ++directions;
      o.require(!gap.structural, "structural gap under MFCQ");
      worst = std::max(worst, std::abs(gap.primal - gap.dual));
    }
  }
  o.require(fixtures >= 100, "only " + std::to_string(fixtures) + " MFCQ fixtures");
  o.require(worst <= 1e-7, "max |primal - dual| " + g(worst));
  if (o.pass) {
    o.detail = std::to_string(fixtures) + " fixtures x 64 directions, max |primal - dual| " + g(worst);
  }
  return o;
}

Outcome p_saddle() {
  const auto t0 = Clock::now();
  Outcome o;
  const ProblemSpec spec = fixture("p_saddle.problem");
  RunConfig cfg;
  cfg.stages = {"first", "second", "jacobian", "oracle"};
  cfg.resolution = 41;
  cfg.deltas = {0.2, 0.1, 0.05};
  const CertificateReport r = certify(spec, scalar(0), scalar(0), cfg);

  const auto& fo = *r.first_order;
  o.require(fo.overall == FoVerdict::Certified, "first order not certified");
  o.require(fo.witness && fo.witness->alpha_ineq.size() + fo.witness->alpha_eq.size() +
                                  fo.witness->beta_ineq.size() + fo.witness->beta_eq.size() ==
                              0,
            "multipliers not empty");

  // analytic maximizer of the inner quadratic: h* = -Hyy^{-1} Hyx u
  const CandidatePoint p(spec, scalar(0), scalar(0));
  const Eigen::MatrixXd H = p.f().hessian;
  const auto& so = *r.second_order;
  int critical = 0;
  bool plus = false, minus = false;
  for (const auto& d : so.directions) {
    if (!d.critical) continue;
    ++critical;
    const double u = d.u(0);
    plus = plus || std::abs(u - 1) < 1e-12;
    minus = minus || std::abs(u + 1) < 1e-12;
    const double h = -H(1, 0) * u / H(1, 1);
    const double value = H(0, 0) * u * u + 2 * H(0, 1) * u * h + H(1, 1) * h * h;
    o.require(d.best_h.size() == 1 && std::abs(d.best_h(0) - 0.5 * u) <= 1e-9 && std::abs(h - 0.5 * u) <= 1e-12,
              "h* != 0.5 u");
    o.require(std::abs(d.value - 0.5 * u * u) <= 1e-9 && std::abs(value - 0.5 * u * u) <= 1e-12, "value != 0.5 u^2");
    o.require(d.ssosc && d.ssosc->pass, "SSOSC fails");
  }
  o.require(critical == 2 && plus && minus, "critical directions are not {+1, -1}");
  o.require(so.overall == Verdict::SufficientCertified, "second order not sufficient");
  o.require(r.overall == Verdict::SufficientCertified, "overall " + std::string(to_string(r.overall)));

  const OracleRun& orc = *r.oracle;
  o.require(orc.grid.resolution == 41, "resolution");
  o.require(orc.calm.verdict == OracleVerdict::Pass, "calm definition not verified");
  o.require(orc.growth.size() == 3, "growth not run at three radii");
  double eps_lo = 1e9, eps_hi = -1e9, mu_lo = 1e9, mu_hi = -1e9;
  for (const auto& gr : orc.growth) {
    o.require(gr.verdict == OracleVerdict::Pass, "growth fails at delta " + g(gr.delta));
    eps_lo = std::min(eps_lo, gr.inner.hat);
    eps_hi = std::max(eps_hi, gr.inner.hat);
    mu_lo = std::min(mu_lo, gr.outer.hat);
    mu_hi = std::max(mu_hi, gr.outer.hat);
  }
  o.require(eps_lo >= 0.8 && eps_hi <= 1.2, "eps_hat outside [0.8, 1.2]");
  o.require(mu_lo >= 0.2 && mu_hi <= 0.3, "mu_hat outside [0.2, 0.3]");
  const double secs = since(t0);
  o.require(secs < 10, "runtime " + g(secs) + "s");
  if (o.pass) {
    o.detail = "sufficient-certified; h* = 0.5u, value 0.5; eps_hat in [" + g(eps_lo) + ", " + g(eps_hi) +
               "], mu_hat in [" + g(mu_lo) + ", " + g(mu_hi) + "]";
  }
  return o;
}

Outcome p2() {
  const auto t0 = Clock::now();
  Outcome o;
  const ProblemSpec spec = fixture("p2.problem");
  RunConfig cfg;
  cfg.stages = {"first", "second"};
  const CertificateReport r = certify(spec, scalar(0), scalar(0), cfg);
  const auto& fo = *r.first_order;
  o.require(fo.overall == FoVerdict::Certified, "first order not certified");
  o.require(fo.witness.has_value(), "no multiplier witness");
  if (fo.witness) {
    const MultiplierVector& mu = *fo.witness;
    o.require(mu.alpha_ineq.size() == 1 && std::abs(mu.alpha_ineq(0) - 1) <= 1e-9, "alpha != 1");
    o.require(mu.beta_ineq.size() == 1 && std::abs(mu.beta_ineq(0) - 1) <= 1e-9, "beta != 1");
    const CandidatePoint p(spec, scalar(0), scalar(0));
    const KktReport k = kkt_residual(spec, p, mu);
    const double res = std::max({k.stationarity, k.sign_violation, k.complementarity});
    o.require(res <= 1e-9, "KKT residual " + g(res));
  }
  bool found = false;
  for (const auto& rec : fo.outer) {
    if (std::abs(rec.u(0) - 1) < 1e-12) {
      found = true;
      o.require(std::abs(rec.duality.dual - 1) <= 1e-9, "duality value at u = 1 is " + g(rec.duality.dual));
    }
  }
  o.require(found, "u = 1 not sampled");
  for (const auto& d : r.second_order->directions) o.require(!d.critical, "critical direction found");
  o.require(fo.cq.mfcq.pass, "MFCQ fails");
  o.require(fo.cq.mfcq.w.size() == 1 && std::abs(fo.cq.mfcq.w(0) + 1) <= 1e-9, "MFCQ witness w != -1");
  const double secs = since(t0);
  o.require(secs < 5, "runtime " + g(secs) + "s");
  if (o.pass) o.detail = "(alpha, beta) = (1, 1), duality value 1 at u = 1, no critical directions, w = -1";
  return o;
}

Outcome refutation() {
  Outcome o;
  const ProblemSpec saddle = fixture("p_saddle.problem");
  const CertificateReport r = certify(saddle, scalar(0.5), scalar(0.25), RunConfig{});
  o.require(r.overall == Verdict::Refuted, "off-center saddle not refuted");
  std::string witness;
  for (const auto& rec : r.first_order->outer) {
    if (!rec.pass) {
      witness = "u = " + g(rec.u(0)) + " with directional value " + g(rec.duality.dual);
      o.require(rec.duality.dual < 0, "witness direction does not descend");
    }
  }
  o.require(!witness.empty(), "no refuting direction in the report");

  const ProblemSpec flipped = fixture("p_saddle_flipped.problem");
  const CertificateReport rf = certify(flipped, scalar(0), scalar(0), RunConfig{});
  o.require(rf.overall == Verdict::Refuted, "flipped saddle not refuted");
  const CandidatePoint p(flipped, scalar(0), scalar(0));
  const ActiveSets act = active_sets(flipped, p, default_eps_act(p));
  const InnerSoncResult inner = inner_sonc_check(flipped, p, act, 64, 0);
  o.require(!inner.pass && !inner.inconclusive, "inner SONC does not fail");
  o.require(rf.second_order && !rf.second_order->inner.pass, "report does not carry the inner SONC failure");
  if (o.pass) {
    o.detail = "off-center saddle refuted at " + witness + "; flipped saddle refuted at inner SONC (h = " +
               g(inner.directions.empty() ? 0.0 : inner.directions.front().h(0)) + ")";
  }
  return o;
}

Outcome hstar_vs_reduced() {
  Outcome o;
  std::mt19937_64 rng(707);
  int checked = 0, faces = 0;
  double worst = 0.0;
  for (int trial = 0; trial < 1000 && checked < 250; ++trial) {
    const oracle::NdInstance inst = oracle::nd_instance(rng);
    const CandidatePoint p(inst.spec, Eigen::VectorXd::Zero(inst.spec.n), Eigen::VectorXd::Zero(inst.spec.m));
    const ActiveSets act = active_sets(inst.spec, p, default_eps_act(p));
    const Eigen::VectorXd u = oracle::random_unit(rng, inst.spec.n);
    HStar h;
    try {
      h = hstar(inst.spec, p, act, inst.beta, u);
    } catch (const EmptyCriticalSet&) {
      continue;
    }
    ++checked;
    if (!h.face.empty()) ++faces;
    const double red = reduced_hessian_value(inst.spec, p, act, inst.beta, u, h.face);
    worst = std::max(worst, std::abs(red - h.value));
  }
  o.require(checked >= 200, "only " + std::to_string(checked) + " instances");
  o.require(worst <= 1e-8, "max |diff| " + g(worst));
  if (o.pass) {
    o.detail = std::to_string(checked) + " instances (" + std::to_string(faces) + " with active face), max |diff| " +
               g(worst);
  }
  return o;
}

// Level k halves the steps and doubles the grid; a level is converged when
// the quantity drops by half or is already at rounding level. Both named
// fixtures are exact at every level (V is quadratic and its maximizer sits on
// a grid node), so the cubic saddle is included to exercise a real rate.
bool halves(double prev, double next) { return next <= 0.5 * prev || next <= 1e-12; }

Outcome fd_consistency() {
  Outcome o;
  std::ostringstream detail;
  for (const char* name : {"p_saddle.problem", "p2.problem", "cubic_saddle.problem"}) {
    const ProblemSpec spec = fixture(name);
    const CandidatePoint p(spec, scalar(0), scalar(0));
    detail << (detail.tellp() > 0 ? " " : "") << name << ":";
    for (double u : {1.0, -1.0}) {
      std::vector<double> diffs, residuals;
      for (int k = 0; k < 4; ++k) {
        const double s = std::ldexp(1.0, -k);
        GridSpec grid;
        grid.kappa = 2.0;
        grid.resolution = 40 * (1 << k) + 1;
        grid.delta = 0.2 * s;
        const std::vector<double> steps = {0.2 * s, 0.1 * s};
        diffs.push_back(fd_directional_derivative(spec, p, scalar(u), grid, steps).diff);
        residuals.push_back(std::abs(fd_second_directional(spec, p, scalar(u), grid, steps).residual));
      }
      for (int k = 0; k + 1 < 4; ++k) {
        o.require(halves(diffs[k], diffs[k + 1]), std::string(name) + " first-order diff stalls at level " +
                                                      std::to_string(k + 1));
        o.require(halves(residuals[k], residuals[k + 1]),
                  std::string(name) + " second-order residual stalls at level " + std::to_string(k + 1));
      }
      detail << " u=" << g(u) << " diff " << g(diffs.front()) << "->" << g(diffs.back()) << ", residual "
             << g(residuals.front()) << "->" << g(residuals.back()) << (u > 0 ? ";" : "");
    }
  }
  if (o.pass) o.detail = detail.str();
  return o;
}

std::string run_binary(const std::string& cmd) {
  std::string out;
  FILE* pipe = ::popen(cmd.c_str(), "r");
  if (!pipe) throw std::runtime_error("cannot run " + cmd);
  char buf[4096];
  std::size_t got;
  while ((got = std::fread(buf, 1, sizeof buf, pipe)) > 0) out.append(buf, got);
  ::pclose(pipe);
  return out;
}

Outcome determinism() {
  Outcome o;
  int compared = 0;
  for (const char* name : {"p_saddle.problem", "p2.problem", "cubic_saddle.problem", "p_saddle_flipped.problem"}) {
    const std::string cmd = std::string("'") + MMCERT_CLI_PATH + "' certify '" + fixture_path(name).string() +
                            "' --format json --stages first,second,jacobian,oracle";
    const std::string a = run_binary(cmd);
    const std::string b = run_binary(cmd);
    o.require(!a.empty() && a.find("\"schema\": 1") != std::string::npos, std::string(name) + ": no JSON report");
    o.require(a == b, std::string(name) + ": reports differ");
    ++compared;
  }
  if (o.pass) o.detail = std::to_string(compared) + " fixtures, two CLI runs each, byte-identical";
  return o;
}

}  // namespace

int main() {
  report(1, "autodiff vs finite differences", autodiff);
  report(2, "simplex vs vertex enumeration", lp);
  report(3, "strong duality under MFCQ", strong_duality);
  report(4, "P-saddle end to end", p_saddle);
  report(5, "P2 end to end", p2);
  report(6, "refutations", refutation);
  report(7, "hstar vs reduced Hessian", hstar_vs_reduced);
  report(8, "finite-difference consistency", fd_consistency);
  report(9, "deterministic JSON", determinism);
  std::printf("%d of 9 criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
