#include "mmcert/first_order.hpp"

#include <cmath>
#include <limits>
#include <random>

#include "mmcert/numlin.hpp"

namespace mmcert {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

Eigen::MatrixXd rows_of(const std::vector<FunctionJet>& jets, const std::vector<int>& idx, int offset, int len) {
  Eigen::MatrixXd G(static_cast<Eigen::Index>(idx.size()), len);
  for (std::size_t k = 0; k < idx.size(); ++k) {
    G.row(static_cast<Eigen::Index>(k)) = jets[static_cast<std::size_t>(idx[k])].gradient.segment(offset, len).transpose();
  }
  return G;
}

std::vector<int> all_of(std::size_t n) {
  std::vector<int> v(n);
  for (std::size_t i = 0; i < n; ++i) v[i] = static_cast<int>(i);
  return v;
}

// max s s.t. Ge w = 0, Gi w + s <= 0, |w|_inf <= 1, s <= 1.
MfcqResult mfcq_lp(const Eigen::MatrixXd& Gi, const Eigen::MatrixXd& Ge) {
  const int d = static_cast<int>(std::max(Gi.cols(), Ge.cols()));
  MfcqResult r;
  r.rank_ok = numerical_rank(Ge) == Ge.rows();
  LinearProgram lp(d + 1, true);
  lp.c.setZero(d + 1);
  lp.c(d) = -1.0;
  for (Eigen::Index i = 0; i < Ge.rows(); ++i) {
    Eigen::VectorXd row = Eigen::VectorXd::Zero(d + 1);
    row.head(d) = Ge.row(i).transpose();
    lp.add_row(row, Sense::Eq, 0.0);
  }
  for (Eigen::Index i = 0; i < Gi.rows(); ++i) {
    Eigen::VectorXd row = Eigen::VectorXd::Zero(d + 1);
    row.head(d) = Gi.row(i).transpose();
    row(d) = 1.0;
    lp.add_row(row, Sense::Le, 0.0);
  }
  for (int j = 0; j <= d; ++j) {
    const Eigen::VectorXd e = Eigen::VectorXd::Unit(d + 1, j);
    lp.add_row(e, Sense::Le, 1.0);
    if (j < d) lp.add_row(e, Sense::Ge, -1.0);
  }
  const LpSolution sol = solve_lp(lp);
  if (sol.status != LpStatus::Optimal) throw NumericalBreakdown("MFCQ LP not optimal");
  r.s = sol.z(d);
  r.w = sol.z.head(d);
  r.pass = r.rank_ok && r.s > 1e-7;
  return r;
}

// maximize g^T h over the cone section (offsets allowed), optionally boxed.
LpSolution max_linear(const Eigen::VectorXd& g, const PolyhedralCone& c, bool box) {
  const int d = c.dim;
  LinearProgram lp(d, true);
  lp.c = -g;
  for (int i = 0; i < c.n_ineq(); ++i) lp.add_row(c.A_ineq.row(i).transpose(), Sense::Le, -c.off_ineq(i));
  for (int i = 0; i < c.n_eq(); ++i) lp.add_row(c.A_eq.row(i).transpose(), Sense::Eq, -c.off_eq(i));
  if (box) {
    for (int j = 0; j < d; ++j) {
      lp.add_row(Eigen::VectorXd::Unit(d, j), Sense::Le, 1.0);
      lp.add_row(Eigen::VectorXd::Unit(d, j), Sense::Ge, -1.0);
    }
  }
  return solve_lp(lp);
}

}  // namespace

MfcqResult mfcq_check(const ProblemSpec& spec, const CandidatePoint& p, const ActiveSets& act) {
  return mfcq_lp(rows_of(p.varphi_ineq(), act.I_varphi, spec.n, spec.m),
                 rows_of(p.varphi_eq(), all_of(p.varphi_eq().size()), spec.n, spec.m));
}

MfcqResult outer_mfcq_check(const ProblemSpec& spec, const CandidatePoint& p, const ActiveSets& act) {
  return mfcq_lp(rows_of(p.phi_ineq(), act.I_phi, 0, spec.n), rows_of(p.phi_eq(), all_of(p.phi_eq().size()), 0, spec.n));
}

LicqResult licq_check(const ProblemSpec& spec, const CandidatePoint& p, const ActiveSets& act) {
  const Eigen::MatrixXd Gi = rows_of(p.varphi_ineq(), act.I_varphi, spec.n, spec.m);
  const Eigen::MatrixXd Ge = rows_of(p.varphi_eq(), all_of(p.varphi_eq().size()), spec.n, spec.m);
  Eigen::MatrixXd G(Gi.rows() + Ge.rows(), spec.m);
  G << Ge, Gi;
  LicqResult r;
  r.count = static_cast<int>(G.rows());
  r.rank = numerical_rank(G);
  r.pass = r.rank == r.count;
  return r;
}

RcrcqResult rcrcq_check(const ProblemSpec& spec, const CandidatePoint& p, const ActiveSets& act, int n_samples,
                        double radius, std::uint64_t seed) {
  RcrcqResult r;
  const int k = static_cast<int>(act.I_varphi.size());
  if (k > 10) {
    r.checked = false;
    return r;
  }
  const std::vector<int> eq = all_of(p.varphi_eq().size());
  auto rank_at = [&](const CandidatePoint& q, const std::vector<int>& K) {
    std::vector<int> ineq;
    for (int j : K) ineq.push_back(act.I_varphi[static_cast<std::size_t>(j)]);
    const Eigen::MatrixXd Gi = rows_of(q.varphi_ineq(), ineq, spec.n, spec.m);
    const Eigen::MatrixXd Ge = rows_of(q.varphi_eq(), eq, spec.n, spec.m);
    Eigen::MatrixXd G(Gi.rows() + Ge.rows(), spec.m);
    G << Ge, Gi;
    return numerical_rank(G);
  };
  std::vector<std::vector<int>> subsets;
  for_each_subset(k, k, [&](const std::vector<int>& K) {
    subsets.push_back(K);
    return true;
  });
  std::vector<int> base;
  for (const auto& K : subsets) base.push_back(rank_at(p, K));

  std::mt19937_64 rng(seed ^ 0x5243524351ULL);
  std::normal_distribution<double> N;
  std::uniform_real_distribution<double> U(0.0, 1.0);
  const int d = spec.n + spec.m;
  r.pass = true;
  for (int s = 0; s < n_samples; ++s) {
    Eigen::VectorXd z(d);
    for (int i = 0; i < d; ++i) z(i) = N(rng);
    z *= radius * std::pow(U(rng), 1.0 / d) / std::max(z.norm(), 1e-300);
    const Eigen::VectorXd x = p.x() + z.head(spec.n);
    const Eigen::VectorXd y = p.y() + z.tail(spec.m);
    std::optional<CandidatePoint> q;
    try {
      q.emplace(spec, x, y);
    } catch (const DomainError&) {
      continue;
    }
    ++r.samples;
    for (std::size_t t = 0; t < subsets.size(); ++t) {
      if (rank_at(*q, subsets[t]) != base[t]) {
        r.pass = false;
        r.witness_x = x;
        r.witness_y = y;
        for (int j : subsets[t]) r.witness_subset.push_back(act.I_varphi[static_cast<std::size_t>(j)]);
        return r;
      }
    }
  }
  return r;
}

CqReport cq_report(const ProblemSpec& spec, const CandidatePoint& p, const ActiveSets& act, std::uint64_t seed) {
  CqReport r;
  r.mfcq = mfcq_check(spec, p, act);
  r.outer_mfcq = outer_mfcq_check(spec, p, act);
  r.licq = licq_check(spec, p, act);
  r.rcrcq = rcrcq_check(spec, p, act, 32, 1e-3, seed);
  r.linear_inner = true;
  for (const auto& e : spec.varphi_ineq) r.linear_inner = r.linear_inner && is_affine(e);
  for (const auto& e : spec.varphi_eq) r.linear_inner = r.linear_inner && is_affine(e);
  r.linear_outer = true;
  for (const auto& e : spec.phi_ineq) r.linear_outer = r.linear_outer && is_affine(e);
  for (const auto& e : spec.phi_eq) r.linear_outer = r.linear_outer && is_affine(e);

  if (r.linear_inner) {
    r.inner_basis = "affine coupled constraints";
  } else if (r.mfcq.pass) {
    r.inner_basis = "MFCQ";
  } else if (r.rcrcq.checked && r.rcrcq.pass) {
    r.inner_basis = "RCRCQ (sampled)";
  }
  r.inner_ok = !r.inner_basis.empty();
  if (r.linear_outer) {
    r.outer_basis = "affine outer constraints";
  } else if (r.outer_mfcq.pass) {
    r.outer_basis = "outer MFCQ";
  }
  r.outer_ok = !r.outer_basis.empty();
  if (!r.inner_ok) r.notes.push_back("MFCQ not established for the coupled constraints");
  if (!r.outer_ok) r.notes.push_back("MFCQ not established for the outer constraints");
  if (!r.rcrcq.checked) r.notes.push_back("RCRCQ skipped: more than 10 active coupled inequalities");
  return r;
}

DualityGap duality_gap(const ProblemSpec& spec, const CandidatePoint& p, const ActiveSets& act,
                       const Eigen::VectorXd& u) {
  DualityGap g;
  const Eigen::VectorXd fx = p.f().gradient.head(spec.n);
  const Eigen::VectorXd fy = p.f().gradient.tail(spec.m);
  const LpSolution sol = max_linear(fy, linearization_cone_Y(spec, p, act, u), false);
  switch (sol.status) {
    case LpStatus::Optimal:
      g.h = sol.z;
      g.primal = fx.dot(u) + fy.dot(sol.z);
      break;
    case LpStatus::Unbounded: g.primal = kInf; break;
    case LpStatus::Infeasible: g.primal = -kInf; break;
  }
  try {
    g.dual = lambda2_max(spec, p, act, u).value;
  } catch (const LambdaMaxEmpty&) {
    g.dual = kInf;
  }
  if (std::isfinite(g.primal) && std::isfinite(g.dual)) {
    g.gap = std::abs(g.primal - g.dual);
  } else {
    g.structural = true;
    g.gap = g.primal == g.dual ? 0.0 : kInf;
  }
  return g;
}

ActiveSets config_active_sets(const ProblemSpec& spec, const CandidatePoint& p, const RunConfig& cfg) {
  return active_sets(spec, p, cfg.eps_act ? *cfg.eps_act : default_eps_act(p));
}

FirstOrderCertificate first_order_certificate(const ProblemSpec& spec, const CandidatePoint& p, const RunConfig& cfg) {
  FirstOrderCertificate c;
  c.act = config_active_sets(spec, p, cfg);
  const ActiveSets& act = c.act;

  // (a) no ascent direction for the inner problem at u = 0
  const LpSolution in = max_linear(p.f().gradient.tail(spec.m),
                                   linearization_cone_Y(spec, p, act, Eigen::VectorXd::Zero(spec.n)), true);
  if (in.status != LpStatus::Optimal) throw NumericalBreakdown("boxed inner LP not optimal");
  c.inner_value = -in.value;
  c.inner_h = in.z;
  c.inner_pass = c.inner_value <= cfg.stationarity_tol;

  // (b) nonnegative directional value on the outer linearization cone
  const DirectionSample ds = sample_directions(linearization_cone_X(spec, p, act), cfg.budget, cfg.seed);
  c.sampled_only = ds.sampled_only;
  c.outer_pass = true;
  for (const auto& u : ds.directions) {
    OuterRecord rec;
    rec.u = u;
    rec.duality = duality_gap(spec, p, act, u);
    rec.pass = rec.duality.dual >= -cfg.duality_tol;
    c.outer_pass = c.outer_pass && rec.pass;
    c.max_gap = std::max(c.max_gap, rec.duality.gap);
    c.outer.push_back(std::move(rec));
  }

  // (c) full multipliers
  c.witness = full_multiplier_find(spec, p, act);
  if (c.witness) c.kkt = kkt_residual(spec, p, *c.witness);

  // (d) constraint qualifications
  c.cq = cq_report(spec, p, act, cfg.seed);

  const bool holds = c.inner_pass && c.outer_pass && c.witness && c.kkt->pass;
  if (holds && c.max_gap <= cfg.duality_tol) {
    c.overall = FoVerdict::Certified;
  } else if (holds) {
    c.overall = FoVerdict::Inconclusive;
    c.notes.push_back("strong duality gap above tolerance on a sampled direction");
  } else if (c.cq.inner_ok && c.cq.outer_ok) {
    c.overall = FoVerdict::Refuted;
  } else {
    c.overall = FoVerdict::Inconclusive;
    for (const auto& n : c.cq.notes) c.notes.push_back(n);
  }
  if (!c.inner_pass) c.notes.push_back("inner stationarity fails: ascent direction h for grad_y f");
  if (!c.outer_pass) c.notes.push_back("negative directional value on the outer linearization cone");
  if (!c.witness) c.notes.push_back("no full multiplier (alpha, beta)");
  if (c.sampled_only) c.notes.push_back("outer directions sampled only");
  return c;
}

}  // namespace mmcert
