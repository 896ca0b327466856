#include "mmcert/second_order.hpp"

#include <cmath>
#include <limits>

#include "mmcert/numlin.hpp"

namespace mmcert {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double max_eig(const Eigen::MatrixXd& H) { return H.size() ? -min_eig(-H) : -kInf; }

// h^T (grad^2_yy of each coupled constraint) h, full-length blocks.
std::pair<Eigen::VectorXd, Eigen::VectorXd> constraint_curvatures(const CandidatePoint& p, const Eigen::VectorXd& h) {
  const int m = p.m();
  Eigen::VectorXd wi(static_cast<Eigen::Index>(p.varphi_ineq().size()));
  Eigen::VectorXd we(static_cast<Eigen::Index>(p.varphi_eq().size()));
  for (Eigen::Index i = 0; i < wi.size(); ++i) {
    wi(i) = -h.dot(p.varphi_ineq()[static_cast<std::size_t>(i)].hessian.bottomRightCorner(m, m) * h);
  }
  for (Eigen::Index i = 0; i < we.size(); ++i) {
    we(i) = -h.dot(p.varphi_eq()[static_cast<std::size_t>(i)].hessian.bottomRightCorner(m, m) * h);
  }
  return {wi, we};
}

double f_curvature(const CandidatePoint& p, const Eigen::VectorXd& h) {
  const int m = p.m();
  return h.dot(p.f().hessian.bottomRightCorner(m, m) * h);
}

}  // namespace

Eigen::MatrixXd lagrangian_hessian(const ProblemSpec& spec, const CandidatePoint& p, const MultiplierVector& mu) {
  (void)spec;
  Eigen::MatrixXd H = p.f().hessian;
  for (std::size_t i = 0; i < p.phi_ineq().size(); ++i) H += mu.alpha_ineq(static_cast<Eigen::Index>(i)) * p.phi_ineq()[i].hessian;
  for (std::size_t i = 0; i < p.phi_eq().size(); ++i) H += mu.alpha_eq(static_cast<Eigen::Index>(i)) * p.phi_eq()[i].hessian;
  for (std::size_t i = 0; i < p.varphi_ineq().size(); ++i) H -= mu.beta_ineq(static_cast<Eigen::Index>(i)) * p.varphi_ineq()[i].hessian;
  for (std::size_t i = 0; i < p.varphi_eq().size(); ++i) H -= mu.beta_eq(static_cast<Eigen::Index>(i)) * p.varphi_eq()[i].hessian;
  return 0.5 * (H + H.transpose());
}

double quadratic_form(const Eigen::MatrixXd& H, const Eigen::VectorXd& u, const Eigen::VectorXd& h) {
  Eigen::VectorXd z(u.size() + h.size());
  z << u, h;
  return z.dot(H * z);
}

InnerSoncResult inner_sonc_check(const ProblemSpec& spec, const CandidatePoint& p, const ActiveSets& act, int budget,
                                 std::uint64_t seed) {
  InnerSoncResult r;
  if (!lambda_max_find(spec, p, act)) {
    r.inconclusive = true;
    return r;
  }
  const DirectionSample ds = sample_directions(critical_cone_max(spec, p, act), budget, seed);
  r.sampled_only = ds.sampled_only;
  r.vacuous = ds.directions.empty();
  r.pass = true;
  for (const auto& h : ds.directions) {
    const auto [wi, we] = constraint_curvatures(p, h);
    const LambdaMaxMin lm = lambda_max_minimize(spec, p, act, wi, we);
    const double v = f_curvature(p, h) + lm.value;
    r.directions.push_back({h, v});
    r.pass = r.pass && v <= 1e-7;
  }
  return r;
}

SsoscResult ssosc_u_check(const ProblemSpec& spec, const CandidatePoint& p, const ActiveSets& act,
                          const Eigen::VectorXd& u, int budget, std::uint64_t seed) {
  SsoscResult r;
  const Lambda2Max l2 = lambda2_max(spec, p, act, u);
  const DirectionSample ds = sample_directions(critical_cone_max(spec, p, act), budget, seed);
  r.sampled_only = ds.sampled_only;
  r.vacuous = ds.directions.empty();
  if (l2.unbounded) {
    // no minimizer: the optimal face is empty
    r.pass = r.vacuous;
    return r;
  }
  // optimal face of the directional LP: -(grad_x varphi u)^T beta <= its minimum
  const int n = spec.n;
  Eigen::VectorXd cut(spec.q1() + spec.q2());
  for (int i = 0; i < spec.q1(); ++i) cut(i) = -p.varphi_ineq()[static_cast<std::size_t>(i)].gradient.head(n).dot(u);
  for (int i = 0; i < spec.q2(); ++i) cut(spec.q1() + i) = -p.varphi_eq()[static_cast<std::size_t>(i)].gradient.head(n).dot(u);
  const double lp_min = l2.value - p.f().gradient.head(n).dot(u);
  const std::pair<Eigen::VectorXd, double> face{cut, lp_min + 1e-9 * (1.0 + std::abs(lp_min))};
  r.pass = true;
  for (const auto& h : ds.directions) {
    const auto [wi, we] = constraint_curvatures(p, h);
    const LambdaMaxMin lm = lambda_max_minimize(spec, p, act, wi, we, face);
    const double v = f_curvature(p, h) + lm.value;
    r.directions.push_back({h, v});
    r.pass = r.pass && v <= -1e-7;
  }
  return r;
}

HStar hstar(const ProblemSpec& spec, const CandidatePoint& p, const ActiveSets& act, const MultiplierVector& mu,
            const Eigen::VectorXd& u) {
  const int n = spec.n;
  const int m = spec.m;
  const Eigen::MatrixXd H = lagrangian_hessian(spec, p, mu);
  const Eigen::MatrixXd Hyy = H.bottomRightCorner(m, m);
  const double top = max_eig(Hyy);
  if (!(top < -1e-9)) throw NotNegativeDefinite(top);
  const PolyhedralCone C = critical_set_C(spec, p, act, u);
  const ConeQuadResult q = max_quad_over_cone(2.0 * Hyy, 2.0 * H.bottomLeftCorner(m, n) * u, C);
  if (!q.feasible) throw EmptyCriticalSet();
  HStar out;
  out.h = q.argmax;
  out.value = u.dot(H.topLeftCorner(n, n) * u) + q.value;
  out.face = q.face;
  return out;
}

double reduced_hessian_value(const ProblemSpec& spec, const CandidatePoint& p, const ActiveSets& act,
                             const MultiplierVector& mu, const Eigen::VectorXd& u, const std::vector<int>& face) {
  const int n = spec.n;
  const int m = spec.m;
  const Eigen::MatrixXd H = lagrangian_hessian(spec, p, mu);
  const Eigen::MatrixXd Hyy = H.bottomRightCorner(m, m);
  const double top = max_eig(Hyy);
  if (!(top < -1e-9)) throw NotNegativeDefinite(top);
  const Eigen::MatrixXd K = Hyy.inverse();
  const Eigen::VectorXd a = H.bottomLeftCorner(m, n) * u;

  // rows held tight: the face's inequalities and every equality of C(u)
  const PolyhedralCone C = critical_set_C(spec, p, act, u);
  std::vector<Eigen::VectorXd> rows;
  std::vector<double> rhs;
  for (int i : face) {
    rows.push_back(C.A_ineq.row(i).transpose());
    rhs.push_back(-C.off_ineq(i));
  }
  for (int i = 0; i < C.n_eq(); ++i) {
    rows.push_back(C.A_eq.row(i).transpose());
    rhs.push_back(-C.off_eq(i));
  }
  Eigen::MatrixXd A(0, m);
  Eigen::VectorXd b(0);
  for (std::size_t k = 0; k < rows.size(); ++k) {
    Eigen::MatrixXd A2(A.rows() + 1, m);
    A2 << A, rows[k].transpose();
    Eigen::VectorXd b2(b.size() + 1);
    b2 << b, rhs[k];
    if (numerical_rank(A2) > A.rows()) {
      A = A2;
      b = b2;
    } else if (!solve_consistent(A2, b2)) {
      throw EmptyCriticalSet();
    }
  }

  // aggregate constraint correction c, so that h* = -K a + K c
  Eigen::VectorXd c = Eigen::VectorXd::Zero(m);
  if (A.rows() > 0) {
    const Eigen::MatrixXd P = A * K * A.transpose();
    const Eigen::VectorXd nu = -P.fullPivLu().solve(b + A * K * a);
    c = -A.transpose() * nu;
  }
  const double schur = u.dot(H.topLeftCorner(n, n) * u) - a.dot(K * a);
  return schur - c.dot(K * a) + (c + a).dot(K * c);
}

SecondOrderCertificate second_order_certificate(const ProblemSpec& spec, const CandidatePoint& p, const RunConfig& cfg) {
  return second_order_certificate(spec, p, cfg, first_order_certificate(spec, p, cfg));
}

SecondOrderCertificate second_order_certificate(const ProblemSpec& spec, const CandidatePoint& p, const RunConfig& cfg,
                                                const FirstOrderCertificate& first) {
  SecondOrderCertificate c;
  if (first.overall != FoVerdict::Certified) {
    c.notes.push_back(kFirstOrderBlocked);
    return c;
  }
  const ActiveSets& act = first.act;
  const int n = spec.n;
  c.inner = inner_sonc_check(spec, p, act, cfg.budget, cfg.seed);
  c.sampled_only = c.inner.sampled_only;
  if (c.inner.inconclusive) {
    c.notes.push_back("inner multiplier set empty");
    return c;
  }

  const DirectionSample ds = sample_directions(linearization_cone_X(spec, p, act), cfg.budget, cfg.seed);
  c.sampled_only = c.sampled_only || ds.sampled_only;
  double ratio = 1.0;
  for (const auto& u : ds.directions) {
    DirectionRecord rec;
    rec.u = u;
    rec.dual_value = lambda2_max(spec, p, act, u).value;
    rec.critical = std::abs(rec.dual_value) <= cfg.critical_tol;
    if (!rec.critical) {
      c.directions.push_back(std::move(rec));
      continue;
    }
    rec.ssosc = ssosc_u_check(spec, p, act, u, cfg.budget, cfg.seed);
    c.sampled_only = c.sampled_only || rec.ssosc->sampled_only;

    const OptimalFaceVertices face = lambda2_max_vertices(spec, p, act, u);
    rec.face_sampled_only = face.sampled_only;
    c.sampled_only = c.sampled_only || face.sampled_only;
    // alpha enters the form only through u^T grad^2 phi u
    Eigen::VectorXd wa(spec.p1());
    Eigen::VectorXd wae(spec.p2());
    for (int i = 0; i < spec.p1(); ++i) wa(i) = u.dot(p.phi_ineq()[static_cast<std::size_t>(i)].hessian.topLeftCorner(n, n) * u);
    for (int i = 0; i < spec.p2(); ++i) wae(i) = u.dot(p.phi_eq()[static_cast<std::size_t>(i)].hessian.topLeftCorner(n, n) * u);

    std::vector<double> alpha_bonus;
    for (const auto& beta : face.vertices) {
      MultiplierRecord mr;
      const AlphaExtension ext = extend_alpha(spec, p, act, beta, wa, wae);
      mr.mu = ext.mu;
      mr.extended = ext.feasible;
      alpha_bonus.push_back(ext.unbounded ? kInf : 0.0);
      if (!ext.feasible) {
        mr.sup_value = -kInf;
        rec.multipliers.push_back(std::move(mr));
        continue;
      }
      try {
        const HStar hs = hstar(spec, p, act, mr.mu, u);
        mr.path = "hstar";
        mr.h = hs.h;
        mr.sup_value = hs.value;
      } catch (const NotNegativeDefinite&) {
        mr.path = "face-enumeration";
        const Eigen::MatrixXd H = lagrangian_hessian(spec, p, mr.mu);
        const int m = spec.m;
        const ConeQuadResult q = max_quad_over_cone(2.0 * H.bottomRightCorner(m, m),
                                                    2.0 * H.bottomLeftCorner(m, n) * u, critical_set_C(spec, p, act, u));
        if (!q.feasible) {
          mr.sup_value = -kInf;
        } else if (q.unbounded) {
          mr.sup_value = kInf;
        } else {
          mr.h = q.argmax;
          mr.sup_value = u.dot(H.topLeftCorner(n, n) * u) + q.value;
        }
      } catch (const EmptyCriticalSet&) {
        mr.path = "hstar";
        mr.sup_value = -kInf;
      }
      if (ext.unbounded) mr.sup_value = kInf;
      rec.multipliers.push_back(std::move(mr));
    }

    // one h must serve every multiplier: try each finite maximizer
    rec.value = -kInf;
    for (const auto& cand : rec.multipliers) {
      if (cand.h.size() != spec.m) continue;
      double worst = kInf;
      for (std::size_t k = 0; k < rec.multipliers.size(); ++k) {
        const auto& mr = rec.multipliers[k];
        if (!mr.extended) {
          worst = -kInf;
          break;
        }
        if (alpha_bonus[k] == kInf) continue;
        worst = std::min(worst, quadratic_form(lagrangian_hessian(spec, p, mr.mu), u, cand.h));
      }
      if (worst > rec.value) {
        rec.value = worst;
        rec.best_h = cand.h;
      }
    }
    if (rec.best_h.size() == 0 && rec.multipliers.size() == 1 && rec.multipliers[0].sup_value == kInf) {
      rec.value = kInf;
    }
    rec.margin = rec.value - cfg.margin_sufficient;
    rec.necessary = rec.value >= -cfg.margin_necessary;
    rec.sufficient = rec.ssosc->pass && rec.value > cfg.margin_sufficient;
    rec.refutes = !rec.multipliers.empty();
    for (const auto& mr : rec.multipliers) rec.refutes = rec.refutes && mr.sup_value < -cfg.margin_necessary;
    if (rec.best_h.size() == spec.m && u.norm() > 0) ratio = std::max(ratio, rec.best_h.norm() / u.norm());
    c.directions.push_back(std::move(rec));
  }
  c.kappa_estimate = 2.0 * ratio;

  const bool cq_ok = first.cq.outer_ok && first.cq.mfcq.pass;
  int critical = 0;
  bool all_suff = true;
  bool all_nec = true;
  bool refuted = !c.inner.pass;
  for (const auto& rec : c.directions) {
    if (!rec.critical) continue;
    ++critical;
    all_suff = all_suff && rec.sufficient;
    all_nec = all_nec && rec.necessary;
    refuted = refuted || rec.refutes;
  }
  if (!cq_ok) {
    c.overall = Verdict::Inconclusive;
    c.notes.push_back("MFCQ not established: second-order theorems do not apply");
  } else if (refuted) {
    c.overall = Verdict::Refuted;
    if (!c.inner.pass) c.notes.push_back("inner second-order necessary condition fails");
  } else if (all_suff) {
    c.overall = Verdict::SufficientCertified;
    c.growth = true;
    if (critical == 0) c.notes.push_back("no critical directions");
  } else if (all_nec) {
    c.overall = Verdict::NecessaryConsistent;
  } else {
    c.overall = Verdict::Inconclusive;
    c.notes.push_back("second-order form between the necessary and sufficient margins");
  }
  if (c.sampled_only) c.notes.push_back("sampled-only: some cone or multiplier face was not enumerated");
  return c;
}

}  // namespace mmcert
