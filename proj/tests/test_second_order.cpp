#include <gtest/gtest.h>

#include <random>
#include <sstream>

#include "mmcert/numlin.hpp"
#include "mmcert/second_order.hpp"
#include "support/fixtures.hpp"
#include "support/nd_instance.hpp"

using namespace mmcert;

namespace {

CandidatePoint origin(const ProblemSpec& spec) {
  return CandidatePoint(spec, Eigen::VectorXd::Zero(spec.n), Eigen::VectorXd::Zero(spec.m));
}

ActiveSets act_at(const ProblemSpec& spec, const CandidatePoint& p) { return active_sets(spec, p, default_eps_act(p)); }

Eigen::VectorXd vec(std::initializer_list<double> v) {
  Eigen::VectorXd out(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double x : v) out(i++) = x;
  return out;
}

}  // namespace

TEST(LagrangianHessian, Examples) {
  const ProblemSpec saddle = load_problem(fixture_path("p_saddle.problem"));
  const CandidatePoint s = origin(saddle);
  Eigen::MatrixXd expect(2, 2);
  expect << 0, 1, 1, -2;
  EXPECT_EQ(lagrangian_hessian(saddle, s, MultiplierVector::zeros(saddle)), expect);

  const ProblemSpec p2 = load_problem(fixture_path("p2.problem"));
  const CandidatePoint p = origin(p2);
  MultiplierVector mu = MultiplierVector::zeros(p2);
  mu.alpha_ineq(0) = 1;
  mu.beta_ineq(0) = 1;
  EXPECT_EQ(lagrangian_hessian(p2, p, mu), Eigen::MatrixXd::Zero(2, 2));

  const ProblemSpec curved = parse_problem("n = 1\nm = 1\nf = x1^2*y1 + y1^3\nphi_ineq = x1^2 - 1\nvarphi_ineq = y1^2 - x1 - 1\n");
  const CandidatePoint q(curved, vec({0.5}), vec({0.25}));
  EXPECT_EQ(lagrangian_hessian(curved, q, MultiplierVector::zeros(curved)), q.f().hessian);
  MultiplierVector w = MultiplierVector::zeros(curved);
  w.alpha_ineq(0) = 2;
  w.beta_ineq(0) = 3;
  Eigen::MatrixXd h = q.f().hessian;
  h(0, 0) += 2 * 2;
  h(1, 1) -= 3 * 2;
  EXPECT_TRUE(lagrangian_hessian(curved, q, w).isApprox(h, 1e-15));
}

TEST(InnerSonc, Examples) {
  const ProblemSpec saddle = load_problem(fixture_path("p_saddle.problem"));
  const CandidatePoint s = origin(saddle);
  const InnerSoncResult rs = inner_sonc_check(saddle, s, act_at(saddle, s));
  EXPECT_TRUE(rs.pass);
  ASSERT_EQ(rs.directions.size(), 2u);
  EXPECT_NEAR(rs.directions[0].value, -2.0, 1e-12);

  const ProblemSpec p2 = load_problem(fixture_path("p2.problem"));
  const CandidatePoint p = origin(p2);
  const InnerSoncResult rp = inner_sonc_check(p2, p, act_at(p2, p));
  EXPECT_TRUE(rp.pass);
  EXPECT_TRUE(rp.vacuous);

  const ProblemSpec convex = parse_problem("n = 1\nm = 1\nf = y1^2\n");
  const CandidatePoint c = origin(convex);
  const InnerSoncResult rc = inner_sonc_check(convex, c, act_at(convex, c));
  EXPECT_FALSE(rc.pass);
  EXPECT_NEAR(rc.directions[0].value, 2.0, 1e-12);

  const ProblemSpec tilted = parse_problem("n = 1\nm = 1\nf = y1\n");
  const CandidatePoint t = origin(tilted);
  EXPECT_TRUE(inner_sonc_check(tilted, t, act_at(tilted, t)).inconclusive);
}

TEST(InnerSonc, MinimizesOverMultipliers) {
  // Lambda_max = {b1 + b2 = 1}; the curved row lets the minimum reach -1
  const ProblemSpec spec = parse_problem("n = 1\nm = 2\nf = y1\nvarphi_ineq = y1 + y2^2\nvarphi_ineq = y1 - x1\n");
  const CandidatePoint p = origin(spec);
  const InnerSoncResult r = inner_sonc_check(spec, p, act_at(spec, p));
  EXPECT_TRUE(r.pass);
  for (const auto& d : r.directions) EXPECT_NEAR(d.value, -2.0 * d.h(1) * d.h(1), 1e-12);
}

TEST(Ssosc, Examples) {
  const ProblemSpec saddle = load_problem(fixture_path("p_saddle.problem"));
  const CandidatePoint s = origin(saddle);
  const SsoscResult rs = ssosc_u_check(saddle, s, act_at(saddle, s), vec({1.0}));
  EXPECT_TRUE(rs.pass);
  EXPECT_FALSE(rs.vacuous);

  const ProblemSpec p2 = load_problem(fixture_path("p2.problem"));
  const CandidatePoint p = origin(p2);
  const SsoscResult rp = ssosc_u_check(p2, p, act_at(p2, p), vec({1.0}));
  EXPECT_TRUE(rp.pass);
  EXPECT_TRUE(rp.vacuous);

  const ProblemSpec bilinear = parse_problem("n = 1\nm = 1\nf = x1*y1\n");
  const CandidatePoint b = origin(bilinear);
  const SsoscResult rb = ssosc_u_check(bilinear, b, act_at(bilinear, b), vec({1.0}));
  EXPECT_FALSE(rb.pass);
  EXPECT_EQ(rb.directions[0].value, 0.0);
}

TEST(Ssosc, RestrictsToOptimalFace) {
  // Lambda_max = {b1 + b2 = 1}. u = -1 makes b = (1, 0) the only minimizer,
  // whose curvature is zero; over all of Lambda_max the infimum would be -2.
  const ProblemSpec spec = parse_problem("n = 1\nm = 2\nf = y1\nvarphi_ineq = y1 - x1\nvarphi_ineq = y1 + y2^2\n");
  const CandidatePoint p = origin(spec);
  const ActiveSets act = act_at(spec, p);
  const SsoscResult r = ssosc_u_check(spec, p, act, vec({-1.0}));
  EXPECT_FALSE(r.pass);
  EXPECT_TRUE(inner_sonc_check(spec, p, act).pass);
  EXPECT_TRUE(ssosc_u_check(spec, p, act, vec({1.0})).pass);
}

TEST(HStar, Examples) {
  const ProblemSpec saddle = load_problem(fixture_path("p_saddle.problem"));
  const CandidatePoint s = origin(saddle);
  const ActiveSets act = act_at(saddle, s);
  const MultiplierVector none = MultiplierVector::zeros(saddle);
  const HStar h = hstar(saddle, s, act, none, vec({1.0}));
  EXPECT_NEAR(h.h(0), 0.5, 1e-12);
  EXPECT_NEAR(h.value, 0.5, 1e-12);
  EXPECT_NEAR(reduced_hessian_value(saddle, s, act, none, vec({1.0})), 0.5, 1e-12);
  const HStar z = hstar(saddle, s, act, none, vec({0.0}));
  EXPECT_NEAR(z.h(0), 0.0, 1e-15);
  EXPECT_NEAR(z.value, 0.0, 1e-15);

  // f affine: the inner Hessian is zero, so the closed form does not apply
  const ProblemSpec p2 = load_problem(fixture_path("p2.problem"));
  const CandidatePoint p = origin(p2);
  MultiplierVector mu = MultiplierVector::zeros(p2);
  mu.alpha_ineq(0) = 1;
  mu.beta_ineq(0) = 1;
  EXPECT_THROW(hstar(p2, p, act_at(p2, p), mu, vec({1.0})), NotNegativeDefinite);
  const ConeQuadResult q = max_quad_over_cone(Eigen::MatrixXd::Zero(1, 1), Eigen::VectorXd::Zero(1),
                                              critical_set_C(p2, p, act_at(p2, p), vec({1.0})));
  EXPECT_NEAR(q.argmax(0), 0.0, 1e-12);
  EXPECT_NEAR(q.value, 0.0, 1e-12);

  // no cross term: the value is u^T Hxx u
  const ProblemSpec strict = load_problem(fixture_path("strict_saddle.problem"));
  const CandidatePoint t = origin(strict);
  EXPECT_NEAR(reduced_hessian_value(strict, t, act_at(strict, t), MultiplierVector::zeros(strict), vec({0.7})),
              2 * 0.49, 1e-12);
}

TEST(HStar, ActiveFaceCorrection) {
  // inner row y1 <= x1 binds h <= u, cutting the free maximizer h = u/2 * 3
  const ProblemSpec spec = parse_problem("n = 1\nm = 1\nf = 3*x1*y1 - y1^2\nvarphi_ineq = y1 - x1\n");
  const CandidatePoint p = origin(spec);
  const ActiveSets act = act_at(spec, p);
  const MultiplierVector none = MultiplierVector::zeros(spec);
  const HStar h = hstar(spec, p, act, none, vec({1.0}));
  EXPECT_NEAR(h.h(0), 1.0, 1e-12);
  EXPECT_NEAR(h.value, 6.0 - 2.0, 1e-12);
  ASSERT_EQ(h.face, std::vector<int>{0});
  EXPECT_NEAR(reduced_hessian_value(spec, p, act, none, vec({1.0}), h.face), h.value, 1e-12);
  // the interior formula alone overshoots
  EXPECT_NEAR(reduced_hessian_value(spec, p, act, none, vec({1.0})), 4.5, 1e-12);
}

TEST(SecondOrderProperties, HStarMatchesReducedHessian) {
  std::mt19937_64 rng(31);
  int checked = 0;
  int with_face = 0;
  for (int trial = 0; trial < 400 && checked < 250; ++trial) {
    const oracle::NdInstance inst = oracle::nd_instance(rng);
    const CandidatePoint p = origin(inst.spec);
    const ActiveSets act = act_at(inst.spec, p);
    const Eigen::VectorXd u = oracle::random_unit(rng, inst.spec.n);
    HStar h;
    try {
      h = hstar(inst.spec, p, act, inst.beta, u);
    } catch (const EmptyCriticalSet&) {
      continue;
    }
    ++checked;
    if (!h.face.empty()) ++with_face;
    const double r = reduced_hessian_value(inst.spec, p, act, inst.beta, u, h.face);
    EXPECT_LE(std::abs(r - h.value), 1e-8 * std::max(1.0, std::abs(h.value))) << canonical_text(inst.spec);
  }
  EXPECT_GE(checked, 200);
  EXPECT_GT(with_face, 20);
}

TEST(SecondOrderProperties, MaximalityAndScaling) {
  std::mt19937_64 rng(32);
  std::uniform_real_distribution<double> T(0.0, 3.0);
  int checked = 0;
  for (int trial = 0; trial < 200; ++trial) {
    const oracle::NdInstance inst = oracle::nd_instance(rng);
    const CandidatePoint p = origin(inst.spec);
    const ActiveSets act = act_at(inst.spec, p);
    const Eigen::VectorXd u = oracle::random_unit(rng, inst.spec.n);
    HStar h;
    try {
      h = hstar(inst.spec, p, act, inst.beta, u);
    } catch (const EmptyCriticalSet&) {
      continue;
    }
    ++checked;
    const Eigen::MatrixXd H = lagrangian_hessian(inst.spec, p, inst.beta);
    EXPECT_NEAR(quadratic_form(H, u, h.h), h.value, 1e-9 * (1 + std::abs(h.value)));
    const PolyhedralCone C = critical_set_C(inst.spec, p, act, u);
    EXPECT_TRUE(C.contains(h.h, 1e-8));
    // probe along recession directions of C(u)
    PolyhedralCone rec = C;
    rec.off_ineq.setZero();
    rec.off_eq.setZero();
    for (const auto& d : sample_directions(rec, 16, static_cast<std::uint64_t>(trial)).directions) {
      const Eigen::VectorXd probe = h.h + T(rng) * d;
      ASSERT_TRUE(C.contains(probe, 1e-8));
      EXPECT_LE(quadratic_form(H, u, probe), h.value + 1e-9 * (1 + std::abs(h.value)));
    }
    const double lam = std::uniform_real_distribution<double>(0.2, 5.0)(rng);
    const HStar s = hstar(inst.spec, p, act, inst.beta, lam * u);
    EXPECT_LE((s.h - lam * h.h).norm(), 1e-8 * lam * (1 + h.h.norm()));
    EXPECT_LE(std::abs(s.value - lam * lam * h.value), 1e-8 * lam * lam * (1 + std::abs(h.value)));
  }
  EXPECT_GT(checked, 100);
}

TEST(SecondOrderProperties, SsoscImpliesInnerSonc) {
  std::mt19937_64 rng(33);
  int implied = 0;
  for (int trial = 0; trial < 100; ++trial) {
    const oracle::NdInstance inst = oracle::nd_instance(rng);
    const CandidatePoint p = origin(inst.spec);
    const ActiveSets act = act_at(inst.spec, p);
    const Eigen::VectorXd u = oracle::random_unit(rng, inst.spec.n);
    if (!ssosc_u_check(inst.spec, p, act, u, 16).pass) continue;
    ++implied;
    EXPECT_TRUE(inner_sonc_check(inst.spec, p, act, 16).pass);
  }
  EXPECT_GT(implied, 50);
}

TEST(SecondOrderCertificate, Saddle) {
  const ProblemSpec saddle = load_problem(fixture_path("p_saddle.problem"));
  const SecondOrderCertificate c = second_order_certificate(saddle, origin(saddle), RunConfig{});
  EXPECT_EQ(c.overall, Verdict::SufficientCertified);
  EXPECT_TRUE(c.growth);
  ASSERT_EQ(c.directions.size(), 2u);
  for (const auto& d : c.directions) {
    EXPECT_TRUE(d.critical);
    ASSERT_TRUE(d.ssosc);
    EXPECT_TRUE(d.ssosc->pass);
    EXPECT_NEAR(d.best_h(0), 0.5 * d.u(0), 1e-12);
    EXPECT_NEAR(d.value, 0.5, 1e-12);
    EXPECT_EQ(d.multipliers.at(0).path, "hstar");
  }
  EXPECT_NEAR(c.kappa_estimate, 2.0, 1e-12);
}

TEST(SecondOrderCertificate, P2NoCriticalDirections) {
  const ProblemSpec p2 = load_problem(fixture_path("p2.problem"));
  const SecondOrderCertificate c = second_order_certificate(p2, origin(p2), RunConfig{});
  EXPECT_EQ(c.overall, Verdict::SufficientCertified);
  ASSERT_EQ(c.directions.size(), 1u);
  EXPECT_FALSE(c.directions[0].critical);
  EXPECT_NEAR(c.directions[0].dual_value, 1.0, 1e-12);
  EXPECT_NE(std::find(c.notes.begin(), c.notes.end(), "no critical directions"), c.notes.end());
}

TEST(SecondOrderCertificate, Refutations) {
  const ProblemSpec flipped = load_problem(fixture_path("p_saddle_flipped.problem"));
  const SecondOrderCertificate c = second_order_certificate(flipped, origin(flipped), RunConfig{});
  EXPECT_FALSE(c.inner.pass);
  EXPECT_EQ(c.overall, Verdict::Refuted);

  // x is a local maximizer of V: the form is negative for every h
  const ProblemSpec concave = parse_problem("n = 1\nm = 1\nf = -x1^2 - y1^2\n");
  const SecondOrderCertificate d = second_order_certificate(concave, origin(concave), RunConfig{});
  EXPECT_TRUE(d.inner.pass);
  EXPECT_EQ(d.overall, Verdict::Refuted);
  EXPECT_TRUE(d.directions.at(0).refutes);

  // degenerate: zero form, necessary but not sufficient
  const ProblemSpec flat = parse_problem("n = 1\nm = 1\nf = -y1^2\n");
  const SecondOrderCertificate e = second_order_certificate(flat, origin(flat), RunConfig{});
  EXPECT_EQ(e.overall, Verdict::NecessaryConsistent);
}

TEST(SecondOrderCertificate, CommonHAcrossMultipliers) {
  // both rows share the x-gradient, so the whole segment b1 + b2 = 1 is
  // optimal for every u and each direction is critical
  const ProblemSpec spec = parse_problem(
      "n = 1\nm = 2\nf = y1 - x1 + x1^2 - y2^2\nvarphi_ineq = y1 - x1\nvarphi_ineq = y1 + y2^2 - x1\n");
  const SecondOrderCertificate c = second_order_certificate(spec, origin(spec), RunConfig{});
  EXPECT_EQ(c.overall, Verdict::SufficientCertified);
  ASSERT_EQ(c.directions.size(), 2u);
  for (const auto& d : c.directions) {
    EXPECT_TRUE(d.critical);
    ASSERT_EQ(d.multipliers.size(), 2u);
    for (const auto& mr : d.multipliers) {
      EXPECT_TRUE(mr.extended);
      EXPECT_NEAR(mr.sup_value, 2.0, 1e-9);
    }
    EXPECT_NEAR(d.best_h(0), d.u(0), 1e-9);
    EXPECT_NEAR(d.best_h(1), 0.0, 1e-9);
    EXPECT_NEAR(d.value, 2.0, 1e-9);
  }
}
