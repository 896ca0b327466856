#include <gtest/gtest.h>

#include <random>

#include "mmcert/numlin.hpp"
#include "support/lp_oracle.hpp"
#include "support/oracles.hpp"

using namespace mmcert;

namespace {

Eigen::MatrixXd random_neg_def(std::mt19937_64& rng, int n) {
  std::normal_distribution<double> N(0.0, 1.0);
  Eigen::MatrixXd B(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) B(i, j) = N(rng);
  return -(B * B.transpose() + 0.5 * Eigen::MatrixXd::Identity(n, n));
}

Eigen::VectorXd randn(std::mt19937_64& rng, int n) {
  std::normal_distribution<double> N(0.0, 1.0);
  Eigen::VectorXd v(n);
  for (int i = 0; i < n; ++i) v(i) = N(rng);
  return v;
}

}  // namespace

TEST(SolveLp, Trivial) {
  LinearProgram lp(1);
  lp.c(0) = 1.0;
  lp.add_row(Eigen::VectorXd::Ones(1), Sense::Ge, 0.0);
  LpSolution s = solve_lp(lp);
  ASSERT_EQ(s.status, LpStatus::Optimal);
  EXPECT_EQ(s.z(0), 0.0);
  EXPECT_EQ(s.value, 0.0);

  lp.c(0) = -1.0;
  EXPECT_EQ(solve_lp(lp).status, LpStatus::Unbounded);

  LinearProgram inf(1);
  inf.add_row(Eigen::VectorXd::Ones(1), Sense::Le, -1.0);  // z <= -1 with z >= 0
  EXPECT_EQ(solve_lp(inf).status, LpStatus::Infeasible);

  LinearProgram empty(2, true);  // no rows, zero objective
  EXPECT_EQ(solve_lp(empty).status, LpStatus::Optimal);
}

TEST(SolveLp, RedundantEqualities) {
  LinearProgram lp(2);
  lp.c << 1, 2;
  Eigen::VectorXd r(2);
  r << 1, 1;
  lp.add_row(r, Sense::Eq, 2.0);
  lp.add_row(2 * r, Sense::Eq, 4.0);
  const LpSolution s = solve_lp(lp);
  ASSERT_EQ(s.status, LpStatus::Optimal);
  EXPECT_NEAR(s.value, 2.0, 1e-12);
  EXPECT_NEAR(s.z(0), 2.0, 1e-12);
}

TEST(SolveLp, MatchesVertexEnumeration) {
  std::mt19937_64 rng(2024);
  int counts[3] = {0, 0, 0};
  for (int t = 0; t < 200; ++t) {
    const LinearProgram lp = oracle::random_lp(rng, 5, 7);
    const auto ref = oracle::lp_reference(lp);
    const LpSolution s = solve_lp(lp);
    ASSERT_EQ(s.status, ref.status) << "trial " << t;
    ++counts[static_cast<int>(s.status)];
    if (s.status != LpStatus::Optimal) continue;
    EXPECT_NEAR(s.value, ref.value, 1e-8 * std::max(1.0, std::abs(ref.value)));
    // primal feasibility
    const Eigen::VectorXd Az = lp.A * s.z;
    for (int i = 0; i < lp.num_rows(); ++i) {
      const double tol = 1e-9 * (1 + lp.b.norm());
      if (lp.sense[i] == Sense::Le) EXPECT_LE(Az(i), lp.b(i) + tol);
      if (lp.sense[i] == Sense::Ge) EXPECT_GE(Az(i), lp.b(i) - tol);
      if (lp.sense[i] == Sense::Eq) EXPECT_NEAR(Az(i), lp.b(i), tol);
    }
    for (int j = 0; j < lp.num_vars(); ++j)
      if (!lp.is_free(j)) EXPECT_GE(s.z(j), -1e-9);
  }
  // the generator exercises all three outcomes
  EXPECT_GT(counts[0], 10);
  EXPECT_GT(counts[1], 10);
  EXPECT_GT(counts[2], 10);
}

TEST(SolveLp, StrongDualityAndDeterminism) {
  std::mt19937_64 rng(7);
  int checked = 0;
  for (int t = 0; t < 300; ++t) {
    const LinearProgram lp = oracle::random_lp(rng);
    const LpSolution p = solve_lp(lp);
    const LpSolution again = solve_lp(lp);
    EXPECT_EQ(p.basis, again.basis);
    if (p.status != LpStatus::Optimal) continue;
    EXPECT_EQ(p.z, again.z);
    const LpSolution d = solve_lp(oracle::dual_of(lp));
    ASSERT_EQ(d.status, LpStatus::Optimal);
    EXPECT_NEAR(p.value, -d.value, 1e-8 * std::max(1.0, std::abs(p.value)));
    ++checked;
  }
  EXPECT_GT(checked, 50);
}

TEST(SolveKkt, Examples) {
  Eigen::MatrixXd H(1, 1);
  H << -2;
  Eigen::VectorXd g(1);
  g << 1;
  EXPECT_NEAR(solve_kkt(H, g, Eigen::MatrixXd(0, 1))(0), 0.5, 1e-15);

  Eigen::MatrixXd A(1, 2);
  A << 0, 1;
  const Eigen::VectorXd d = solve_kkt(-Eigen::MatrixXd::Identity(2, 2), Eigen::Vector2d(1, 0), A);
  EXPECT_NEAR(d(0), 1.0, 1e-15);
  EXPECT_NEAR(d(1), 0.0, 1e-15);

  Eigen::MatrixXd Hs(2, 2);
  Hs << 1, 0, 0, 0;
  try {
    solve_kkt(Hs, Eigen::Vector2d(1, 1), Eigen::MatrixXd(0, 2));
    FAIL() << "expected SingularKkt";
  } catch (const SingularKkt& e) {
    EXPECT_EQ(e.rank(), 1);
    EXPECT_EQ(e.size(), 2);
  }
}

TEST(SolveKkt, RandomResidual) {
  std::mt19937_64 rng(3);
  for (int t = 0; t < 200; ++t) {
    const int n = 2 + static_cast<int>(rng() % 4);
    const int r = static_cast<int>(rng() % n);
    const Eigen::MatrixXd H = random_neg_def(rng, n);
    const Eigen::VectorXd g = randn(rng, n);
    Eigen::MatrixXd A(r, n);
    for (int i = 0; i < r; ++i) A.row(i) = randn(rng, n).transpose();
    const Eigen::VectorXd d = solve_kkt(H, g, A);
    ASSERT_LE((A * d).norm(), 1e-8);
    // gradient of the Lagrangian lies in the row space of A
    const Eigen::VectorXd grad = H * d + g;
    const Eigen::MatrixXd Z = null_space(A, n);
    EXPECT_LE((Z.transpose() * grad).norm(), 1e-8 * (1 + g.norm()));
  }
}

TEST(MinEig, Examples) {
  Eigen::MatrixXd D = Eigen::Vector2d(-2, -1).asDiagonal();
  EXPECT_NEAR(min_eig(D), -2.0, 1e-15);
  EXPECT_EQ(min_eig(Eigen::MatrixXd::Zero(3, 3)), 0.0);
}

TEST(MinEig, MatchesInertiaBisection) {
  std::mt19937_64 rng(99);
  for (int t = 0; t < 200; ++t) {
    Eigen::MatrixXd B(5, 5);
    for (int i = 0; i < 5; ++i) B.row(i) = randn(rng, 5).transpose();
    const Eigen::MatrixXd H = B + B.transpose();
    EXPECT_NEAR(min_eig(H), oracle::min_eig_bisection(H), 1e-7);
    const SymmetricEigen e = symmetric_eigen(H);
    EXPECT_LE((H * e.vectors - e.vectors * e.values.asDiagonal()).norm(), 1e-9 * H.norm());
    EXPECT_LE((e.vectors.transpose() * e.vectors - Eigen::MatrixXd::Identity(5, 5)).norm(), 1e-12);
  }
}

TEST(MaxQuadOverCone, SaddleSlice) {
  // 2uh - 2h^2 at u = 1 as 1/2 h^T H h + g^T h with H = -4, g = 2
  Eigen::MatrixXd H(1, 1);
  H << -4;
  Eigen::VectorXd g(1);
  g << 2;
  const ConeQuadResult r = max_quad_over_cone(H, g, PolyhedralCone::full(1));
  ASSERT_TRUE(r.feasible);
  ASSERT_FALSE(r.unbounded);
  EXPECT_NEAR(r.value, 0.5, 1e-14);
  EXPECT_NEAR(r.argmax(0), 0.5, 1e-14);
}

TEST(MaxQuadOverCone, PositiveCurvatureRay) {
  Eigen::MatrixXd H(1, 1);
  H << 1;
  PolyhedralCone c = PolyhedralCone::full(1);
  c.add_ineq(-Eigen::VectorXd::Ones(1));  // h >= 0
  const ConeQuadResult r = max_quad_over_cone(H, Eigen::VectorXd::Zero(1), c);
  EXPECT_TRUE(r.unbounded);
  EXPECT_NEAR(r.ray(0), 1.0, 1e-12);
}

TEST(MaxQuadOverCone, FlatDirectionWithSlope) {
  // H = 0, g = 1 on h >= 0: unbounded linearly; on h <= 0: max 0.
  Eigen::MatrixXd H = Eigen::MatrixXd::Zero(1, 1);
  PolyhedralCone c = PolyhedralCone::full(1);
  c.add_ineq(-Eigen::VectorXd::Ones(1));
  EXPECT_TRUE(max_quad_over_cone(H, Eigen::VectorXd::Ones(1), c).unbounded);
  PolyhedralCone c2 = PolyhedralCone::full(1);
  c2.add_ineq(Eigen::VectorXd::Ones(1));
  const ConeQuadResult r = max_quad_over_cone(H, Eigen::VectorXd::Ones(1), c2);
  ASSERT_FALSE(r.unbounded);
  EXPECT_NEAR(r.value, 0.0, 1e-14);
}

TEST(MaxQuadOverCone, NegativeDefiniteZeroGradient) {
  std::mt19937_64 rng(5);
  for (int t = 0; t < 50; ++t) {
    const int d = 1 + static_cast<int>(rng() % 4);
    PolyhedralCone c = PolyhedralCone::full(d);
    const int k = static_cast<int>(rng() % 5);
    for (int i = 0; i < k; ++i) c.add_ineq(randn(rng, d));
    const ConeQuadResult r = max_quad_over_cone(random_neg_def(rng, d), Eigen::VectorXd::Zero(d), c);
    ASSERT_FALSE(r.unbounded);
    EXPECT_NEAR(r.value, 0.0, 1e-12);
    EXPECT_LE(r.argmax.norm(), 1e-9);
  }
  const ConeQuadResult z = max_quad_over_cone(Eigen::MatrixXd::Identity(2, 2), Eigen::Vector2d(1, 1), PolyhedralCone::zero(2));
  EXPECT_FALSE(z.unbounded);
  EXPECT_EQ(z.value, 0.0);
}

TEST(MaxQuadOverCone, FullSpaceAgreesWithKkt) {
  std::mt19937_64 rng(6);
  for (int t = 0; t < 50; ++t) {
    const int d = 1 + static_cast<int>(rng() % 4);
    const Eigen::MatrixXd H = random_neg_def(rng, d);
    const Eigen::VectorXd g = randn(rng, d);
    const ConeQuadResult r = max_quad_over_cone(H, g, PolyhedralCone::full(d));
    const Eigen::VectorXd dk = solve_kkt(H, g, Eigen::MatrixXd(0, d));
    EXPECT_LE((r.argmax - dk).norm(), 1e-9 * (1 + dk.norm()));
  }
}

TEST(MaxQuadOverCone, DominatesSampledFeasiblePoints) {
  // Random concave and indefinite instances over random (offset) polyhedra:
  // the reported maximum is attained and no sampled feasible point beats it.
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> U(-3.0, 3.0);
  int finite = 0;
  for (int t = 0; t < 150; ++t) {
    const int d = 1 + static_cast<int>(rng() % 3);
    Eigen::MatrixXd H = t % 2 ? random_neg_def(rng, d) : Eigen::MatrixXd(random_neg_def(rng, d) + 0.8 * Eigen::MatrixXd::Identity(d, d));
    const Eigen::VectorXd g = randn(rng, d);
    PolyhedralCone c = PolyhedralCone::full(d);
    const int k = 1 + static_cast<int>(rng() % 5);
    for (int i = 0; i < k; ++i) c.add_ineq(randn(rng, d), std::abs(randn(rng, 1)(0)) * -0.5);
    const ConeQuadResult r = max_quad_over_cone(H, g, c);
    ASSERT_TRUE(r.feasible);
    auto q = [&](const Eigen::VectorXd& v) { return 0.5 * v.dot(H * v) + g.dot(v); };
    if (r.unbounded) {
      // the ray witnesses growth
      PolyhedralCone rec = c;
      rec.off_ineq.setZero();
      EXPECT_TRUE(rec.contains(r.ray));
      EXPECT_GT(q(1e4 * r.ray) - q(Eigen::VectorXd::Zero(d)), 0.0);
      continue;
    }
    ++finite;
    ASSERT_TRUE(c.contains(r.argmax));
    EXPECT_NEAR(r.value, q(r.argmax), 1e-8 * (1 + std::abs(r.value)));
    for (int s = 0; s < 2000; ++s) {
      Eigen::VectorXd v(d);
      for (int i = 0; i < d; ++i) v(i) = U(rng);
      if (c.contains(v, 0.0)) EXPECT_LE(q(v), r.value + 1e-9 * (1 + std::abs(r.value)));
    }
  }
  EXPECT_GT(finite, 50);
}

TEST(MaxQuadOverCone, EmptySet) {
  PolyhedralCone c = PolyhedralCone::full(1);
  c.add_ineq(Eigen::VectorXd::Ones(1), 1.0);    // h <= -1
  c.add_ineq(-Eigen::VectorXd::Ones(1), 1.0);   // h >= 1
  EXPECT_FALSE(max_quad_over_cone(-Eigen::MatrixXd::Identity(1, 1), Eigen::VectorXd::Zero(1), c).feasible);
}

TEST(EnumerateVertices, UnitSquare) {
  Eigen::MatrixXd A(4, 2);
  A << 1, 0, 0, 1, -1, 0, 0, -1;
  Eigen::VectorXd b(4);
  b << 1, 1, 0, 0;
  const VertexEnumeration v = enumerate_vertices(A, b, Eigen::MatrixXd(0, 2), Eigen::VectorXd(0));
  EXPECT_EQ(v.vertices.size(), 4u);
  EXPECT_FALSE(v.truncated);
  const VertexEnumeration capped = enumerate_vertices(A, b, Eigen::MatrixXd(0, 2), Eigen::VectorXd(0), 2);
  EXPECT_TRUE(capped.truncated);
}

TEST(Subsets, LexicographicBySize) {
  std::vector<std::vector<int>> seen;
  for_each_subset(3, 2, [&](const std::vector<int>& s) {
    seen.push_back(s);
    return true;
  });
  const std::vector<std::vector<int>> expected = {{}, {0}, {1}, {2}, {0, 1}, {0, 2}, {1, 2}};
  EXPECT_EQ(seen, expected);
}
