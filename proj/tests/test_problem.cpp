#include <gtest/gtest.h>

#include "mmcert/problem.hpp"
#include "support/fixtures.hpp"

using namespace mmcert;

TEST(LoadProblem, P2Fixture) {
  const ProblemSpec spec = load_problem(fixture_path("p2.problem"));
  EXPECT_EQ(spec.n, 1);
  EXPECT_EQ(spec.m, 1);
  EXPECT_EQ(spec.q1(), 1);
  EXPECT_EQ(spec.p1(), 1);
  EXPECT_EQ(spec.p2(), 0);
  EXPECT_EQ(spec.q2(), 0);
  EXPECT_EQ(spec.f, parse_expression("y1", 1, 1));
}

TEST(LoadProblem, PhiMustNotReferenceY) {
  EXPECT_THROW(parse_problem("n = 1\nm = 1\nf = y1\nphi_ineq = x1 + y1\n"), ValidationError);
}

TEST(LoadProblem, MalformedKeyReportsLine) {
  try {
    parse_problem("n = 1\nm = 1\n# comment\nf = y1\nbogus = 3\n");
    FAIL() << "expected ParseError";
  } catch (const ParseError& err) {
    EXPECT_EQ(err.line(), 5);
  }
  try {
    parse_problem("n = 1\nm = 1\nf = y1 +\n");
    FAIL() << "expected ParseError";
  } catch (const ParseError& err) {
    EXPECT_EQ(err.line(), 3);
  }
}

TEST(LoadProblem, MissingKeysAndPoint) {
  EXPECT_THROW(parse_problem("n = 1\nf = x1\n"), ValidationError);
  EXPECT_THROW(parse_problem("n = 0\nm = 1\nf = x1\n"), ValidationError);
  const ProblemSpec spec = parse_problem("n = 2\nm = 1\nf = x1*y1   # trailing comment\npoint_x = 0.5, -1\npoint_y = 2\n");
  ASSERT_TRUE(spec.point_x.has_value());
  EXPECT_EQ(*spec.point_x, (std::vector<double>{0.5, -1.0}));
  EXPECT_THROW(parse_problem("n = 2\nm = 1\nf = x1\npoint_x = 1\n"), ValidationError);
  EXPECT_THROW(load_problem("/nonexistent/file.problem"), std::runtime_error);
}

TEST(Digest, StableUnderFormatting) {
  const ProblemSpec a = parse_problem("n=1\nm=1\nf = x1*y1-y1^2\n");
  const ProblemSpec b = parse_problem("# same problem\nm = 1\nn = 1\nf = (x1 * y1) - (y1^2)\n");
  EXPECT_EQ(problem_digest(a), problem_digest(b));
  const ProblemSpec c = parse_problem("n=1\nm=1\nf = x1*y1+y1^2\n");
  EXPECT_NE(problem_digest(a), problem_digest(c));
  EXPECT_EQ(problem_digest(a).size(), 16u);
}

TEST(CandidatePoint, CacheMatchesFreshEvaluation) {
  const ProblemSpec spec = parse_problem(
      "n = 2\nm = 2\nf = sin(x1*y2) + exp(y1) - x2^2\nphi_ineq = x1^2 + x2 - 1\nvarphi_ineq = y1*y2 - x1\n"
      "varphi_eq = y1 + cos(x2)\n");
  Eigen::VectorXd x(2), y(2);
  x << 0.3, -0.4;
  y << 0.1, 0.7;
  const CandidatePoint p(spec, x, y);
  EXPECT_EQ(p.f().gradient.size(), 4);
  EXPECT_EQ(p.f().gradient, gradient(spec.f, p));
  EXPECT_EQ(p.f().hessian, hessian(spec.f, p));
  EXPECT_EQ(p.varphi_eq()[0].gradient, gradient(spec.varphi_eq[0], p));
  // phi's y-columns vanish
  EXPECT_EQ(p.phi_ineq()[0].gradient.tail(2).norm(), 0.0);
  EXPECT_THROW(CandidatePoint(spec, Eigen::VectorXd::Zero(1), y), ValidationError);
}
