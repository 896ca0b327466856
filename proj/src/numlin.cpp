#include "mmcert/numlin.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace mmcert {

const char* to_string(LpStatus s) {
  switch (s) {
    case LpStatus::Optimal: return "optimal";
    case LpStatus::Infeasible: return "infeasible";
    case LpStatus::Unbounded: return "unbounded";
  }
  return "?";
}

LinearProgram::LinearProgram(int nvars, bool all_free)
    : c(Eigen::VectorXd::Zero(nvars)), A(0, nvars), b(0), free(all_free ? std::vector<bool>(nvars, true) : std::vector<bool>{}) {}

void LinearProgram::add_row(const Eigen::VectorXd& row, Sense s, double rhs) {
  const Eigen::Index r = A.rows();
  A.conservativeResize(r + 1, c.size());
  b.conservativeResize(r + 1);
  A.row(r) = row.transpose();
  b(r) = rhs;
  sense.push_back(s);
}

// ---------------------------------------------------------------------------
// simplex

namespace {

class Tableau {
 public:
  // T is (rows + 1) x (cols + 1): constraint rows, then the reduced-cost row;
  // the last column holds the rhs (and -objective in the corner).
  Eigen::MatrixXd T;
  std::vector<int> basis;
  std::vector<bool> blocked;  // columns that may not enter
  int iterations = 0;

  int rows() const { return static_cast<int>(T.rows()) - 1; }
  int cols() const { return static_cast<int>(T.cols()) - 1; }

  void pivot(int r, int s) {
    T.row(r) /= T(r, s);
    for (int i = 0; i <= rows(); ++i) {
      if (i != r && T(i, s) != 0.0) T.row(i) -= T(i, s) * T.row(r);
    }
    basis[static_cast<std::size_t>(r)] = s;
  }

  // Returns false on unboundedness.
  bool run(double cost_tol, int limit) {
    for (;;) {
      if (++iterations > limit) throw NumericalBreakdown("simplex iteration limit reached");
      int s = -1;
      for (int j = 0; j < cols(); ++j) {
        if (!blocked[static_cast<std::size_t>(j)] && T(rows(), j) < -cost_tol) {
          s = j;  // Bland: lowest index
          break;
        }
      }
      if (s < 0) return true;
      int r = -1;
      double best = std::numeric_limits<double>::infinity();
      for (int i = 0; i < rows(); ++i) {
        if (T(i, s) <= kPivotTol) continue;
        const double ratio = T(i, cols()) / T(i, s);
        const double eps = 1e-12 * (1.0 + std::abs(best));
        if (r < 0 || ratio < best - eps) {
          r = i;
          best = ratio;
        } else if (ratio <= best + eps && basis[static_cast<std::size_t>(i)] < basis[static_cast<std::size_t>(r)]) {
          r = i;  // Bland tie-break on the leaving variable
          best = std::min(best, ratio);
        }
      }
      if (r < 0) return false;
      pivot(r, s);
    }
  }

  void set_costs(const Eigen::VectorXd& cost) {
    T.row(rows()).setZero();
    T.row(rows()).head(cols()) = cost.transpose();
    for (int i = 0; i < rows(); ++i) {
      const double cb = cost(basis[static_cast<std::size_t>(i)]);
      if (cb != 0.0) T.row(rows()) -= cb * T.row(i);
    }
  }

  void drop_row(int r) {
    const int n = rows() + 1;
    Eigen::MatrixXd U(n - 1, T.cols());
    for (int i = 0, k = 0; i < n; ++i) {
      if (i != r) U.row(k++) = T.row(i);
    }
    T = std::move(U);
    basis.erase(basis.begin() + r);
  }
};

}  // namespace

LpSolution solve_lp(const LinearProgram& lp) {
  const int n = lp.num_vars();
  const int m = lp.num_rows();
  if (lp.A.cols() != n || lp.b.size() != m || static_cast<int>(lp.sense.size()) != m ||
      !(lp.free.empty() || static_cast<int>(lp.free.size()) == n)) {
    throw std::invalid_argument("solve_lp: inconsistent dimensions");
  }
  if (!lp.A.allFinite() || !lp.b.allFinite() || !lp.c.allFinite()) {
    throw std::invalid_argument("solve_lp: non-finite data");
  }

  // Standard form: split free variables, add slack/surplus, flip rows to b >= 0.
  std::vector<int> pos(static_cast<std::size_t>(n));
  std::vector<int> neg(static_cast<std::size_t>(n), -1);
  int ncols = 0;
  for (int j = 0; j < n; ++j) {
    pos[static_cast<std::size_t>(j)] = ncols++;
    if (lp.is_free(j)) neg[static_cast<std::size_t>(j)] = ncols++;
  }
  std::vector<int> slack(static_cast<std::size_t>(m), -1);
  for (int i = 0; i < m; ++i) {
    if (lp.sense[static_cast<std::size_t>(i)] != Sense::Eq) slack[static_cast<std::size_t>(i)] = ncols++;
  }
  const int nstd = ncols;

  Eigen::MatrixXd S = Eigen::MatrixXd::Zero(m, nstd);
  Eigen::VectorXd rhs = lp.b;
  Eigen::VectorXd cost = Eigen::VectorXd::Zero(nstd);
  for (int j = 0; j < n; ++j) {
    S.col(pos[static_cast<std::size_t>(j)]) = lp.A.col(j);
    cost(pos[static_cast<std::size_t>(j)]) = lp.c(j);
    if (neg[static_cast<std::size_t>(j)] >= 0) {
      S.col(neg[static_cast<std::size_t>(j)]) = -lp.A.col(j);
      cost(neg[static_cast<std::size_t>(j)]) = -lp.c(j);
    }
  }
  for (int i = 0; i < m; ++i) {
    const int s = slack[static_cast<std::size_t>(i)];
    if (s >= 0) S(i, s) = lp.sense[static_cast<std::size_t>(i)] == Sense::Le ? 1.0 : -1.0;
    if (rhs(i) < 0) {
      S.row(i) *= -1.0;
      rhs(i) = -rhs(i);
    }
  }

  // Initial basis: a slack with coefficient +1 where available, else an artificial.
  std::vector<int> art_row;
  std::vector<int> basis(static_cast<std::size_t>(m), -1);
  for (int i = 0; i < m; ++i) {
    const int s = slack[static_cast<std::size_t>(i)];
    if (s >= 0 && S(i, s) > 0) basis[static_cast<std::size_t>(i)] = s;
    else art_row.push_back(i);
  }
  const int nart = static_cast<int>(art_row.size());
  Tableau tab;
  tab.T = Eigen::MatrixXd::Zero(m + 1, nstd + nart + 1);
  tab.T.topLeftCorner(m, nstd) = S;
  tab.T.block(0, nstd + nart, m, 1) = rhs;
  for (int k = 0; k < nart; ++k) {
    tab.T(art_row[static_cast<std::size_t>(k)], nstd + k) = 1.0;
    basis[static_cast<std::size_t>(art_row[static_cast<std::size_t>(k)])] = nstd + k;
  }
  tab.basis = basis;
  tab.blocked.assign(static_cast<std::size_t>(nstd + nart), false);

  const int limit = 200 * (m + nstd + nart) + 1000;
  const double bnorm = rhs.size() ? rhs.norm() : 0.0;
  const double cost_tol = 1e-9 * (1.0 + (cost.size() ? cost.cwiseAbs().maxCoeff() : 0.0));

  if (nart > 0) {
    Eigen::VectorXd phase1 = Eigen::VectorXd::Zero(nstd + nart);
    phase1.tail(nart).setOnes();
    tab.set_costs(phase1);
    tab.run(1e-11, limit);
    const double infeas = -tab.T(m, nstd + nart);
    if (infeas > kFeasTol * (1.0 + bnorm)) return LpSolution{LpStatus::Infeasible, {}, 0.0, {}};
    // Drive artificials out of the basis; rows that cannot be cleared are redundant.
    for (int i = tab.rows() - 1; i >= 0; --i) {
      if (tab.basis[static_cast<std::size_t>(i)] < nstd) continue;
      int s = -1;
      for (int j = 0; j < nstd; ++j) {
        if (std::abs(tab.T(i, j)) > 1e-9) {
          s = j;
          break;
        }
      }
      if (s >= 0) tab.pivot(i, s);
      else tab.drop_row(i);
    }
    for (int k = 0; k < nart; ++k) tab.blocked[static_cast<std::size_t>(nstd + k)] = true;
  }

  Eigen::VectorXd cost_ext = Eigen::VectorXd::Zero(nstd + nart);
  cost_ext.head(nstd) = cost;
  tab.set_costs(cost_ext);
  if (!tab.run(cost_tol, limit)) {
    return LpSolution{LpStatus::Unbounded, {}, -std::numeric_limits<double>::infinity(), tab.basis};
  }

  // Basic values from a fresh factorization of B (tableau values as fallback).
  const int r = tab.rows();
  Eigen::VectorXd x = Eigen::VectorXd::Zero(nstd);
  Eigen::VectorXd xb_tab(r);
  for (int i = 0; i < r; ++i) xb_tab(i) = tab.T(i, tab.cols());
  Eigen::VectorXd xb = xb_tab;
  if (r > 0) {
    // rows that survived are identified through the basis; rebuild from S
    // restricted to a full-rank row subset of the same size.
    Eigen::MatrixXd B(m, r);
    for (int i = 0; i < r; ++i) B.col(i) = S.col(tab.basis[static_cast<std::size_t>(i)]);
    const Eigen::VectorXd refined = B.colPivHouseholderQr().solve(rhs);
    if (refined.allFinite() && (B * refined - rhs).norm() <= 1e-9 * (1.0 + bnorm) &&
        (refined - xb_tab).cwiseAbs().maxCoeff() <= 1e-6 * (1.0 + xb_tab.cwiseAbs().maxCoeff())) {
      xb = refined;
    }
  }
  for (int i = 0; i < r; ++i) x(tab.basis[static_cast<std::size_t>(i)]) = std::max(0.0, xb(i));

  LpSolution sol;
  sol.status = LpStatus::Optimal;
  sol.z = Eigen::VectorXd::Zero(n);
  for (int j = 0; j < n; ++j) {
    sol.z(j) = x(pos[static_cast<std::size_t>(j)]);
    if (neg[static_cast<std::size_t>(j)] >= 0) sol.z(j) -= x(neg[static_cast<std::size_t>(j)]);
  }
  sol.value = lp.c.dot(sol.z);
  sol.basis = tab.basis;
  return sol;
}

// ---------------------------------------------------------------------------
// dense helpers

int numerical_rank(const Eigen::MatrixXd& A, double rel_tol) {
  if (A.rows() == 0 || A.cols() == 0) return 0;
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(A);
  const auto& s = svd.singularValues();
  const double thresh = rel_tol * std::max(1.0, s.size() ? s(0) : 0.0);
  int r = 0;
  for (Eigen::Index i = 0; i < s.size(); ++i) {
    if (s(i) > thresh) ++r;
  }
  return r;
}

Eigen::MatrixXd null_space(const Eigen::MatrixXd& A, int cols, double rel_tol) {
  if (A.rows() == 0 || cols == 0) return Eigen::MatrixXd::Identity(cols, cols);
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(A, Eigen::ComputeFullV);
  const auto& s = svd.singularValues();
  const double thresh = rel_tol * std::max(1.0, s.size() ? s(0) : 0.0);
  int r = 0;
  for (Eigen::Index i = 0; i < s.size(); ++i) {
    if (s(i) > thresh) ++r;
  }
  return svd.matrixV().rightCols(cols - r);
}

std::optional<Eigen::VectorXd> solve_consistent(const Eigen::MatrixXd& A, const Eigen::VectorXd& b, double tol) {
  if (A.rows() == 0) return Eigen::VectorXd::Zero(A.cols());
  if (A.cols() == 0) {
    if (b.norm() > tol) return std::nullopt;
    return Eigen::VectorXd(0);
  }
  const Eigen::VectorXd z = A.completeOrthogonalDecomposition().solve(b);
  if (!z.allFinite() || (A * z - b).norm() > tol * (1.0 + b.norm())) return std::nullopt;
  return z;
}

namespace {

// Orthonormal basis of the row space (as rows).
Eigen::MatrixXd row_basis(const Eigen::MatrixXd& A) {
  if (A.rows() == 0) return A;
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(A, Eigen::ComputeFullV);
  const int r = numerical_rank(A);
  return svd.matrixV().leftCols(r).transpose();
}

}  // namespace

Eigen::VectorXd solve_kkt(const Eigen::MatrixXd& H, const Eigen::VectorXd& g, const Eigen::MatrixXd& A_eq) {
  const int d = static_cast<int>(H.rows());
  const Eigen::MatrixXd A = A_eq.rows() ? row_basis(A_eq) : Eigen::MatrixXd(0, d);
  const int r = static_cast<int>(A.rows());
  Eigen::MatrixXd K = Eigen::MatrixXd::Zero(d + r, d + r);
  K.topLeftCorner(d, d) = H;
  K.topRightCorner(d, r) = A.transpose();
  K.bottomLeftCorner(r, d) = A;
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(d + r);
  rhs.head(d) = -g;
  Eigen::FullPivLU<Eigen::MatrixXd> lu(K);
  lu.setThreshold(kRankTol);
  if (lu.rank() < d + r) throw SingularKkt(static_cast<int>(lu.rank()), d + r);
  return lu.solve(rhs).head(d);
}

// ---------------------------------------------------------------------------
// symmetric eigenproblem

SymmetricEigen symmetric_eigen(const Eigen::MatrixXd& H) {
  const int n = static_cast<int>(H.rows());
  Eigen::MatrixXd A = 0.5 * (H + H.transpose());
  Eigen::MatrixXd V = Eigen::MatrixXd::Identity(n, n);
  const double scale = std::max(A.norm(), std::numeric_limits<double>::min());
  for (int sweep = 0; sweep < 100; ++sweep) {
    double off = 0.0;
    for (int p = 0; p < n; ++p) {
      for (int q = p + 1; q < n; ++q) off += A(p, q) * A(p, q);
    }
    if (std::sqrt(off) <= 1e-16 * scale) break;
    for (int p = 0; p < n; ++p) {
      for (int q = p + 1; q < n; ++q) {
        if (A(p, q) == 0.0) continue;
        const double theta = (A(q, q) - A(p, p)) / (2.0 * A(p, q));
        const double t = (theta >= 0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        for (int k = 0; k < n; ++k) {
          const double akp = A(k, p);
          const double akq = A(k, q);
          A(k, p) = c * akp - s * akq;
          A(k, q) = s * akp + c * akq;
        }
        for (int k = 0; k < n; ++k) {
          const double apk = A(p, k);
          const double aqk = A(q, k);
          A(p, k) = c * apk - s * aqk;
          A(q, k) = s * apk + c * aqk;
        }
        for (int k = 0; k < n; ++k) {
          const double vkp = V(k, p);
          const double vkq = V(k, q);
          V(k, p) = c * vkp - s * vkq;
          V(k, q) = s * vkp + c * vkq;
        }
      }
    }
  }
  std::vector<int> order(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) order[static_cast<std::size_t>(i)] = i;
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return A(a, a) < A(b, b); });
  SymmetricEigen out;
  out.values.resize(n);
  out.vectors.resize(n, n);
  for (int i = 0; i < n; ++i) {
    out.values(i) = A(order[static_cast<std::size_t>(i)], order[static_cast<std::size_t>(i)]);
    out.vectors.col(i) = V.col(order[static_cast<std::size_t>(i)]);
  }
  return out;
}

double min_eig(const Eigen::MatrixXd& H) {
  if (H.rows() == 0) return std::numeric_limits<double>::infinity();
  return symmetric_eigen(H).values(0);
}

// ---------------------------------------------------------------------------
// quadratic maximization over a polyhedron

namespace {

constexpr long kFaceBudget = 1L << 20;

Eigen::MatrixXd stack(const Eigen::MatrixXd& E, const Eigen::MatrixXd& A, const std::vector<int>& rows) {
  Eigen::MatrixXd M(E.rows() + static_cast<Eigen::Index>(rows.size()), E.cols());
  M.topRows(E.rows()) = E;
  for (std::size_t k = 0; k < rows.size(); ++k) M.row(E.rows() + static_cast<Eigen::Index>(k)) = A.row(rows[k]);
  return M;
}

// Feasible point of {A d + a <= 0, E d + e = 0} with d = base + Z v, v free.
std::optional<Eigen::VectorXd> feasible_in_span(const PolyhedralCone& cone, const Eigen::VectorXd& base,
                                                const Eigen::MatrixXd& Z) {
  const int k = static_cast<int>(Z.cols());
  LinearProgram lp(k, true);
  for (int i = 0; i < cone.n_ineq(); ++i) {
    lp.add_row((cone.A_ineq.row(i) * Z).transpose(), Sense::Le, -cone.off_ineq(i) - cone.A_ineq.row(i).dot(base));
  }
  for (int i = 0; i < cone.n_eq(); ++i) {
    lp.add_row((cone.A_eq.row(i) * Z).transpose(), Sense::Eq, -cone.off_eq(i) - cone.A_eq.row(i).dot(base));
  }
  const LpSolution sol = solve_lp(lp);
  if (sol.status != LpStatus::Optimal) return std::nullopt;
  return base + Z * sol.z;
}

}  // namespace

ConeQuadResult max_quad_over_cone(const Eigen::MatrixXd& H_in, const Eigen::VectorXd& g, const PolyhedralCone& cone) {
  const int d = cone.dim;
  const Eigen::MatrixXd H = 0.5 * (H_in + H_in.transpose());
  ConeQuadResult res;
  auto q = [&](const Eigen::VectorXd& v) { return 0.5 * v.dot(H * v) + g.dot(v); };

  const Eigen::VectorXd origin = Eigen::VectorXd::Zero(d);
  if (!feasible_in_span(cone, origin, Eigen::MatrixXd::Identity(d, d))) {
    res.feasible = false;
    return res;
  }

  PolyhedralCone rec = cone;  // recession cone
  rec.off_ineq.setZero();
  rec.off_eq.setZero();

  const int rank_eq = numerical_rank(cone.A_eq);
  const double hscale = 1.0 + (d ? H.cwiseAbs().maxCoeff() : 0.0);
  const double curv_tol = 1e-9 * hscale;

  double best = -std::numeric_limits<double>::infinity();
  double kappa = -std::numeric_limits<double>::infinity();
  Eigen::VectorXd kappa_ray;
  std::vector<Eigen::VectorXd> flat_rays;  // zero-curvature recession directions

  for_each_subset(cone.n_ineq(), d - rank_eq, [&](const std::vector<int>& S) {
    if (++res.faces_examined > kFaceBudget) throw FaceBudgetExceeded("more than 2^20 faces");
    const Eigen::MatrixXd M = stack(cone.A_eq, cone.A_ineq, S);
    if (numerical_rank(M) != rank_eq + static_cast<int>(S.size())) return true;
    Eigen::VectorXd rhs(M.rows());
    rhs.head(cone.n_eq()) = -cone.off_eq;
    for (std::size_t k = 0; k < S.size(); ++k) rhs(cone.n_eq() + static_cast<Eigen::Index>(k)) = -cone.off_ineq(S[k]);
    const auto d0 = solve_consistent(M, rhs);
    if (!d0) return true;
    const Eigen::MatrixXd Z = null_space(M, d);

    Eigen::VectorXd cand = *d0;
    if (Z.cols() > 0) {
      const Eigen::MatrixXd Hr = Z.transpose() * H * Z;
      // curvature of the recession cone restricted to this face
      const SymmetricEigen eig = symmetric_eigen(Hr);
      for (Eigen::Index k = 0; k < eig.values.size(); ++k) {
        for (double sign : {1.0, -1.0}) {
          Eigen::VectorXd r = sign * (Z * eig.vectors.col(k));
          if (!rec.contains(r)) continue;
          if (eig.values(k) > kappa) {
            kappa = eig.values(k);
            kappa_ray = r;
          }
          if (std::abs(eig.values(k)) <= curv_tol) flat_rays.push_back(r);
        }
      }
      const Eigen::VectorXd gr = Z.transpose() * (H * *d0 + g);
      const auto w = solve_consistent(Hr, -gr, 1e-10);
      if (!w) return true;
      cand = *d0 + Z * *w;
      if (!cone.contains(cand)) {
        const Eigen::MatrixXd N = null_space(Hr, static_cast<int>(Hr.cols()), 1e-10);
        if (N.cols() == 0) return true;
        const auto shifted = feasible_in_span(cone, cand, Z * N);
        if (!shifted) return true;
        cand = *shifted;
      }
    }
    if (!cone.contains(cand)) return true;
    const double v = q(cand);
    if (res.argmax.size() != d || v > best + 1e-12 * (1.0 + std::abs(best))) {
      best = v;
      res.argmax = cand;
      res.face = S;
    }
    return true;
  });

  if (kappa > curv_tol) {
    res.unbounded = true;
    res.ray = kappa_ray.normalized();
    return res;
  }
  if (kappa >= -curv_tol && res.argmax.size() == d) {
    // Flat recession directions: the linear part decides.
    if (min_eig(-H) >= -curv_tol) {
      // H negative semidefinite: r^T H r = 0 forces H r = 0, so the slope
      // along r is g^T r at every point.
      const Eigen::MatrixXd P = null_space(H, d, 1e-10);
      if (P.cols() > 0) {
        const int k = static_cast<int>(P.cols());
        LinearProgram lp(k, true);
        lp.c = -(P.transpose() * g);
        for (int i = 0; i < cone.n_ineq(); ++i) lp.add_row((cone.A_ineq.row(i) * P).transpose(), Sense::Le, 0.0);
        for (int i = 0; i < cone.n_eq(); ++i) lp.add_row((cone.A_eq.row(i) * P).transpose(), Sense::Eq, 0.0);
        for (int j = 0; j < k; ++j) {
          lp.add_row(Eigen::VectorXd::Unit(k, j), Sense::Le, 1.0);
          lp.add_row(Eigen::VectorXd::Unit(k, j), Sense::Ge, -1.0);
        }
        const LpSolution sol = solve_lp(lp);
        if (sol.status == LpStatus::Optimal && -sol.value > kOptTol * (1.0 + g.norm())) {
          res.unbounded = true;
          res.ray = (P * sol.z).normalized();
          return res;
        }
      }
    } else {
      const Eigen::VectorXd slope = H * res.argmax + g;
      for (const auto& r : flat_rays) {
        if (slope.dot(r) > kOptTol * (1.0 + slope.norm())) {
          res.unbounded = true;
          res.ray = r.normalized();
          return res;
        }
      }
    }
  }
  if (res.argmax.size() != d) throw NumericalBreakdown("no stationary point found on a feasible polyhedron");
  res.value = best;
  return res;
}

// ---------------------------------------------------------------------------
// vertex enumeration

VertexEnumeration enumerate_vertices(const Eigen::MatrixXd& A, const Eigen::VectorXd& b, const Eigen::MatrixXd& E,
                                     const Eigen::VectorXd& e, long max_bases) {
  VertexEnumeration out;
  const int d = static_cast<int>(std::max(A.cols(), E.cols()));
  const int rank_e = numerical_rank(E);
  const int k = d - rank_e;
  const double tol = 1e-9;
  auto feasible = [&](const Eigen::VectorXd& z) {
    for (Eigen::Index i = 0; i < A.rows(); ++i) {
      if (A.row(i).dot(z) - b(i) > tol * (1.0 + A.row(i).norm() * z.norm() + std::abs(b(i)))) return false;
    }
    return E.rows() == 0 || (E * z - e).norm() <= tol * (1.0 + e.norm() + E.norm() * z.norm());
  };
  for_each_subset(static_cast<int>(A.rows()), k, [&](const std::vector<int>& S) {
    if (static_cast<int>(S.size()) != k) return true;
    if (++out.bases_examined > max_bases) {
      out.truncated = true;
      return false;
    }
    const Eigen::MatrixXd M = stack(E, A, S);
    if (numerical_rank(M) != d) return true;
    Eigen::VectorXd rhs(M.rows());
    rhs.head(E.rows()) = e;
    for (std::size_t j = 0; j < S.size(); ++j) rhs(E.rows() + static_cast<Eigen::Index>(j)) = b(S[j]);
    const auto z = solve_consistent(M, rhs);
    if (!z || !feasible(*z)) return true;
    for (const auto& v : out.vertices) {
      if ((v - *z).norm() <= 1e-9 * (1.0 + v.norm())) return true;
    }
    out.vertices.push_back(*z);
    return true;
  });
  return out;
}

}  // namespace mmcert
