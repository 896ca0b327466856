#include "mmcert/multipliers.hpp"

#include <cstring>
#include <map>
#include <mutex>
#include <string>

#include "mmcert/numlin.hpp"

namespace mmcert {

MultiplierVector MultiplierVector::zeros(const ProblemSpec& spec) {
  return {Eigen::VectorXd::Zero(spec.p1()), Eigen::VectorXd::Zero(spec.p2()), Eigen::VectorXd::Zero(spec.q1()),
          Eigen::VectorXd::Zero(spec.q2())};
}

Eigen::MatrixXd jacobian(const std::vector<FunctionJet>& jets, int cols) {
  Eigen::MatrixXd J(static_cast<Eigen::Index>(jets.size()), cols);
  for (std::size_t i = 0; i < jets.size(); ++i) J.row(static_cast<Eigen::Index>(i)) = jets[i].gradient.transpose();
  return J;
}

Eigen::VectorXd lagrangian_gradient(const CandidatePoint& p, const MultiplierVector& mu) {
  const int d = p.n() + p.m();
  Eigen::VectorXd g = p.f().gradient;
  g += jacobian(p.phi_ineq(), d).transpose() * mu.alpha_ineq;
  g += jacobian(p.phi_eq(), d).transpose() * mu.alpha_eq;
  g -= jacobian(p.varphi_ineq(), d).transpose() * mu.beta_ineq;
  g -= jacobian(p.varphi_eq(), d).transpose() * mu.beta_eq;
  return g;
}

Eigen::MatrixXd lmax_hessian_yy(const CandidatePoint& p, const MultiplierVector& mu) {
  const int n = p.n();
  const int m = p.m();
  Eigen::MatrixXd H = p.f().hessian.bottomRightCorner(m, m);
  for (std::size_t i = 0; i < p.varphi_ineq().size(); ++i) {
    H -= mu.beta_ineq(static_cast<Eigen::Index>(i)) * p.varphi_ineq()[i].hessian.bottomRightCorner(m, m);
  }
  for (std::size_t i = 0; i < p.varphi_eq().size(); ++i) {
    H -= mu.beta_eq(static_cast<Eigen::Index>(i)) * p.varphi_eq()[i].hessian.bottomRightCorner(m, m);
  }
  (void)n;
  return H;
}

KktReport kkt_residual(const ProblemSpec& spec, const CandidatePoint& p, const MultiplierVector& mu) {
  (void)spec;
  KktReport r;
  r.stationarity = lagrangian_gradient(p, mu).norm();
  auto neg = [](const Eigen::VectorXd& v) { return v.size() ? std::max(0.0, -v.minCoeff()) : 0.0; };
  r.sign_violation = std::max(neg(mu.alpha_ineq), neg(mu.beta_ineq));
  for (std::size_t i = 0; i < p.phi_ineq().size(); ++i) {
    r.complementarity = std::max(r.complementarity, std::abs(mu.alpha_ineq(static_cast<Eigen::Index>(i)) * p.phi_ineq()[i].value));
  }
  for (std::size_t i = 0; i < p.varphi_ineq().size(); ++i) {
    r.complementarity = std::max(r.complementarity, std::abs(mu.beta_ineq(static_cast<Eigen::Index>(i)) * p.varphi_ineq()[i].value));
  }
  r.pass = r.stationarity <= 1e-7 && r.sign_violation <= 1e-9 && r.complementarity <= 1e-7;
  return r;
}

namespace {

// Variable layout of the inner multiplier polyhedron: active inequality
// multipliers (>= 0) followed by equality multipliers (free).
struct BetaLayout {
  std::vector<int> active;
  int q1 = 0;
  int q2 = 0;
  int size() const { return static_cast<int>(active.size()) + q2; }

  // m x size: y-gradients of the included constraints as columns.
  Eigen::MatrixXd gy(const CandidatePoint& p) const {
    const int n = p.n();
    const int m = p.m();
    Eigen::MatrixXd G(m, size());
    for (std::size_t k = 0; k < active.size(); ++k) {
      G.col(static_cast<Eigen::Index>(k)) = p.varphi_ineq()[static_cast<std::size_t>(active[k])].gradient.tail(m);
    }
    for (int k = 0; k < q2; ++k) {
      G.col(static_cast<Eigen::Index>(active.size()) + k) = p.varphi_eq()[static_cast<std::size_t>(k)].gradient.tail(m);
    }
    (void)n;
    return G;
  }
  Eigen::MatrixXd gx(const CandidatePoint& p) const {
    const int n = p.n();
    Eigen::MatrixXd G(n, size());
    for (std::size_t k = 0; k < active.size(); ++k) {
      G.col(static_cast<Eigen::Index>(k)) = p.varphi_ineq()[static_cast<std::size_t>(active[k])].gradient.head(n);
    }
    for (int k = 0; k < q2; ++k) {
      G.col(static_cast<Eigen::Index>(active.size()) + k) = p.varphi_eq()[static_cast<std::size_t>(k)].gradient.head(n);
    }
    return G;
  }
  void unpack(const Eigen::VectorXd& z, int offset, MultiplierVector& mu) const {
    mu.beta_ineq.setZero(q1);
    for (std::size_t k = 0; k < active.size(); ++k) {
      mu.beta_ineq(active[k]) = std::max(0.0, z(offset + static_cast<Eigen::Index>(k)));
    }
    mu.beta_eq = z.segment(offset + static_cast<Eigen::Index>(active.size()), q2);
  }
};

BetaLayout beta_layout(const ProblemSpec& spec, const ActiveSets& act) {
  return {act.I_varphi, spec.q1(), spec.q2()};
}

// {beta : G beta = grad_y f, beta_active >= 0} as an LP with objective c.
LinearProgram lambda_max_lp(const CandidatePoint& p, const BetaLayout& L, const Eigen::VectorXd& c) {
  const int k = L.size();
  LinearProgram lp(k);
  lp.free.assign(static_cast<std::size_t>(k), false);
  for (int j = static_cast<int>(L.active.size()); j < k; ++j) lp.free[static_cast<std::size_t>(j)] = true;
  lp.c = c;
  const Eigen::MatrixXd G = L.gy(p);
  const Eigen::VectorXd fy = p.f().gradient.tail(p.m());
  for (int i = 0; i < p.m(); ++i) lp.add_row(G.row(i).transpose(), Sense::Eq, fy(i));
  return lp;
}

}  // namespace

std::optional<MultiplierVector> lambda_max_find(const ProblemSpec& spec, const CandidatePoint& p,
                                                const ActiveSets& act) {
  const BetaLayout L = beta_layout(spec, act);
  const LpSolution sol = solve_lp(lambda_max_lp(p, L, Eigen::VectorXd::Zero(L.size())));
  if (sol.status != LpStatus::Optimal) return std::nullopt;
  MultiplierVector mu = MultiplierVector::zeros(spec);
  L.unpack(sol.z, 0, mu);
  return mu;
}

std::optional<MultiplierVector> full_multiplier_find(const ProblemSpec& spec, const CandidatePoint& p,
                                                     const ActiveSets& act) {
  const int n = spec.n;
  const int m = spec.m;
  const BetaLayout L = beta_layout(spec, act);
  const int ka = static_cast<int>(act.I_phi.size());
  const int p2 = spec.p2();
  const int kb = L.size();
  const int k = ka + p2 + kb;
  LinearProgram lp(k);
  lp.free.assign(static_cast<std::size_t>(k), false);
  for (int j = ka; j < ka + p2; ++j) lp.free[static_cast<std::size_t>(j)] = true;
  for (int j = ka + p2 + static_cast<int>(L.active.size()); j < k; ++j) lp.free[static_cast<std::size_t>(j)] = true;

  // x rows: grad_x f + grad phi^T alpha - grad_x varphi^T beta = 0
  Eigen::MatrixXd Ax = Eigen::MatrixXd::Zero(n, k);
  for (int j = 0; j < ka; ++j) Ax.col(j) = p.phi_ineq()[static_cast<std::size_t>(act.I_phi[static_cast<std::size_t>(j)])].gradient.head(n);
  for (int j = 0; j < p2; ++j) Ax.col(ka + j) = p.phi_eq()[static_cast<std::size_t>(j)].gradient.head(n);
  Ax.rightCols(kb) = -L.gx(p);
  const Eigen::VectorXd fx = p.f().gradient.head(n);
  for (int i = 0; i < n; ++i) lp.add_row(Ax.row(i).transpose(), Sense::Eq, -fx(i));
  // y rows: grad_y f - grad_y varphi^T beta = 0
  Eigen::MatrixXd Ay = Eigen::MatrixXd::Zero(m, k);
  Ay.rightCols(kb) = L.gy(p);
  const Eigen::VectorXd fy = p.f().gradient.tail(m);
  for (int i = 0; i < m; ++i) lp.add_row(Ay.row(i).transpose(), Sense::Eq, fy(i));

  const LpSolution sol = solve_lp(lp);
  if (sol.status != LpStatus::Optimal) return std::nullopt;
  MultiplierVector mu = MultiplierVector::zeros(spec);
  for (int j = 0; j < ka; ++j) mu.alpha_ineq(act.I_phi[static_cast<std::size_t>(j)]) = std::max(0.0, sol.z(j));
  mu.alpha_eq = sol.z.segment(ka, p2);
  L.unpack(sol.z, ka + p2, mu);
  return mu;
}

Lambda2Max lambda2_max(const ProblemSpec& spec, const CandidatePoint& p, const ActiveSets& act,
                       const Eigen::VectorXd& u) {
  const BetaLayout L = beta_layout(spec, act);
  const Eigen::VectorXd c = -(L.gx(p).transpose() * u);
  const LpSolution sol = solve_lp(lambda_max_lp(p, L, c));
  if (sol.status == LpStatus::Infeasible) throw LambdaMaxEmpty();
  Lambda2Max out;
  const double base = p.f().gradient.head(spec.n).dot(u);
  out.witness = MultiplierVector::zeros(spec);
  if (sol.status == LpStatus::Unbounded) {
    out.unbounded = true;
    out.value = -std::numeric_limits<double>::infinity();
    return out;
  }
  L.unpack(sol.z, 0, out.witness);
  out.value = base + c.dot(sol.z);
  for (std::size_t k = 0; k < L.active.size(); ++k) {
    if (sol.z(static_cast<Eigen::Index>(k)) <= 1e-12) out.zero_ineq.push_back(L.active[k]);
  }
  return out;
}

LambdaMaxMin lambda_max_minimize(const ProblemSpec& spec, const CandidatePoint& p, const ActiveSets& act,
                                 const Eigen::VectorXd& w_ineq, const Eigen::VectorXd& w_eq,
                                 const std::optional<std::pair<Eigen::VectorXd, double>>& cut) {
  const BetaLayout L = beta_layout(spec, act);
  const int na = static_cast<int>(L.active.size());
  auto compress = [&](const Eigen::VectorXd& ineq, const Eigen::VectorXd& eq) {
    Eigen::VectorXd c(L.size());
    for (int k = 0; k < na; ++k) c(k) = ineq(L.active[static_cast<std::size_t>(k)]);
    c.tail(L.q2) = eq;
    return c;
  };
  LinearProgram lp = lambda_max_lp(p, L, compress(w_ineq, w_eq));
  if (cut) lp.add_row(compress(cut->first.head(L.q1), cut->first.tail(L.q2)), Sense::Le, cut->second);
  const LpSolution sol = solve_lp(lp);
  if (sol.status == LpStatus::Infeasible) throw LambdaMaxEmpty();
  LambdaMaxMin out;
  out.beta = MultiplierVector::zeros(spec);
  if (sol.status == LpStatus::Unbounded) {
    out.unbounded = true;
    out.value = -std::numeric_limits<double>::infinity();
    return out;
  }
  L.unpack(sol.z, 0, out.beta);
  out.value = sol.value;
  return out;
}

AlphaExtension extend_alpha(const ProblemSpec& spec, const CandidatePoint& p, const ActiveSets& act,
                            const MultiplierVector& beta, const Eigen::VectorXd& w_ineq, const Eigen::VectorXd& w_eq) {
  const int n = spec.n;
  const int ka = static_cast<int>(act.I_phi.size());
  const int p2 = spec.p2();
  LinearProgram lp(ka + p2);
  lp.free.assign(static_cast<std::size_t>(ka + p2), false);
  for (int j = ka; j < ka + p2; ++j) lp.free[static_cast<std::size_t>(j)] = true;
  Eigen::MatrixXd Ax(n, ka + p2);
  for (int j = 0; j < ka; ++j) {
    Ax.col(j) = p.phi_ineq()[static_cast<std::size_t>(act.I_phi[static_cast<std::size_t>(j)])].gradient.head(n);
    lp.c(j) = -w_ineq(act.I_phi[static_cast<std::size_t>(j)]);
  }
  for (int j = 0; j < p2; ++j) {
    Ax.col(ka + j) = p.phi_eq()[static_cast<std::size_t>(j)].gradient.head(n);
    lp.c(ka + j) = -w_eq(j);
  }
  // grad_x f - grad_x varphi^T beta + grad phi^T alpha = 0
  MultiplierVector b = beta;
  b.alpha_ineq.setZero(spec.p1());
  b.alpha_eq.setZero(p2);
  const Eigen::VectorXd rest = lagrangian_gradient(p, b).head(n);
  for (int i = 0; i < n; ++i) lp.add_row(Ax.row(i).transpose(), Sense::Eq, -rest(i));
  const LpSolution sol = solve_lp(lp);
  AlphaExtension out;
  out.mu = b;
  if (sol.status == LpStatus::Infeasible) return out;
  out.feasible = true;
  if (sol.status == LpStatus::Unbounded) {
    out.unbounded = true;
    out.value = std::numeric_limits<double>::infinity();
    return out;
  }
  for (int j = 0; j < ka; ++j) out.mu.alpha_ineq(act.I_phi[static_cast<std::size_t>(j)]) = std::max(0.0, sol.z(j));
  out.mu.alpha_eq = sol.z.segment(ka, p2);
  out.value = -sol.value;
  return out;
}

namespace {

std::mutex g_face_mutex;
std::map<std::string, OptimalFaceVertices> g_face_cache;

template <class V>
void append_bytes(std::string& key, const V& v) {
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    const double x = v(i);
    char buf[sizeof(double)];
    std::memcpy(buf, &x, sizeof buf);
    key.append(buf, sizeof buf);
  }
  key.push_back('|');
}

}  // namespace

OptimalFaceVertices lambda2_max_vertices(const ProblemSpec& spec, const CandidatePoint& p, const ActiveSets& act,
                                         const Eigen::VectorXd& u, long max_bases) {
  std::string key = canonical_text(spec);
  append_bytes(key, p.x());
  append_bytes(key, p.y());
  append_bytes(key, u);
  for (int i : act.I_varphi) key += std::to_string(i) + ",";
  key += "|" + std::to_string(max_bases);
  {
    std::lock_guard<std::mutex> lock(g_face_mutex);
    if (auto it = g_face_cache.find(key); it != g_face_cache.end()) return it->second;
  }

  const Lambda2Max opt = lambda2_max(spec, p, act, u);
  OptimalFaceVertices out;
  if (opt.unbounded) {
    out.sampled_only = true;
  } else {
    const BetaLayout L = beta_layout(spec, act);
    const int k = L.size();
    const int na = static_cast<int>(L.active.size());
    // beta_active >= 0 as -beta <= 0
    Eigen::MatrixXd A = Eigen::MatrixXd::Zero(na, k);
    for (int j = 0; j < na; ++j) A(j, j) = -1.0;
    const Eigen::VectorXd b = Eigen::VectorXd::Zero(na);
    const Eigen::VectorXd c = -(L.gx(p).transpose() * u);
    Eigen::MatrixXd E(p.m() + 1, k);
    E.topRows(p.m()) = L.gy(p);
    E.row(p.m()) = c.transpose();
    Eigen::VectorXd e(p.m() + 1);
    e.head(p.m()) = p.f().gradient.tail(p.m());
    e(p.m()) = opt.value - p.f().gradient.head(spec.n).dot(u);
    const VertexEnumeration ve = enumerate_vertices(A, b, E, e, max_bases);
    for (const auto& z : ve.vertices) {
      MultiplierVector mu = MultiplierVector::zeros(spec);
      L.unpack(z, 0, mu);
      out.vertices.push_back(mu);
    }
    if (ve.truncated || ve.vertices.empty()) {
      out.sampled_only = true;
      // witness plus centroid of what was found
      out.vertices.push_back(opt.witness);
      if (ve.vertices.size() > 1) {
        MultiplierVector centroid = MultiplierVector::zeros(spec);
        for (const auto& v : out.vertices) {
          centroid.beta_ineq += v.beta_ineq / static_cast<double>(out.vertices.size());
          centroid.beta_eq += v.beta_eq / static_cast<double>(out.vertices.size());
        }
        out.vertices.push_back(centroid);
      }
    }
  }
  std::lock_guard<std::mutex> lock(g_face_mutex);
  g_face_cache.emplace(key, out);
  return out;
}

JacobianReport jacobian_uniqueness_check(const ProblemSpec& spec, const CandidatePoint& p, const ActiveSets& act) {
  JacobianReport r;
  const BetaLayout L = beta_layout(spec, act);
  const Eigen::MatrixXd G = L.gy(p);  // m x count
  r.active_count = L.size();
  r.rank = numerical_rank(G);
  r.licq = r.rank == r.active_count;
  r.beta = MultiplierVector::zeros(spec);
  if (const auto beta = lambda_max_find(spec, p, act)) {
    r.kkt = true;
    r.beta = *beta;
    r.strict_complementarity = true;
    for (int i : act.I_varphi) {
      if (beta->beta_ineq(i) < 1e-7) r.strict_complementarity = false;
    }
    const Eigen::MatrixXd Z = null_space(G.transpose(), p.m());
    if (Z.cols() == 0) {
      r.sosc = true;
      r.sosc_max_eig = -std::numeric_limits<double>::infinity();
    } else {
      const Eigen::MatrixXd Hr = Z.transpose() * lmax_hessian_yy(p, *beta) * Z;
      r.sosc_max_eig = -min_eig(-Hr);
      r.sosc = r.sosc_max_eig < -1e-9;
    }
  }
  r.overall = r.licq && r.kkt && r.strict_complementarity && r.sosc;
  return r;
}

}  // namespace mmcert
