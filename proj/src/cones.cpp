#include "mmcert/cones.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "mmcert/numlin.hpp"

namespace mmcert {

namespace {

std::string join(const std::vector<std::string>& parts) {
  std::string out;
  for (const auto& s : parts) out += (out.empty() ? "" : "; ") + s;
  return out;
}

Eigen::VectorXd grad_x(const FunctionJet& j, int n) { return j.gradient.head(n); }
Eigen::VectorXd grad_y(const FunctionJet& j, int n) { return j.gradient.tail(j.gradient.size() - n); }

}  // namespace

InfeasiblePoint::InfeasiblePoint(std::vector<std::string> violations)
    : std::runtime_error("infeasible point: " + join(violations)), violations_(std::move(violations)) {}

double default_eps_act(const CandidatePoint& p) {
  double worst = 0.0;
  auto scan = [&](const std::vector<FunctionJet>& js) {
    for (const auto& j : js) worst = std::max(worst, std::abs(j.value));
  };
  scan(p.phi_ineq());
  scan(p.phi_eq());
  scan(p.varphi_ineq());
  scan(p.varphi_eq());
  return 1e-7 * (1.0 + worst);
}

ActiveSets active_sets(const ProblemSpec& spec, const CandidatePoint& p, double eps_act) {
  (void)spec;
  ActiveSets act;
  act.eps_act = eps_act;
  std::vector<std::string> bad;
  auto describe = [](const char* what, std::size_t i, double v, const char* rel) {
    std::ostringstream os;
    os.precision(17);
    os << what << "[" << i + 1 << "] = " << v << " " << rel;
    return os.str();
  };
  for (std::size_t i = 0; i < p.phi_ineq().size(); ++i) {
    const double v = p.phi_ineq()[i].value;
    if (v > eps_act) bad.push_back(describe("phi_ineq", i, v, "> 0"));
    else if (std::abs(v) <= eps_act) act.I_phi.push_back(static_cast<int>(i));
  }
  for (std::size_t i = 0; i < p.phi_eq().size(); ++i) {
    const double v = p.phi_eq()[i].value;
    if (std::abs(v) > eps_act) bad.push_back(describe("phi_eq", i, v, "!= 0"));
  }
  for (std::size_t i = 0; i < p.varphi_ineq().size(); ++i) {
    const double v = p.varphi_ineq()[i].value;
    if (v > eps_act) bad.push_back(describe("varphi_ineq", i, v, "> 0"));
    else if (std::abs(v) <= eps_act) act.I_varphi.push_back(static_cast<int>(i));
  }
  for (std::size_t i = 0; i < p.varphi_eq().size(); ++i) {
    const double v = p.varphi_eq()[i].value;
    if (std::abs(v) > eps_act) bad.push_back(describe("varphi_eq", i, v, "!= 0"));
  }
  if (!bad.empty()) throw InfeasiblePoint(bad);
  return act;
}

PolyhedralCone linearization_cone_X(const ProblemSpec& spec, const CandidatePoint& p, const ActiveSets& act) {
  const int n = spec.n;
  PolyhedralCone c = PolyhedralCone::full(n);
  for (int i : act.I_phi) c.add_ineq(grad_x(p.phi_ineq()[static_cast<std::size_t>(i)], n));
  for (const auto& j : p.phi_eq()) c.add_eq(grad_x(j, n));
  return c;
}

PolyhedralCone linearization_cone_Y(const ProblemSpec& spec, const CandidatePoint& p, const ActiveSets& act,
                                    const Eigen::VectorXd& u) {
  const int n = spec.n;
  PolyhedralCone c = PolyhedralCone::full(spec.m);
  for (int i : act.I_varphi) {
    const auto& j = p.varphi_ineq()[static_cast<std::size_t>(i)];
    c.add_ineq(grad_y(j, n), grad_x(j, n).dot(u));
  }
  for (const auto& j : p.varphi_eq()) c.add_eq(grad_y(j, n), grad_x(j, n).dot(u));
  return c;
}

PolyhedralCone critical_cone_max(const ProblemSpec& spec, const CandidatePoint& p, const ActiveSets& act) {
  PolyhedralCone c = linearization_cone_Y(spec, p, act, Eigen::VectorXd::Zero(spec.n));
  c.add_eq(grad_y(p.f(), spec.n));
  return c;
}

PolyhedralCone critical_set_C(const ProblemSpec& spec, const CandidatePoint& p, const ActiveSets& act,
                              const Eigen::VectorXd& u) {
  PolyhedralCone c = linearization_cone_Y(spec, p, act, u);
  c.add_eq(grad_y(p.f(), spec.n), grad_x(p.f(), spec.n).dot(u));
  return c;
}

// ---------------------------------------------------------------------------
// generators

namespace {

bool tight(const Eigen::VectorXd& row, const Eigen::VectorXd& v) {
  return std::abs(row.dot(v)) <= 1e-9 * row.norm() * std::max(1.0, v.norm());
}

void add_unique(std::vector<Eigen::VectorXd>& list, const Eigen::VectorXd& v, double tol = 1e-9) {
  for (const auto& w : list) {
    if ((w - v).norm() <= tol) return;
  }
  list.push_back(v);
}

// Extreme rays of the pointed cone {t : B t <= 0} (rank B = cols) by the
// double-description method; adjacency by the algebraic rank test.
std::vector<Eigen::VectorXd> pointed_rays(const Eigen::MatrixXd& B) {
  const int r = static_cast<int>(B.cols());
  const int p = static_cast<int>(B.rows());
  if (r == 0) return {};

  std::vector<int> start;
  Eigen::MatrixXd B0(0, r);
  for (int i = 0; i < p && static_cast<int>(start.size()) < r; ++i) {
    Eigen::MatrixXd trial(B0.rows() + 1, r);
    trial << B0, B.row(i);
    if (numerical_rank(trial) == trial.rows()) {
      B0 = trial;
      start.push_back(i);
    }
  }
  if (static_cast<int>(start.size()) < r) throw std::logic_error("pointed_rays: cone is not pointed");

  const Eigen::MatrixXd R0 = -B0.fullPivLu().inverse();
  std::vector<Eigen::VectorXd> rays;
  for (int j = 0; j < r; ++j) rays.push_back(R0.col(j).normalized());

  std::vector<int> processed = start;
  for (int i = 0; i < p; ++i) {
    if (std::find(start.begin(), start.end(), i) != start.end()) continue;
    const Eigen::VectorXd b = B.row(i).transpose();
    std::vector<Eigen::VectorXd> pos;
    std::vector<Eigen::VectorXd> neg;
    std::vector<Eigen::VectorXd> next;
    for (const auto& v : rays) {
      const double s = b.dot(v);
      if (tight(b, v)) next.push_back(v);
      else if (s < 0) {
        next.push_back(v);
        neg.push_back(v);
      } else {
        pos.push_back(v);
      }
    }
    processed.push_back(i);
    for (const auto& vp : pos) {
      for (const auto& vn : neg) {
        Eigen::VectorXd c = b.dot(vp) * vn - b.dot(vn) * vp;
        if (c.norm() == 0.0) continue;
        c.normalize();
        Eigen::MatrixXd T(0, r);
        for (int k : processed) {
          if (tight(B.row(k).transpose(), c)) {
            T.conservativeResize(T.rows() + 1, Eigen::NoChange);
            T.row(T.rows() - 1) = B.row(k);
          }
        }
        if (numerical_rank(T) == r - 1) add_unique(next, c);
      }
    }
    rays = std::move(next);
  }
  return rays;
}

}  // namespace

ConeGenerators cone_generators(const PolyhedralCone& cone) {
  if (!cone.homogeneous()) throw std::invalid_argument("cone_generators: cone has offsets");
  ConeGenerators out;
  const int d = cone.dim;
  const Eigen::MatrixXd W = null_space(cone.A_eq, d);  // d x k
  const int k = static_cast<int>(W.cols());
  if (k == 0) return out;
  const Eigen::MatrixXd G = cone.A_ineq * W;            // p x k
  const Eigen::MatrixXd Lw = null_space(G, k);          // lineality in W coordinates
  for (Eigen::Index j = 0; j < Lw.cols(); ++j) out.lineality.push_back((W * Lw.col(j)).normalized());
  // Orthogonal complement of the lineality inside W coordinates.
  const Eigen::MatrixXd Q = Lw.cols() ? null_space(Lw.transpose(), k) : Eigen::MatrixXd::Identity(k, k);
  if (Q.cols() == 0) return out;
  for (const auto& t : pointed_rays(G * Q)) out.rays.push_back((W * Q * t).normalized());
  return out;
}

// ---------------------------------------------------------------------------
// sampling

namespace {

constexpr int kPrimes[] = {2,  3,  5,  7,  11, 13, 17, 19, 23, 29, 31, 37, 41, 43,
                           47, 53, 59, 61, 67, 71, 73, 79, 83, 89, 97, 101, 103, 107};

double radical_inverse(std::uint64_t i, int base) {
  double f = 1.0;
  double r = 0.0;
  while (i > 0) {
    f /= base;
    r += f * static_cast<double>(i % static_cast<std::uint64_t>(base));
    i /= static_cast<std::uint64_t>(base);
  }
  return r;
}

// Point of the Halton sequence in [-1, 1]^k; past the prime table, a
// splitmix-style hash fills the remaining coordinates deterministically.
Eigen::VectorXd halton(std::uint64_t index, int k) {
  Eigen::VectorXd v(k);
  constexpr int nprimes = static_cast<int>(sizeof(kPrimes) / sizeof(kPrimes[0]));
  for (int j = 0; j < k; ++j) {
    double h;
    if (j < nprimes) {
      h = radical_inverse(index, kPrimes[j]);
    } else {
      std::uint64_t z = index * 0x9E3779B97F4A7C15ULL + static_cast<std::uint64_t>(j) * 0xBF58476D1CE4E5B9ULL;
      z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
      z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
      z ^= z >> 31;
      h = static_cast<double>(z >> 11) * 0x1.0p-53;
    }
    v(j) = 2.0 * h - 1.0;
  }
  return v;
}

}  // namespace

DirectionSample sample_directions(const PolyhedralCone& cone, int budget, std::uint64_t seed) {
  if (!cone.homogeneous()) throw std::invalid_argument("sample_directions: cone has offsets");
  DirectionSample out;
  const int d = cone.dim;
  if (d == 0) return out;
  out.dimension_too_large = d > 8;
  out.sampled_only = d > 6 || cone.n_ineq() > 20;

  auto push = [&](Eigen::VectorXd v) {
    const double nv = v.norm();
    if (nv < 1e-12) return false;
    v /= nv;
    if (!cone.contains(v)) return false;
    const std::size_t before = out.directions.size();
    add_unique(out.directions, v);
    return out.directions.size() > before;
  };

  const Eigen::MatrixXd W = null_space(cone.A_eq, d);
  const int k = static_cast<int>(W.cols());
  if (k == 0) return out;  // the cone is {0}

  std::vector<Eigen::VectorXd> gens;  // for conic fill
  std::vector<Eigen::VectorXd> lines;
  if (!out.dimension_too_large) {
    if (!out.sampled_only) {
      const ConeGenerators g = cone_generators(cone);
      lines = g.lineality;
      gens = g.rays;
    } else {
      const Eigen::MatrixXd Lw = null_space(cone.A_ineq * W, k);
      for (Eigen::Index j = 0; j < Lw.cols(); ++j) lines.push_back((W * Lw.col(j)).normalized());
    }
    for (const auto& v : lines) {
      push(v);
      push(-v);
    }
    for (const auto& v : gens) push(v);
  }
  out.structural = static_cast<int>(out.directions.size());

  const std::uint64_t offset = seed * 7919ULL + 1ULL;
  const long attempts = 200L * std::max(budget, 1);
  for (long t = 0; t < attempts && static_cast<int>(out.directions.size()) < budget; ++t) {
    push(W * halton(offset + static_cast<std::uint64_t>(t), k));
  }
  // Narrow cones: fall back to conic combinations of the generators.
  const int ng = static_cast<int>(gens.size() + lines.size());
  for (long t = 0; ng > 0 && t < attempts && static_cast<int>(out.directions.size()) < budget; ++t) {
    const Eigen::VectorXd w = halton(offset + static_cast<std::uint64_t>(t), ng);
    Eigen::VectorXd v = Eigen::VectorXd::Zero(d);
    for (std::size_t j = 0; j < gens.size(); ++j) v += 0.5 * (w(static_cast<Eigen::Index>(j)) + 1.0) * gens[j];
    for (std::size_t j = 0; j < lines.size(); ++j) v += w(static_cast<Eigen::Index>(gens.size() + j)) * lines[j];
    push(v);
  }
  return out;
}

}  // namespace mmcert
