#include "mmcert/problem.hpp"

#include <cctype>
#include <charconv>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace mmcert {

namespace {

std::string trim(const std::string& s) {
  std::size_t b = 0;
  std::size_t e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return s.substr(b, e - b);
}

int parse_dimension(const std::string& value, int line) {
  int v = 0;
  auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), v);
  if (ec != std::errc() || ptr != value.data() + value.size()) {
    throw ParseError(line, "expected an integer, got '" + value + "'");
  }
  return v;
}

std::vector<double> parse_csv(const std::string& value, int line) {
  std::vector<double> out;
  std::stringstream ss(value);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    double v = 0.0;
    const char* first = item.data();
    if (!item.empty() && item[0] == '+') ++first;
    auto [ptr, ec] = std::from_chars(first, item.data() + item.size(), v);
    if (item.empty() || ec != std::errc() || ptr != item.data() + item.size()) {
      throw ParseError(line, "expected a comma-separated list of numbers, got '" + value + "'");
    }
    out.push_back(v);
  }
  if (out.empty()) throw ParseError(line, "empty number list");
  return out;
}

struct PendingExpression {
  std::string key;
  std::string text;
  int line;
};

}  // namespace

void validate(const ProblemSpec& spec) {
  if (spec.n < 1 || spec.m < 1) throw ValidationError("dimensions n, m must be >= 1");
  auto check = [&](const Expression& e, const std::string& what, bool allow_y) {
    if (max_x_index(e) >= spec.n) throw ValidationError(what + " references an x index beyond n");
    if (max_y_index(e) >= spec.m) throw ValidationError(what + " references a y index beyond m");
    if (!allow_y && references_y(e)) throw ValidationError(what + " must depend on x only: " + serialize(e));
  };
  check(spec.f, "f", true);
  for (const auto& e : spec.phi_ineq) check(e, "phi_ineq", false);
  for (const auto& e : spec.phi_eq) check(e, "phi_eq", false);
  for (const auto& e : spec.varphi_ineq) check(e, "varphi_ineq", true);
  for (const auto& e : spec.varphi_eq) check(e, "varphi_eq", true);
  if (spec.point_x && static_cast<int>(spec.point_x->size()) != spec.n) {
    throw ValidationError("point_x has " + std::to_string(spec.point_x->size()) + " entries, n = " +
                          std::to_string(spec.n));
  }
  if (spec.point_y && static_cast<int>(spec.point_y->size()) != spec.m) {
    throw ValidationError("point_y has " + std::to_string(spec.point_y->size()) + " entries, m = " +
                          std::to_string(spec.m));
  }
}

ProblemSpec parse_problem(const std::string& text) {
  ProblemSpec spec;
  std::optional<int> n;
  std::optional<int> m;
  bool have_f = false;
  std::vector<PendingExpression> pending;

  std::istringstream in(text);
  std::string raw;
  int line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    if (const auto hash = raw.find('#'); hash != std::string::npos) raw.erase(hash);
    const std::string line = trim(raw);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ParseError(line_no, "expected 'key = value'");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (value.empty()) throw ParseError(line_no, "missing value for key '" + key + "'");

    if (key == "n" || key == "m") {
      auto& slot = key == "n" ? n : m;
      if (slot) throw ParseError(line_no, "duplicate key '" + key + "'");
      slot = parse_dimension(value, line_no);
    } else if (key == "f") {
      if (have_f) throw ParseError(line_no, "duplicate key 'f'");
      have_f = true;
      pending.push_back({key, value, line_no});
    } else if (key == "phi_ineq" || key == "phi_eq" || key == "varphi_ineq" || key == "varphi_eq") {
      pending.push_back({key, value, line_no});
    } else if (key == "point_x" || key == "point_y") {
      auto& slot = key == "point_x" ? spec.point_x : spec.point_y;
      if (slot) throw ParseError(line_no, "duplicate key '" + key + "'");
      slot = parse_csv(value, line_no);
    } else {
      throw ParseError(line_no, "unknown key '" + key + "'");
    }
  }
  if (!n) throw ValidationError("missing key 'n'");
  if (!m) throw ValidationError("missing key 'm'");
  if (!have_f) throw ValidationError("missing key 'f'");
  spec.n = *n;
  spec.m = *m;
  if (spec.n < 1 || spec.m < 1) throw ValidationError("dimensions n, m must be >= 1");

  for (const auto& p : pending) {
    Expression e = Expression::constant(0.0);
    try {
      e = parse_expression(p.text, spec.n, spec.m);
    } catch (const std::exception& ex) {
      throw ParseError(p.line, ex.what());
    }
    if ((p.key == "phi_ineq" || p.key == "phi_eq") && references_y(e)) {
      throw ValidationError("line " + std::to_string(p.line) + ": " + p.key +
                            " must depend on x only: " + p.text);
    }
    if (p.key == "f") spec.f = e;
    else if (p.key == "phi_ineq") spec.phi_ineq.push_back(e);
    else if (p.key == "phi_eq") spec.phi_eq.push_back(e);
    else if (p.key == "varphi_ineq") spec.varphi_ineq.push_back(e);
    else spec.varphi_eq.push_back(e);
  }
  validate(spec);
  return spec;
}

ProblemSpec load_problem(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read problem file '" + path.string() + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_problem(buf.str());
}

std::string canonical_text(const ProblemSpec& spec) {
  std::string out;
  out += "n = " + std::to_string(spec.n) + "\n";
  out += "m = " + std::to_string(spec.m) + "\n";
  out += "f = " + serialize(spec.f) + "\n";
  for (const auto& e : spec.phi_ineq) out += "phi_ineq = " + serialize(e) + "\n";
  for (const auto& e : spec.phi_eq) out += "phi_eq = " + serialize(e) + "\n";
  for (const auto& e : spec.varphi_ineq) out += "varphi_ineq = " + serialize(e) + "\n";
  for (const auto& e : spec.varphi_eq) out += "varphi_eq = " + serialize(e) + "\n";
  return out;
}

std::string problem_digest(const ProblemSpec& spec) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : canonical_text(spec)) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

CandidatePoint::CandidatePoint(const ProblemSpec& spec, Eigen::VectorXd x, Eigen::VectorXd y)
    : x_(std::move(x)), y_(std::move(y)) {
  if (x_.size() != spec.n || y_.size() != spec.m) {
    throw ValidationError("candidate point dimensions (" + std::to_string(x_.size()) + ", " +
                          std::to_string(y_.size()) + ") do not match n = " + std::to_string(spec.n) +
                          ", m = " + std::to_string(spec.m));
  }
  const std::span<const double> xs(x_.data(), static_cast<std::size_t>(x_.size()));
  const std::span<const double> ys(y_.data(), static_cast<std::size_t>(y_.size()));
  f_ = differentiate(spec.f, xs, ys);
  auto fill = [&](const std::vector<Expression>& src, std::vector<FunctionJet>& dst) {
    dst.reserve(src.size());
    for (const auto& e : src) dst.push_back(differentiate(e, xs, ys));
  };
  fill(spec.phi_ineq, phi_ineq_);
  fill(spec.phi_eq, phi_eq_);
  fill(spec.varphi_ineq, varphi_ineq_);
  fill(spec.varphi_eq, varphi_eq_);
}

Eigen::VectorXd gradient(const Expression& e, const CandidatePoint& p) {
  return differentiate(e, {p.x().data(), static_cast<std::size_t>(p.n())},
                       {p.y().data(), static_cast<std::size_t>(p.m())})
      .gradient;
}

Eigen::MatrixXd hessian(const Expression& e, const CandidatePoint& p) {
  return differentiate(e, {p.x().data(), static_cast<std::size_t>(p.n())},
                       {p.y().data(), static_cast<std::size_t>(p.m())})
      .hessian;
}

}  // namespace mmcert
