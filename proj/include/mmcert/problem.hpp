#pragma once

#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "mmcert/expression.hpp"

namespace mmcert {

class ParseError : public std::runtime_error {
 public:
  ParseError(int line, const std::string& message)
      : std::runtime_error("line " + std::to_string(line) + ": " + message), line_(line) {}
  int line() const { return line_; }

 private:
  int line_;
};

class ValidationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// min over x of max over y of f(x, y) subject to
///   phi_ineq(x) <= 0, phi_eq(x) = 0, varphi_ineq(x, y) <= 0, varphi_eq(x, y) = 0.
struct ProblemSpec {
  int n = 1;
  int m = 1;
  Expression f = Expression::constant(0.0);
  std::vector<Expression> phi_ineq;
  std::vector<Expression> phi_eq;
  std::vector<Expression> varphi_ineq;
  std::vector<Expression> varphi_eq;

  // optional candidate carried by the file (point_x / point_y keys)
  std::optional<std::vector<double>> point_x;
  std::optional<std::vector<double>> point_y;

  int p1() const { return static_cast<int>(phi_ineq.size()); }
  int p2() const { return static_cast<int>(phi_eq.size()); }
  int q1() const { return static_cast<int>(varphi_ineq.size()); }
  int q2() const { return static_cast<int>(varphi_eq.size()); }
};

/// Throws ValidationError when an invariant of ProblemSpec is broken.
void validate(const ProblemSpec& spec);

/// Parses the line-oriented key/value problem format.
ProblemSpec parse_problem(const std::string& text);
ProblemSpec load_problem(const std::filesystem::path& path);

/// Canonical text of a problem (expressions in canonical serialization);
/// stable input to problem_digest.
std::string canonical_text(const ProblemSpec& spec);
/// 64-bit FNV-1a of canonical_text, as 16 hex digits.
std::string problem_digest(const ProblemSpec& spec);

/// Jet of one function at the candidate; gradient/Hessian over z = (x, y).
using FunctionJet = Jet;

/// The pair (x, y) plus derivative data of every problem function there.
class CandidatePoint {
 public:
  /// Evaluates all derivatives; propagates DomainError.
  CandidatePoint(const ProblemSpec& spec, Eigen::VectorXd x, Eigen::VectorXd y);

  const Eigen::VectorXd& x() const { return x_; }
  const Eigen::VectorXd& y() const { return y_; }
  int n() const { return static_cast<int>(x_.size()); }
  int m() const { return static_cast<int>(y_.size()); }

  const FunctionJet& f() const { return f_; }
  const std::vector<FunctionJet>& phi_ineq() const { return phi_ineq_; }
  const std::vector<FunctionJet>& phi_eq() const { return phi_eq_; }
  const std::vector<FunctionJet>& varphi_ineq() const { return varphi_ineq_; }
  const std::vector<FunctionJet>& varphi_eq() const { return varphi_eq_; }

 private:
  Eigen::VectorXd x_;
  Eigen::VectorXd y_;
  FunctionJet f_;
  std::vector<FunctionJet> phi_ineq_;
  std::vector<FunctionJet> phi_eq_;
  std::vector<FunctionJet> varphi_ineq_;
  std::vector<FunctionJet> varphi_eq_;
};

Eigen::VectorXd gradient(const Expression& e, const CandidatePoint& p);
Eigen::MatrixXd hessian(const Expression& e, const CandidatePoint& p);

}  // namespace mmcert
