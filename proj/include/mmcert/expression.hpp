#pragma once

#include <cstddef>
#include <memory>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>

#include <Eigen/Dense>

namespace mmcert {

/// Raised when an expression string does not match the grammar.
class SyntaxError : public std::runtime_error {
 public:
  SyntaxError(std::size_t position, std::string expected, const std::string& text);
  std::size_t position() const { return position_; }
  const std::string& expected() const { return expected_; }

 private:
  std::size_t position_;
  std::string expected_;
};

class UnknownIdentifier : public std::runtime_error {
 public:
  explicit UnknownIdentifier(const std::string& name)
      : std::runtime_error("unknown identifier '" + name + "'"), name_(name) {}
  const std::string& name() const { return name_; }

 private:
  std::string name_;
};

class IndexOutOfRange : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Evaluation left the domain of an operator (log/sqrt of a non-positive
/// argument, division by zero, overflow). Carries the offending subexpression.
class DomainError : public std::runtime_error {
 public:
  DomainError(const std::string& what, std::string subexpression)
      : std::runtime_error(what + " in '" + subexpression + "'"),
        subexpression_(std::move(subexpression)) {}
  const std::string& subexpression() const { return subexpression_; }

 private:
  std::string subexpression_;
};

enum class Op { Const, VarX, VarY, Neg, Add, Sub, Mul, Div, Pow, Sin, Cos, Exp, Log, Sqrt };

/// Immutable expression tree over x1..xn, y1..ym. Copies share nodes.
class Expression {
 public:
  struct Node;

  static Expression constant(double value);
  static Expression var_x(int index);  // 0-based
  static Expression var_y(int index);  // 0-based
  static Expression unary(Op op, const Expression& operand);
  static Expression binary(Op op, const Expression& lhs, const Expression& rhs);
  static Expression power(const Expression& base, int exponent);

  Op op() const;
  double value() const;   // Const only
  int index() const;      // VarX / VarY only
  int exponent() const;   // Pow only
  std::size_t arity() const;
  Expression child(std::size_t i) const;

  bool operator==(const Expression& other) const;

  // Node is opaque outside expression.cpp.
  const Node& node() const { return *node_; }
  static Expression from_node(std::shared_ptr<const Node> node) { return Expression(std::move(node)); }

 private:
  explicit Expression(std::shared_ptr<const Node> node) : node_(std::move(node)) {}
  std::shared_ptr<const Node> node_;
};

Expression operator+(const Expression& a, const Expression& b);
Expression operator-(const Expression& a, const Expression& b);
Expression operator*(const Expression& a, const Expression& b);
Expression operator/(const Expression& a, const Expression& b);
Expression operator-(const Expression& a);

// Precedence: ^ > unary minus > * / > + -. Binary operators are
// left-associative, ^ is right-associative and takes an integer exponent.
Expression parse_expression(std::string_view text, int n, int m);

/// Canonical, fully parenthesized text; parse_expression inverts it exactly.
std::string serialize(const Expression& e);

double eval(const Expression& e, std::span<const double> x, std::span<const double> y);

/// Value, gradient and Hessian with respect to z = (x, y), all exact up to
/// rounding (second-order forward accumulation).
struct Jet {
  double value = 0.0;
  Eigen::VectorXd gradient;
  Eigen::MatrixXd hessian;
};

Jet differentiate(const Expression& e, std::span<const double> x, std::span<const double> y);

int max_x_index(const Expression& e);  // -1 if no x variable
int max_y_index(const Expression& e);  // -1 if no y variable
bool references_y(const Expression& e);

/// True when e is affine in all of its variables.
bool is_affine(const Expression& e);
/// True when e = a(x) + b^T y + c with constant b.
bool is_y_affine_separable(const Expression& e);

}  // namespace mmcert
