#include "mmcert/expression.hpp"

#include <array>
#include <cctype>
#include <charconv>
#include <cmath>
#include <limits>

namespace mmcert {

struct Expression::Node {
  Op op = Op::Const;
  double value = 0.0;
  int index = 0;
  int exponent = 0;
  std::shared_ptr<const Node> a;
  std::shared_ptr<const Node> b;
};

namespace {

using NodePtr = std::shared_ptr<const Expression::Node>;

bool is_function(Op op) {
  return op == Op::Sin || op == Op::Cos || op == Op::Exp || op == Op::Log || op == Op::Sqrt;
}

bool is_binary(Op op) { return op == Op::Add || op == Op::Sub || op == Op::Mul || op == Op::Div; }

const char* function_name(Op op) {
  switch (op) {
    case Op::Sin: return "sin";
    case Op::Cos: return "cos";
    case Op::Exp: return "exp";
    case Op::Log: return "log";
    case Op::Sqrt: return "sqrt";
    default: return "";
  }
}

std::string format_number(double v) {
  std::array<char, 64> buf{};
  auto [end, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  return std::string(buf.data(), end);
}

std::string serialize_node(const Expression::Node& n) {
  switch (n.op) {
    case Op::Const:
      if (std::signbit(n.value)) return "(-" + format_number(-n.value) + ")";
      return format_number(n.value);
    case Op::VarX: return "x" + std::to_string(n.index + 1);
    case Op::VarY: return "y" + std::to_string(n.index + 1);
    case Op::Neg: return "(-" + serialize_node(*n.a) + ")";
    case Op::Add: return "(" + serialize_node(*n.a) + " + " + serialize_node(*n.b) + ")";
    case Op::Sub: return "(" + serialize_node(*n.a) + " - " + serialize_node(*n.b) + ")";
    case Op::Mul: return "(" + serialize_node(*n.a) + " * " + serialize_node(*n.b) + ")";
    case Op::Div: return "(" + serialize_node(*n.a) + " / " + serialize_node(*n.b) + ")";
    case Op::Pow: {
      std::string base = serialize_node(*n.a);
      // x^2^3 would re-parse as x^8, so a power base is always wrapped.
      const bool atomic = n.a->op == Op::VarX || n.a->op == Op::VarY ||
                          (n.a->op == Op::Const && !std::signbit(n.a->value));
      if (n.a->op == Op::Pow || (!atomic && base.front() != '(')) base = "(" + base + ")";
      return base + "^" + std::to_string(n.exponent);
    }
    default:
      return std::string(function_name(n.op)) + "(" + serialize_node(*n.a) + ")";
  }
}

// Integer power; std::pow is exact for representable results and otherwise
// correctly rounded on the platforms we build for.
double ipow(double v, int k) { return std::pow(v, k); }

class Parser {
 public:
  Parser(std::string_view text, int n, int m) : text_(text), n_(n), m_(m) {}

  NodePtr parse() {
    skip_ws();
    if (pos_ >= text_.size()) fail("expression");
    NodePtr e = expr();
    skip_ws();
    if (pos_ != text_.size()) fail("operator or end of input");
    return e;
  }

 private:
  [[noreturn]] void fail(const std::string& expected) const {
    throw SyntaxError(pos_, expected, std::string(text_));
  }

  void skip_ws() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
  }

  bool accept(char c) {
    skip_ws();
    if (pos_ < text_.size() && text_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  static NodePtr make(Op op, NodePtr a, NodePtr b = nullptr) {
    auto n = std::make_shared<Expression::Node>();
    n->op = op;
    n->a = std::move(a);
    n->b = std::move(b);
    return n;
  }

  NodePtr expr() {
    NodePtr lhs = term();
    for (;;) {
      if (accept('+')) {
        lhs = make(Op::Add, lhs, term());
      } else if (accept('-')) {
        lhs = make(Op::Sub, lhs, term());
      } else {
        return lhs;
      }
    }
  }

  NodePtr term() {
    NodePtr lhs = unary();
    for (;;) {
      if (accept('*')) {
        lhs = make(Op::Mul, lhs, unary());
      } else if (accept('/')) {
        lhs = make(Op::Div, lhs, unary());
      } else {
        return lhs;
      }
    }
  }

  NodePtr unary() {
    if (accept('-')) return make(Op::Neg, unary());
    return power();
  }

  NodePtr power() {
    NodePtr base = primary();
    if (!accept('^')) return base;
    auto n = std::make_shared<Expression::Node>();
    n->op = Op::Pow;
    n->exponent = exponent();
    n->a = std::move(base);
    return n;
  }

  int exponent() {
    skip_ws();
    const bool negative = accept('-');
    skip_ws();
    const std::size_t start = pos_;
    while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) ++pos_;
    if (start == pos_) fail("integer exponent");
    long long k = 0;
    auto [ptr, ec] = std::from_chars(text_.data() + start, text_.data() + pos_, k);
    if (ec != std::errc() || k > 1024) {
      pos_ = start;
      fail("integer exponent of magnitude <= 1024");
    }
    if (accept('^')) {
      const std::size_t inner_pos = pos_;
      const int inner = exponent();
      if (inner < 0 && k != 1) {
        pos_ = inner_pos;
        fail("non-negative exponent (integer powers only)");
      }
      const double folded = ipow(static_cast<double>(k), inner);
      if (folded > 1024) {
        pos_ = inner_pos;
        fail("integer exponent of magnitude <= 1024");
      }
      k = static_cast<long long>(folded);
    }
    return static_cast<int>(negative ? -k : k);
  }

  NodePtr number() {
    const std::size_t start = pos_;
    auto digits = [&] {
      const std::size_t s = pos_;
      while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) ++pos_;
      return pos_ - s;
    };
    std::size_t count = digits();
    if (pos_ < text_.size() && text_[pos_] == '.') {
      ++pos_;
      count += digits();
    }
    if (count == 0) fail("number");
    if (pos_ < text_.size() && (text_[pos_] == 'e' || text_[pos_] == 'E')) {
      const std::size_t save = pos_;
      ++pos_;
      if (pos_ < text_.size() && (text_[pos_] == '+' || text_[pos_] == '-')) ++pos_;
      if (digits() == 0) pos_ = save;
    }
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(text_.data() + start, text_.data() + pos_, v);
    if (ec != std::errc() || ptr != text_.data() + pos_ || !std::isfinite(v)) {
      pos_ = start;
      fail("finite number");
    }
    auto n = std::make_shared<Expression::Node>();
    n->op = Op::Const;
    n->value = v;
    return n;
  }

  NodePtr primary() {
    skip_ws();
    if (pos_ >= text_.size()) fail("number, variable, function or '('");
    const char c = text_[pos_];
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return number();
    if (c == '(') {
      ++pos_;
      NodePtr e = expr();
      if (!accept(')')) fail("')'");
      return e;
    }
    if (!std::isalpha(static_cast<unsigned char>(c))) fail("number, variable, function or '('");

    const std::size_t start = pos_;
    while (pos_ < text_.size() && std::isalnum(static_cast<unsigned char>(text_[pos_]))) ++pos_;
    const std::string name(text_.substr(start, pos_ - start));

    static constexpr std::array<std::pair<const char*, Op>, 5> kFunctions{{
        {"sin", Op::Sin}, {"cos", Op::Cos}, {"exp", Op::Exp}, {"log", Op::Log}, {"sqrt", Op::Sqrt}}};
    for (const auto& [fname, op] : kFunctions) {
      if (name == fname) {
        if (!accept('(')) fail("'(' after " + name);
        NodePtr arg = expr();
        if (!accept(')')) fail("')'");
        return make(op, arg);
      }
    }

    if ((name[0] == 'x' || name[0] == 'y') && name.size() > 1) {
      bool all_digits = true;
      for (std::size_t i = 1; i < name.size(); ++i) {
        all_digits = all_digits && std::isdigit(static_cast<unsigned char>(name[i]));
      }
      if (all_digits) {
        long long idx = 0;
        auto [ptr, ec] = std::from_chars(name.data() + 1, name.data() + name.size(), idx);
        const int limit = name[0] == 'x' ? n_ : m_;
        if (ec != std::errc() || idx < 1 || idx > limit) {
          throw IndexOutOfRange("variable '" + name + "' outside declared dimension " +
                                std::string(1, name[0] == 'x' ? 'n' : 'm') + "=" +
                                std::to_string(limit));
        }
        auto n = std::make_shared<Expression::Node>();
        n->op = name[0] == 'x' ? Op::VarX : Op::VarY;
        n->index = static_cast<int>(idx - 1);
        return n;
      }
    }
    throw UnknownIdentifier(name);
  }

  std::string_view text_;
  int n_;
  int m_;
  std::size_t pos_ = 0;
};

double eval_node(const Expression::Node& n, std::span<const double> x, std::span<const double> y) {
  double r = 0.0;
  switch (n.op) {
    case Op::Const: return n.value;
    case Op::VarX: return x[static_cast<std::size_t>(n.index)];
    case Op::VarY: return y[static_cast<std::size_t>(n.index)];
    case Op::Neg: return -eval_node(*n.a, x, y);
    case Op::Add: r = eval_node(*n.a, x, y) + eval_node(*n.b, x, y); break;
    case Op::Sub: r = eval_node(*n.a, x, y) - eval_node(*n.b, x, y); break;
    case Op::Mul: r = eval_node(*n.a, x, y) * eval_node(*n.b, x, y); break;
    case Op::Div: {
      const double num = eval_node(*n.a, x, y);
      const double den = eval_node(*n.b, x, y);
      if (den == 0.0) throw DomainError("division by zero", serialize_node(n));
      r = num / den;
      break;
    }
    case Op::Pow: {
      const double v = eval_node(*n.a, x, y);
      if (v == 0.0 && n.exponent < 0) throw DomainError("division by zero", serialize_node(n));
      r = ipow(v, n.exponent);
      break;
    }
    case Op::Sin: r = std::sin(eval_node(*n.a, x, y)); break;
    case Op::Cos: r = std::cos(eval_node(*n.a, x, y)); break;
    case Op::Exp: r = std::exp(eval_node(*n.a, x, y)); break;
    case Op::Log: {
      const double v = eval_node(*n.a, x, y);
      if (!(v > 0.0)) throw DomainError("log of non-positive argument", serialize_node(n));
      r = std::log(v);
      break;
    }
    case Op::Sqrt: {
      const double v = eval_node(*n.a, x, y);
      if (v < 0.0) throw DomainError("sqrt of negative argument", serialize_node(n));
      r = std::sqrt(v);
      break;
    }
  }
  if (!std::isfinite(r)) throw DomainError("non-finite value", serialize_node(n));
  return r;
}

// Chain rule for a scalar function applied to a jet: f0 = phi(v), f1 = phi'(v), f2 = phi''(v).
Jet chain(const Jet& a, double f0, double f1, double f2) {
  Jet r;
  r.value = f0;
  r.gradient = f1 * a.gradient;
  r.hessian = f1 * a.hessian + f2 * (a.gradient * a.gradient.transpose());
  return r;
}

Jet jet_node(const Expression::Node& n, std::span<const double> x, std::span<const double> y) {
  const Eigen::Index dim = static_cast<Eigen::Index>(x.size() + y.size());
  Jet r;
  switch (n.op) {
    case Op::Const:
      r.value = n.value;
      r.gradient = Eigen::VectorXd::Zero(dim);
      r.hessian = Eigen::MatrixXd::Zero(dim, dim);
      return r;
    case Op::VarX:
    case Op::VarY: {
      const std::size_t k = n.op == Op::VarX ? static_cast<std::size_t>(n.index)
                                             : x.size() + static_cast<std::size_t>(n.index);
      r.value = n.op == Op::VarX ? x[k] : y[k - x.size()];
      r.gradient = Eigen::VectorXd::Unit(dim, static_cast<Eigen::Index>(k));
      r.hessian = Eigen::MatrixXd::Zero(dim, dim);
      return r;
    }
    case Op::Neg: {
      r = jet_node(*n.a, x, y);
      r.value = -r.value;
      r.gradient = -r.gradient;
      r.hessian = -r.hessian;
      return r;
    }
    case Op::Add:
    case Op::Sub: {
      const Jet a = jet_node(*n.a, x, y);
      const Jet b = jet_node(*n.b, x, y);
      const double s = n.op == Op::Add ? 1.0 : -1.0;
      r.value = a.value + s * b.value;
      r.gradient = a.gradient + s * b.gradient;
      r.hessian = a.hessian + s * b.hessian;
      break;
    }
    case Op::Mul:
    case Op::Div: {
      const Jet a = jet_node(*n.a, x, y);
      Jet b = jet_node(*n.b, x, y);
      if (n.op == Op::Div) {
        const double v = b.value;
        if (v == 0.0) throw DomainError("division by zero", serialize_node(n));
        b = chain(b, 1.0 / v, -1.0 / (v * v), 2.0 / (v * v * v));
      }
      r.value = a.value * b.value;
      r.gradient = a.value * b.gradient + b.value * a.gradient;
      r.hessian = a.value * b.hessian + b.value * a.hessian +
                  a.gradient * b.gradient.transpose() + b.gradient * a.gradient.transpose();
      break;
    }
    case Op::Pow: {
      const Jet a = jet_node(*n.a, x, y);
      const int k = n.exponent;
      const double v = a.value;
      if (v == 0.0 && k < 0) throw DomainError("division by zero", serialize_node(n));
      const double f1 = k == 0 ? 0.0 : k * ipow(v, k - 1);
      const double f2 = (k == 0 || k == 1) ? 0.0 : static_cast<double>(k) * (k - 1) * ipow(v, k - 2);
      r = chain(a, ipow(v, k), f1, f2);
      break;
    }
    case Op::Sin: {
      const Jet a = jet_node(*n.a, x, y);
      r = chain(a, std::sin(a.value), std::cos(a.value), -std::sin(a.value));
      break;
    }
    case Op::Cos: {
      const Jet a = jet_node(*n.a, x, y);
      r = chain(a, std::cos(a.value), -std::sin(a.value), -std::cos(a.value));
      break;
    }
    case Op::Exp: {
      const Jet a = jet_node(*n.a, x, y);
      const double e = std::exp(a.value);
      r = chain(a, e, e, e);
      break;
    }
    case Op::Log: {
      const Jet a = jet_node(*n.a, x, y);
      const double v = a.value;
      if (!(v > 0.0)) throw DomainError("log of non-positive argument", serialize_node(n));
      r = chain(a, std::log(v), 1.0 / v, -1.0 / (v * v));
      break;
    }
    case Op::Sqrt: {
      const Jet a = jet_node(*n.a, x, y);
      const double v = a.value;
      // derivative is unbounded at 0
      if (!(v > 0.0)) throw DomainError("sqrt not differentiable at non-positive argument", serialize_node(n));
      const double s = std::sqrt(v);
      r = chain(a, s, 0.5 / s, -0.25 / (s * v));
      break;
    }
  }
  if (!std::isfinite(r.value) || !r.gradient.allFinite() || !r.hessian.allFinite()) {
    throw DomainError("non-finite derivative", serialize_node(n));
  }
  return r;
}

int max_index(const Expression::Node& n, Op var) {
  int best = n.op == var ? n.index : -1;
  if (n.a) best = std::max(best, max_index(*n.a, var));
  if (n.b) best = std::max(best, max_index(*n.b, var));
  return best;
}

bool has_vars(const Expression::Node& n) {
  if (n.op == Op::VarX || n.op == Op::VarY) return true;
  return (n.a && has_vars(*n.a)) || (n.b && has_vars(*n.b));
}

bool has_y(const Expression::Node& n) { return max_index(n, Op::VarY) >= 0; }

bool affine_node(const Expression::Node& n) {
  switch (n.op) {
    case Op::Const:
    case Op::VarX:
    case Op::VarY: return true;
    case Op::Neg: return affine_node(*n.a);
    case Op::Add:
    case Op::Sub: return affine_node(*n.a) && affine_node(*n.b);
    case Op::Mul:
      return (!has_vars(*n.a) && affine_node(*n.b)) || (!has_vars(*n.b) && affine_node(*n.a));
    case Op::Div: return !has_vars(*n.b) && affine_node(*n.a);
    case Op::Pow: return !has_vars(*n.a) || n.exponent == 0 || (n.exponent == 1 && affine_node(*n.a));
    default: return !has_vars(*n.a);
  }
}

bool separable_node(const Expression::Node& n) {
  if (!has_y(n)) return true;
  switch (n.op) {
    case Op::VarY: return true;
    case Op::Neg: return separable_node(*n.a);
    case Op::Add:
    case Op::Sub: return separable_node(*n.a) && separable_node(*n.b);
    case Op::Mul:
      return (!has_vars(*n.a) && separable_node(*n.b)) || (!has_vars(*n.b) && separable_node(*n.a));
    case Op::Div: return !has_vars(*n.b) && separable_node(*n.a);
    case Op::Pow: return n.exponent == 0 || (n.exponent == 1 && separable_node(*n.a));
    default: return false;
  }
}

}  // namespace

SyntaxError::SyntaxError(std::size_t position, std::string expected, const std::string& text)
    : std::runtime_error("syntax error at position " + std::to_string(position) + ": expected " +
                         expected + " in '" + text + "'"),
      position_(position),
      expected_(std::move(expected)) {}

Expression Expression::constant(double value) {
  auto n = std::make_shared<Node>();
  n->op = Op::Const;
  n->value = value;
  return Expression(n);
}

Expression Expression::var_x(int index) {
  auto n = std::make_shared<Node>();
  n->op = Op::VarX;
  n->index = index;
  return Expression(n);
}

Expression Expression::var_y(int index) {
  auto n = std::make_shared<Node>();
  n->op = Op::VarY;
  n->index = index;
  return Expression(n);
}

Expression Expression::unary(Op op, const Expression& operand) {
  if (op != Op::Neg && !is_function(op)) throw std::invalid_argument("not a unary operator");
  auto n = std::make_shared<Node>();
  n->op = op;
  n->a = operand.node_;
  return Expression(n);
}

Expression Expression::binary(Op op, const Expression& lhs, const Expression& rhs) {
  if (!is_binary(op)) throw std::invalid_argument("not a binary operator");
  auto n = std::make_shared<Node>();
  n->op = op;
  n->a = lhs.node_;
  n->b = rhs.node_;
  return Expression(n);
}

Expression Expression::power(const Expression& base, int exponent) {
  auto n = std::make_shared<Node>();
  n->op = Op::Pow;
  n->exponent = exponent;
  n->a = base.node_;
  return Expression(n);
}

Op Expression::op() const { return node_->op; }
double Expression::value() const { return node_->value; }
int Expression::index() const { return node_->index; }
int Expression::exponent() const { return node_->exponent; }

std::size_t Expression::arity() const {
  if (node_->b) return 2;
  return node_->a ? 1 : 0;
}

Expression Expression::child(std::size_t i) const {
  if (i >= arity()) throw std::out_of_range("expression child index");
  return Expression(i == 0 ? node_->a : node_->b);
}

bool Expression::operator==(const Expression& other) const {
  const Node& a = *node_;
  const Node& b = *other.node_;
  if (&a == &b) return true;
  if (a.op != b.op || arity() != other.arity()) return false;
  switch (a.op) {
    case Op::Const:
      // bitwise, so that -0.0 and 0.0 are distinct trees
      return std::signbit(a.value) == std::signbit(b.value) && a.value == b.value;
    case Op::VarX:
    case Op::VarY: return a.index == b.index;
    case Op::Pow:
      if (a.exponent != b.exponent) return false;
      break;
    default: break;
  }
  for (std::size_t i = 0; i < arity(); ++i) {
    if (!(child(i) == other.child(i))) return false;
  }
  return true;
}

Expression operator+(const Expression& a, const Expression& b) { return Expression::binary(Op::Add, a, b); }
Expression operator-(const Expression& a, const Expression& b) { return Expression::binary(Op::Sub, a, b); }
Expression operator*(const Expression& a, const Expression& b) { return Expression::binary(Op::Mul, a, b); }
Expression operator/(const Expression& a, const Expression& b) { return Expression::binary(Op::Div, a, b); }
Expression operator-(const Expression& a) { return Expression::unary(Op::Neg, a); }

Expression parse_expression(std::string_view text, int n, int m) {
  Parser parser(text, n, m);
  return Expression::from_node(parser.parse());
}

std::string serialize(const Expression& e) { return serialize_node(e.node()); }

double eval(const Expression& e, std::span<const double> x, std::span<const double> y) {
  return eval_node(e.node(), x, y);
}

Jet differentiate(const Expression& e, std::span<const double> x, std::span<const double> y) {
  Jet j = jet_node(e.node(), x, y);
  j.hessian = 0.5 * (j.hessian + j.hessian.transpose()).eval();
  return j;
}

int max_x_index(const Expression& e) { return max_index(e.node(), Op::VarX); }
int max_y_index(const Expression& e) { return max_index(e.node(), Op::VarY); }
bool references_y(const Expression& e) { return has_y(e.node()); }
bool is_affine(const Expression& e) { return affine_node(e.node()); }
bool is_y_affine_separable(const Expression& e) { return separable_node(e.node()); }

}  // namespace mmcert
