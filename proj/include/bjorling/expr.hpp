#pragma once

// Closed-form analytic expressions: parser, printer and evaluator.
//
// Grammar (whitespace insignificant):
//   expr   := term (('+'|'-') term)* ;
//   term   := factor (('*'|'/') factor)* ;
//   factor := base ('^' integer)? ;
//   base   := number | ident | ident '(' expr ')' | '(' expr ')' | '-' base ;
//
// A leading '-' negates the rest of its term, so "-x2/2" is -(x2/2) and
// "-x^2" is -(x^2). Exponents are integer literals, optionally signed.

#include <algorithm>
#include <array>
#include <cctype>
#include <charconv>
#include <cmath>
#include <complex>
#include <cstdio>
#include <map>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "bjorling/dual.hpp"
#include "bjorling/error.hpp"

namespace bjorling {

enum class Func { Sin, Cos, Tan, Sinh, Cosh, Exp, Log, Sqrt, Neg };
enum class BinOp { Add, Sub, Mul, Div };

inline const char* func_name(Func f) {
  switch (f) {
    case Func::Sin: return "sin";
    case Func::Cos: return "cos";
    case Func::Tan: return "tan";
    case Func::Sinh: return "sinh";
    case Func::Cosh: return "cosh";
    case Func::Exp: return "exp";
    case Func::Log: return "log";
    case Func::Sqrt: return "sqrt";
    case Func::Neg: return "-";
  }
  return "?";
}

struct ExprNode;
using ExprNodePtr = std::shared_ptr<const ExprNode>;

struct ExprNode {
  enum class Kind { Constant, Variable, Unary, Binary, Power };

  Kind kind = Kind::Constant;
  double value = 0.0;     // Constant
  std::size_t var = 0;    // Variable: index into the declared variable list
  Func func = Func::Neg;  // Unary
  BinOp op = BinOp::Add;  // Binary
  int exponent = 1;       // Power
  ExprNodePtr lhs;        // Unary/Power operand, Binary left
  ExprNodePtr rhs;        // Binary right

  static ExprNodePtr constant(double c) {
    auto n = std::make_shared<ExprNode>();
    n->kind = Kind::Constant;
    n->value = c;
    return n;
  }
  static ExprNodePtr variable(std::size_t index) {
    auto n = std::make_shared<ExprNode>();
    n->kind = Kind::Variable;
    n->var = index;
    return n;
  }
  static ExprNodePtr unary(Func f, ExprNodePtr a) {
    auto n = std::make_shared<ExprNode>();
    n->kind = Kind::Unary;
    n->func = f;
    n->lhs = std::move(a);
    return n;
  }
  static ExprNodePtr binary(BinOp o, ExprNodePtr a, ExprNodePtr b) {
    auto n = std::make_shared<ExprNode>();
    n->kind = Kind::Binary;
    n->op = o;
    n->lhs = std::move(a);
    n->rhs = std::move(b);
    return n;
  }
  static ExprNodePtr power(ExprNodePtr a, int e) {
    auto n = std::make_shared<ExprNode>();
    n->kind = Kind::Power;
    n->exponent = e;
    n->lhs = std::move(a);
    return n;
  }
};

namespace detail {

inline std::string format_number(double c) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", c);
  return buf;
}

inline std::string print_node(const ExprNode& n, const std::vector<std::string>& vars) {
  switch (n.kind) {
    case ExprNode::Kind::Constant: return format_number(n.value);
    case ExprNode::Kind::Variable: return vars.at(n.var);
    case ExprNode::Kind::Unary:
      if (n.func == Func::Neg) return "(-" + print_node(*n.lhs, vars) + ")";
      return std::string(func_name(n.func)) + "(" + print_node(*n.lhs, vars) + ")";
    case ExprNode::Kind::Binary: {
      static constexpr std::array<const char*, 4> sym = {"+", "-", "*", "/"};
      return "(" + print_node(*n.lhs, vars) + sym[static_cast<int>(n.op)] +
             print_node(*n.rhs, vars) + ")";
    }
    case ExprNode::Kind::Power:
      return "(" + print_node(*n.lhs, vars) + "^" + std::to_string(n.exponent) + ")";
  }
  return {};
}

template <class T>
constexpr bool real_valued() {
  return std::is_same_v<decltype(primal(std::declval<T>())), double>;
}

template <class T>
T ipow(const T& x, int n) {
  T result(1.0);
  T base = x;
  unsigned m = static_cast<unsigned>(n < 0 ? -n : n);
  bool first = true;
  while (m > 0) {
    if (m & 1u) {
      result = first ? base : result * base;
      first = false;
    }
    m >>= 1u;
    if (m > 0) base = base * base;
  }
  return result;
}

template <class T>
T eval_node(const ExprNode& n, std::span<const T> vars, const std::vector<std::string>& names) {
  using std::cos, std::cosh, std::exp, std::log, std::sin, std::sinh, std::sqrt, std::tan;
  switch (n.kind) {
    case ExprNode::Kind::Constant: return T(n.value);
    case ExprNode::Kind::Variable: return vars[n.var];
    case ExprNode::Kind::Unary: {
      const T a = eval_node<T>(*n.lhs, vars, names);
      switch (n.func) {
        case Func::Neg: return T(0.0) - a;
        case Func::Sin: return sin(a);
        case Func::Cos: return cos(a);
        case Func::Tan: return tan(a);
        case Func::Sinh: return sinh(a);
        case Func::Cosh: return cosh(a);
        case Func::Exp: return exp(a);
        case Func::Log:
          if constexpr (real_valued<T>()) {
            if (!(primal(a) > 0.0)) {
              throw EvalError("log of non-positive value in " + print_node(n, names));
            }
          }
          return log(a);
        case Func::Sqrt:
          if constexpr (real_valued<T>()) {
            if (primal(a) < 0.0) {
              throw EvalError("sqrt of negative value in " + print_node(n, names));
            }
          }
          return sqrt(a);
      }
      break;
    }
    case ExprNode::Kind::Binary: {
      const T a = eval_node<T>(*n.lhs, vars, names);
      const T b = eval_node<T>(*n.rhs, vars, names);
      switch (n.op) {
        case BinOp::Add: return a + b;
        case BinOp::Sub: return a - b;
        case BinOp::Mul: return a * b;
        case BinOp::Div:
          if (primal(b) == decltype(primal(b))(0.0)) {
            throw EvalError("division by zero in " + print_node(n, names));
          }
          return a / b;
      }
      break;
    }
    case ExprNode::Kind::Power: {
      const T a = eval_node<T>(*n.lhs, vars, names);
      if (n.exponent >= 0) return ipow(a, n.exponent);
      if (primal(a) == decltype(primal(a))(0.0)) {
        throw EvalError("division by zero in " + print_node(n, names));
      }
      return T(1.0) / ipow(a, n.exponent);
    }
  }
  return T(0.0);
}

inline bool uses_function(const ExprNode& n, Func f) {
  switch (n.kind) {
    case ExprNode::Kind::Constant:
    case ExprNode::Kind::Variable: return false;
    case ExprNode::Kind::Unary: return n.func == f || uses_function(*n.lhs, f);
    case ExprNode::Kind::Binary: return uses_function(*n.lhs, f) || uses_function(*n.rhs, f);
    case ExprNode::Kind::Power: return uses_function(*n.lhs, f);
  }
  return false;
}

inline void collect_vars(const ExprNode& n, std::vector<bool>& used) {
  switch (n.kind) {
    case ExprNode::Kind::Constant: return;
    case ExprNode::Kind::Variable: used[n.var] = true; return;
    case ExprNode::Kind::Binary: collect_vars(*n.rhs, used); [[fallthrough]];
    case ExprNode::Kind::Unary:
    case ExprNode::Kind::Power: collect_vars(*n.lhs, used); return;
  }
}

class Parser {
 public:
  Parser(std::string_view text, const std::vector<std::string>& vars) : s_(text), vars_(vars) {}

  ExprNodePtr parse() {
    auto e = expr();
    skip_ws();
    if (pos_ != s_.size()) throw ParseError("unexpected '" + std::string(1, s_[pos_]) + "'", pos_);
    return e;
  }

 private:
  void skip_ws() {
    while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
  }
  bool accept(char c) {
    skip_ws();
    if (pos_ < s_.size() && s_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }
  void expect(char c) {
    if (!accept(c)) {
      throw ParseError(std::string("expected '") + c + "'", pos_);
    }
  }

  ExprNodePtr expr() {
    auto lhs = term();
    for (;;) {
      if (accept('+')) {
        lhs = ExprNode::binary(BinOp::Add, lhs, term());
      } else if (accept('-')) {
        lhs = ExprNode::binary(BinOp::Sub, lhs, term());
      } else {
        return lhs;
      }
    }
  }

  ExprNodePtr term() {
    auto lhs = factor();
    for (;;) {
      if (accept('*')) {
        lhs = ExprNode::binary(BinOp::Mul, lhs, factor());
      } else if (accept('/')) {
        lhs = ExprNode::binary(BinOp::Div, lhs, factor());
      } else {
        return lhs;
      }
    }
  }

  ExprNodePtr factor() {
    auto b = base();
    if (accept('^')) {
      skip_ws();
      const std::size_t start = pos_;
      bool negative = false;
      if (pos_ < s_.size() && (s_[pos_] == '-' || s_[pos_] == '+')) {
        negative = s_[pos_] == '-';
        ++pos_;
      }
      const std::size_t digits = pos_;
      while (pos_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[pos_]))) ++pos_;
      if (pos_ == digits) throw ParseError("exponent must be an integer literal", start);
      int e = 0;
      auto [p, ec] = std::from_chars(s_.data() + digits, s_.data() + pos_, e);
      if (ec != std::errc{}) throw ParseError("exponent out of range", start);
      b = ExprNode::power(b, negative ? -e : e);
    }
    return b;
  }

  ExprNodePtr base() {
    skip_ws();
    if (pos_ >= s_.size()) throw ParseError("unexpected end of input", pos_);
    const char c = s_[pos_];
    if (c == '-') {
      ++pos_;
      return ExprNode::unary(Func::Neg, term());
    }
    if (c == '(') {
      ++pos_;
      auto e = expr();
      expect(')');
      return e;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return number();
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') return identifier();
    throw ParseError("unexpected '" + std::string(1, c) + "'", pos_);
  }

  ExprNodePtr number() {
    const std::size_t start = pos_;
    auto digits = [&] {
      while (pos_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[pos_]))) ++pos_;
    };
    digits();
    if (pos_ < s_.size() && s_[pos_] == '.') {
      ++pos_;
      digits();
    }
    if (pos_ < s_.size() && (s_[pos_] == 'e' || s_[pos_] == 'E')) {
      std::size_t save = pos_++;
      if (pos_ < s_.size() && (s_[pos_] == '+' || s_[pos_] == '-')) ++pos_;
      const std::size_t exp_digits = pos_;
      digits();
      if (pos_ == exp_digits) pos_ = save;  // not an exponent after all
    }
    double value = 0.0;
    auto [p, ec] = std::from_chars(s_.data() + start, s_.data() + pos_, value);
    if (ec != std::errc{} || p != s_.data() + pos_) throw ParseError("malformed number", start);
    return ExprNode::constant(value);
  }

  ExprNodePtr identifier() {
    const std::size_t start = pos_;
    while (pos_ < s_.size() &&
           (std::isalnum(static_cast<unsigned char>(s_[pos_])) || s_[pos_] == '_')) {
      ++pos_;
    }
    const std::string name(s_.substr(start, pos_ - start));
    skip_ws();
    if (pos_ < s_.size() && s_[pos_] == '(') {
      static const std::map<std::string, Func> funcs = {
          {"sin", Func::Sin},   {"cos", Func::Cos}, {"tan", Func::Tan}, {"sinh", Func::Sinh},
          {"cosh", Func::Cosh}, {"exp", Func::Exp}, {"log", Func::Log}, {"sqrt", Func::Sqrt}};
      auto it = funcs.find(name);
      if (it == funcs.end()) throw ParseError("unknown function '" + name + "'", start);
      ++pos_;
      auto arg = expr();
      expect(')');
      return ExprNode::unary(it->second, arg);
    }
    auto it = std::find(vars_.begin(), vars_.end(), name);
    if (it == vars_.end()) throw ParseError("unknown identifier '" + name + "'", start);
    return ExprNode::variable(static_cast<std::size_t>(it - vars_.begin()));
  }

  std::string_view s_;
  const std::vector<std::string>& vars_;
  std::size_t pos_ = 0;
};

}  // namespace detail

/// Immutable parsed expression over a declared, ordered variable list.
class Expr {
 public:
  Expr() : root_(ExprNode::constant(0.0)) {}
  Expr(ExprNodePtr root, std::vector<std::string> variables)
      : root_(std::move(root)), vars_(std::move(variables)) {}

  const ExprNode& root() const { return *root_; }
  const std::vector<std::string>& variables() const { return vars_; }

  /// Evaluates with `values[k]` bound to variables()[k].
  template <class T>
  T evaluate(std::span<const T> values) const {
    if (values.size() < vars_.size()) throw Error("too few variable values for expression");
    return detail::eval_node<T>(*root_, values, vars_);
  }

  template <class T>
  T evaluate(std::initializer_list<T> values) const {
    return evaluate<T>(std::span<const T>(values.begin(), values.size()));
  }

  double eval(const std::map<std::string, double>& env) const {
    std::vector<double> values(vars_.size(), 0.0);
    std::vector<bool> used(vars_.size(), false);
    detail::collect_vars(*root_, used);
    for (std::size_t k = 0; k < vars_.size(); ++k) {
      auto it = env.find(vars_[k]);
      if (it != env.end()) {
        values[k] = it->second;
      } else if (used[k]) {
        throw Error("variable '" + vars_[k] + "' is not bound");
      }
    }
    return evaluate<double>(std::span<const double>(values));
  }

  bool uses(Func f) const { return detail::uses_function(*root_, f); }

  std::vector<std::string> free_variables() const {
    std::vector<bool> used(vars_.size(), false);
    detail::collect_vars(*root_, used);
    std::vector<std::string> out;
    for (std::size_t k = 0; k < vars_.size(); ++k) {
      if (used[k]) out.push_back(vars_[k]);
    }
    return out;
  }

  /// Canonical, fully parenthesized text that parses back to the same tree.
  std::string to_string() const { return detail::print_node(*root_, vars_); }

 private:
  ExprNodePtr root_;
  std::vector<std::string> vars_;
};

inline Expr parse_expr(std::string_view text, const std::vector<std::string>& variables) {
  detail::Parser p(text, variables);
  return Expr(p.parse(), variables);
}

}  // namespace bjorling
