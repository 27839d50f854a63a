#pragma once
// Closed-form perturbation functions F(tau, th1, th1d, th2, th2d) given as text.

#include <array>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <memory>
#include <string>
#include <string_view>
#include <utility>
#include <variant>

#include "pendavg/constants.hpp"
#include "pendavg/error.hpp"

namespace pendavg::expr {

enum class Var : std::uint8_t { Tau, Th1, Th1d, Th2, Th2d };
enum class Const : std::uint8_t { Pi, W1, W2 };
enum class Func : std::uint8_t { Sin, Cos, Sqrt, Exp, Abs };
enum class BinOp : char { Add = '+', Sub = '-', Mul = '*', Div = '/' };

inline constexpr std::array<std::string_view, 5> kVarNames{"tau", "th1", "th1d", "th2", "th2d"};
inline constexpr std::array<std::string_view, 3> kConstNames{"pi", "w1", "w2"};
inline constexpr std::array<std::string_view, 5> kFuncNames{"sin", "cos", "sqrt", "exp", "abs"};

inline double constant_value(Const c) {
  switch (c) {
    case Const::Pi: return constants::pi;
    case Const::W1: return constants::omega1;
    case Const::W2: return constants::omega2;
  }
  return 0.0;
}

/// Arguments of a perturbation function.
struct EvalEnv {
  double tau = 0.0;
  double th1 = 0.0;
  double th1d = 0.0;
  double th2 = 0.0;
  double th2d = 0.0;

  double get(Var v) const {
    switch (v) {
      case Var::Tau: return tau;
      case Var::Th1: return th1;
      case Var::Th1d: return th1d;
      case Var::Th2: return th2;
      case Var::Th2d: return th2d;
    }
    return 0.0;
  }

  bool finite() const {
    return std::isfinite(tau) && std::isfinite(th1) && std::isfinite(th1d) &&
           std::isfinite(th2) && std::isfinite(th2d);
  }
};

struct Node;
using NodePtr = std::shared_ptr<const Node>;

struct Number { double value; };
struct Variable { Var var; };
struct Constant { Const id; };
struct Negate { NodePtr operand; };
struct Binary { BinOp op; NodePtr lhs, rhs; };
// Exponent is always a literal; the parser folds constant exponent subtrees.
struct Power { NodePtr base; double exponent; };
struct Call { Func func; NodePtr arg; };

struct Node {
  std::variant<Number, Variable, Constant, Negate, Binary, Power, Call> data;
};

namespace detail {

inline bool structurally_equal(const Node& a, const Node& b);

inline bool structurally_equal(const NodePtr& a, const NodePtr& b) {
  return structurally_equal(*a, *b);
}

inline bool structurally_equal(const Node& a, const Node& b) {
  if (a.data.index() != b.data.index()) return false;
  return std::visit(
      [&](const auto& x) -> bool {
        using T = std::decay_t<decltype(x)>;
        const auto& y = std::get<T>(b.data);
        if constexpr (std::is_same_v<T, Number>) return x.value == y.value;
        else if constexpr (std::is_same_v<T, Variable>) return x.var == y.var;
        else if constexpr (std::is_same_v<T, Constant>) return x.id == y.id;
        else if constexpr (std::is_same_v<T, Negate>) return structurally_equal(x.operand, y.operand);
        else if constexpr (std::is_same_v<T, Binary>)
          return x.op == y.op && structurally_equal(x.lhs, y.lhs) && structurally_equal(x.rhs, y.rhs);
        else if constexpr (std::is_same_v<T, Power>)
          return x.exponent == y.exponent && structurally_equal(x.base, y.base);
        else return x.func == y.func && structurally_equal(x.arg, y.arg);
      },
      a.data);
}

inline double checked(double v, const char* what) {
  if (!std::isfinite(v)) throw EvalError(std::string("non-finite result in ") + what);
  return v;
}

inline double int_power(double base, long long n) {
  if (n < 0) {
    if (base == 0.0) throw EvalError("division by zero: zero raised to a negative power");
    return 1.0 / int_power(base, -n);
  }
  double result = 1.0;
  while (n > 0) {
    if (n & 1) result *= base;
    base *= base;
    n >>= 1;
  }
  return result;
}

inline double power(double base, double exponent) {
  if (exponent == std::trunc(exponent) && std::abs(exponent) <= 1 << 20) {
    return checked(int_power(base, static_cast<long long>(exponent)), "'^'");
  }
  if (base > 0.0 || (base == 0.0 && exponent > 0.0)) return checked(std::pow(base, exponent), "'^'");
  throw EvalError("real exponent " + std::to_string(exponent) + " applied to non-positive base " +
                  std::to_string(base));
}

inline double eval_node(const Node& node, const EvalEnv& env) {
  return std::visit(
      [&](const auto& n) -> double {
        using T = std::decay_t<decltype(n)>;
        if constexpr (std::is_same_v<T, Number>) {
          return n.value;
        } else if constexpr (std::is_same_v<T, Variable>) {
          return env.get(n.var);
        } else if constexpr (std::is_same_v<T, Constant>) {
          return constant_value(n.id);
        } else if constexpr (std::is_same_v<T, Negate>) {
          return -eval_node(*n.operand, env);
        } else if constexpr (std::is_same_v<T, Binary>) {
          const double l = eval_node(*n.lhs, env);
          const double r = eval_node(*n.rhs, env);
          switch (n.op) {
            case BinOp::Add: return checked(l + r, "'+'");
            case BinOp::Sub: return checked(l - r, "'-'");
            case BinOp::Mul: return checked(l * r, "'*'");
            case BinOp::Div:
              if (r == 0.0) throw EvalError("division by zero");
              return checked(l / r, "'/'");
          }
          return 0.0;
        } else if constexpr (std::is_same_v<T, Power>) {
          return power(eval_node(*n.base, env), n.exponent);
        } else {
          const double x = eval_node(*n.arg, env);
          switch (n.func) {
            case Func::Sin: return std::sin(x);
            case Func::Cos: return std::cos(x);
            case Func::Sqrt:
              if (x < 0.0) throw EvalError("sqrt of negative value " + std::to_string(x));
              return std::sqrt(x);
            case Func::Exp: return checked(std::exp(x), "exp");
            case Func::Abs: return std::abs(x);
          }
          return 0.0;
        }
      },
      node.data);
}

inline std::string format_number(double v) {
  std::array<char, 64> buf{};
  auto [end, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  return std::string(buf.data(), end);
}

inline void print_node(const Node& node, std::string& out) {
  std::visit(
      [&](const auto& n) {
        using T = std::decay_t<decltype(n)>;
        if constexpr (std::is_same_v<T, Number>) {
          out += format_number(n.value);
        } else if constexpr (std::is_same_v<T, Variable>) {
          out += kVarNames[static_cast<std::size_t>(n.var)];
        } else if constexpr (std::is_same_v<T, Constant>) {
          out += kConstNames[static_cast<std::size_t>(n.id)];
        } else if constexpr (std::is_same_v<T, Negate>) {
          out += "(-";
          print_node(*n.operand, out);
          out += ')';
        } else if constexpr (std::is_same_v<T, Binary>) {
          out += '(';
          print_node(*n.lhs, out);
          out += ' ';
          out += static_cast<char>(n.op);
          out += ' ';
          print_node(*n.rhs, out);
          out += ')';
        } else if constexpr (std::is_same_v<T, Power>) {
          out += '(';
          print_node(*n.base, out);
          out += '^';
          out += format_number(n.exponent);
          out += ')';
        } else {
          out += kFuncNames[static_cast<std::size_t>(n.func)];
          out += '(';
          print_node(*n.arg, out);
          out += ')';
        }
      },
      node.data);
}

inline bool has_variables(const Node& node) {
  return std::visit(
      [](const auto& n) -> bool {
        using T = std::decay_t<decltype(n)>;
        if constexpr (std::is_same_v<T, Number> || std::is_same_v<T, Constant>) return false;
        else if constexpr (std::is_same_v<T, Variable>) return true;
        else if constexpr (std::is_same_v<T, Negate>) return has_variables(*n.operand);
        else if constexpr (std::is_same_v<T, Binary>) return has_variables(*n.lhs) || has_variables(*n.rhs);
        else if constexpr (std::is_same_v<T, Power>) return has_variables(*n.base);
        else return has_variables(*n.arg);
      },
      node.data);
}

}  // namespace detail

/// Immutable expression tree. Copies share nodes; evaluation is reentrant.
class Expr {
public:
  Expr() : root_(std::make_shared<const Node>(Node{Number{0.0}})) {}
  explicit Expr(NodePtr root) : root_(std::move(root)) {}

  double eval(const EvalEnv& env) const {
    if (!env.finite()) throw EvalError("non-finite evaluation environment");
    return detail::eval_node(*root_, env);
  }

  /// Fully parenthesized text that reparses to a structurally identical tree.
  std::string to_string() const {
    std::string out;
    detail::print_node(*root_, out);
    return out;
  }

  bool depends_on_state() const { return detail::has_variables(*root_); }
  const Node& root() const { return *root_; }

  friend bool operator==(const Expr& a, const Expr& b) {
    return detail::structurally_equal(a.root_, b.root_);
  }

private:
  NodePtr root_;
};

inline double eval(const Expr& e, const EvalEnv& env) { return e.eval(env); }

namespace detail {

// Recursive descent over
//   expr     := term (('+' | '-') term)*
//   term     := unary (('*' | '/') unary)*
//   unary    := ('-' | '+') unary | power
//   power    := primary ('^' exponent)?
//   exponent := ('-' | '+') exponent | primary ('^' exponent)?
//   primary  := number | name | name '(' expr ')' | '(' expr ')'
class Parser {
public:
  explicit Parser(std::string_view text) : text_(text) {}

  Expr parse() {
    skip_space();
    if (pos_ == text_.size()) throw ParseError("empty expression", pos_);
    NodePtr root = parse_expr();
    skip_space();
    if (pos_ != text_.size()) fail_unexpected();
    return Expr(std::move(root));
  }

private:
  static NodePtr make(auto&& payload) {
    return std::make_shared<const Node>(Node{std::forward<decltype(payload)>(payload)});
  }

  void skip_space() {
    while (pos_ < text_.size() && (text_[pos_] == ' ' || text_[pos_] == '\t' || text_[pos_] == '\n' ||
                                   text_[pos_] == '\r'))
      ++pos_;
  }

  bool accept(char c) {
    skip_space();
    if (pos_ < text_.size() && text_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  char peek() {
    skip_space();
    return pos_ < text_.size() ? text_[pos_] : '\0';
  }

  [[noreturn]] void fail_unexpected() {
    skip_space();
    if (pos_ >= text_.size()) throw ParseError("unexpected end of expression", pos_);
    const char c = text_[pos_];
    if (std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '.')
      throw ParseError(std::string("expected an operator before '") + c +
                           "' (implicit multiplication is not supported)",
                       pos_);
    throw ParseError(std::string("unexpected character '") + c + "'", pos_);
  }

  NodePtr parse_expr() {
    NodePtr lhs = parse_term();
    for (;;) {
      if (accept('+')) lhs = make(Binary{BinOp::Add, lhs, parse_term()});
      else if (accept('-')) lhs = make(Binary{BinOp::Sub, lhs, parse_term()});
      else return lhs;
    }
  }

  NodePtr parse_term() {
    NodePtr lhs = parse_unary();
    for (;;) {
      if (accept('*')) lhs = make(Binary{BinOp::Mul, lhs, parse_unary()});
      else if (accept('/')) lhs = make(Binary{BinOp::Div, lhs, parse_unary()});
      else return lhs;
    }
  }

  NodePtr parse_unary() {
    if (accept('-')) return make(Negate{parse_unary()});
    if (accept('+')) return parse_unary();
    return parse_power();
  }

  NodePtr parse_power() {
    NodePtr base = parse_primary();
    if (!accept('^')) return base;
    const std::size_t at = pos_;
    NodePtr exponent = parse_exponent();
    return make(Power{std::move(base), fold_exponent(*exponent, at)});
  }

  static double fold_exponent(const Node& exponent, std::size_t at) {
    if (has_variables(exponent)) throw ParseError("exponent of '^' must be a constant", at);
    try {
      return eval_node(exponent, EvalEnv{});
    } catch (const EvalError& e) {
      throw ParseError(std::string("invalid exponent: ") + e.what(), at);
    }
  }

  NodePtr parse_exponent() {
    if (accept('-')) return make(Negate{parse_exponent()});
    if (accept('+')) return parse_exponent();
    NodePtr base = parse_primary();
    if (!accept('^')) return base;
    const std::size_t at = pos_;
    NodePtr exponent = parse_exponent();
    return make(Power{std::move(base), fold_exponent(*exponent, at)});
  }

  NodePtr parse_primary() {
    const char c = peek();
    if (c == '(') {
      ++pos_;
      NodePtr inner = parse_expr();
      if (!accept(')')) throw ParseError("expected ')'", pos_);
      return inner;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return parse_number();
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') return parse_name();
    fail_unexpected();
  }

  NodePtr parse_number() {
    const std::size_t start = pos_;
    while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) ++pos_;
    if (pos_ < text_.size() && text_[pos_] == '.') {
      ++pos_;
      while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) ++pos_;
    }
    if (pos_ < text_.size() && (text_[pos_] == 'e' || text_[pos_] == 'E')) {
      std::size_t look = pos_ + 1;
      if (look < text_.size() && (text_[look] == '+' || text_[look] == '-')) ++look;
      if (look < text_.size() && std::isdigit(static_cast<unsigned char>(text_[look]))) {
        pos_ = look;
        while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) ++pos_;
      }
    }
    double value = 0.0;
    auto [ptr, ec] = std::from_chars(text_.data() + start, text_.data() + pos_, value);
    if (ec != std::errc{} || ptr != text_.data() + pos_ || !std::isfinite(value))
      throw ParseError("malformed number '" + std::string(text_.substr(start, pos_ - start)) + "'", start);
    return make(Number{value});
  }

  NodePtr parse_name() {
    const std::size_t start = pos_;
    while (pos_ < text_.size() &&
           (std::isalnum(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '_'))
      ++pos_;
    const std::string_view name = text_.substr(start, pos_ - start);

    for (std::size_t i = 0; i < kFuncNames.size(); ++i) {
      if (name != kFuncNames[i]) continue;
      if (!accept('('))
        throw ParseError("function '" + std::string(name) + "' expects one argument in parentheses", pos_);
      if (peek() == ')') throw ParseError("function '" + std::string(name) + "' expects 1 argument, got 0", pos_);
      NodePtr arg = parse_expr();
      if (peek() == ',')
        throw ParseError("function '" + std::string(name) + "' expects 1 argument, got more", pos_);
      if (!accept(')')) throw ParseError("expected ')'", pos_);
      return make(Call{static_cast<Func>(i), std::move(arg)});
    }

    NodePtr leaf;
    for (std::size_t i = 0; i < kVarNames.size() && !leaf; ++i)
      if (name == kVarNames[i]) leaf = make(Variable{static_cast<Var>(i)});
    for (std::size_t i = 0; i < kConstNames.size() && !leaf; ++i)
      if (name == kConstNames[i]) leaf = make(Constant{static_cast<Const>(i)});
    if (!leaf) throw ParseError("unknown identifier '" + std::string(name) + "'", start);
    if (peek() == '(') throw ParseError("'" + std::string(name) + "' is not a function", pos_);
    return leaf;
  }

  std::string_view text_;
  std::size_t pos_ = 0;
};

}  // namespace detail

/// Parses infix text over tau, th1, th1d, th2, th2d and the constants pi, w1, w2.
/// Throws ParseError carrying the byte offset of the problem.
inline Expr parse(std::string_view text) { return detail::Parser(text).parse(); }

}  // namespace pendavg::expr
