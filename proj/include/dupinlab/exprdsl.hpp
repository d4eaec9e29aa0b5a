#pragma once

#include <cctype>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "dupinlab/error.hpp"
#include "dupinlab/immersion.hpp"
#include "dupinlab/jet.hpp"

// Small expression language for immersions:
//
//   n=2 on [0,6.283]x[0.1,3]       # header: dimension and parameter box
//   exclude u2 < 0.05              # optional excluded region
//   ; cos(u1)*u2 ; sin(u1)*u2 ; u2^2
//
// Components are separated by ';'. Precedence from tight to loose:
// ^ (integer exponent), unary minus, * /, + -. Binary operators are
// left-associative.

namespace dupinlab::dsl {

enum class Func { Sin, Cos, Sinh, Cosh, Exp, Log, Sqrt };

inline const char* func_name(Func f) {
  switch (f) {
    case Func::Sin: return "sin";
    case Func::Cos: return "cos";
    case Func::Sinh: return "sinh";
    case Func::Cosh: return "cosh";
    case Func::Exp: return "exp";
    case Func::Log: return "log";
    case Func::Sqrt: return "sqrt";
  }
  return "?";
}

struct Expr;
using ExprPtr = std::shared_ptr<const Expr>;

struct Expr {
  enum class Kind { Constant, Param, Add, Sub, Mul, Div, Neg, Call, Pow };
  Kind kind = Kind::Constant;
  double value = 0.0;  // Constant
  int param = 0;       // Param, 0-based
  Func fn = Func::Sin;  // Call
  int exponent = 0;     // Pow
  ExprPtr lhs, rhs;     // operands; unary nodes use lhs

  static ExprPtr constant(double v) {
    auto e = std::make_shared<Expr>();
    e->value = v;
    return e;
  }
  static ExprPtr parameter(int i) {
    auto e = std::make_shared<Expr>();
    e->kind = Kind::Param;
    e->param = i;
    return e;
  }
  static ExprPtr binary(Kind k, ExprPtr a, ExprPtr b) {
    auto e = std::make_shared<Expr>();
    e->kind = k;
    e->lhs = std::move(a);
    e->rhs = std::move(b);
    return e;
  }
  static ExprPtr neg(ExprPtr a) {
    auto e = std::make_shared<Expr>();
    e->kind = Kind::Neg;
    e->lhs = std::move(a);
    return e;
  }
  static ExprPtr call(Func f, ExprPtr a) {
    auto e = std::make_shared<Expr>();
    e->kind = Kind::Call;
    e->fn = f;
    e->lhs = std::move(a);
    return e;
  }
  static ExprPtr power(ExprPtr a, int k) {
    auto e = std::make_shared<Expr>();
    e->kind = Kind::Pow;
    e->exponent = k;
    e->lhs = std::move(a);
    return e;
  }
};

inline bool equal(const ExprPtr& a, const ExprPtr& b) {
  if (!a || !b) return !a && !b;
  if (a->kind != b->kind) return false;
  switch (a->kind) {
    case Expr::Kind::Constant: return a->value == b->value;
    case Expr::Kind::Param: return a->param == b->param;
    case Expr::Kind::Call: return a->fn == b->fn && equal(a->lhs, b->lhs);
    case Expr::Kind::Pow: return a->exponent == b->exponent && equal(a->lhs, b->lhs);
    case Expr::Kind::Neg: return equal(a->lhs, b->lhs);
    default: return equal(a->lhs, b->lhs) && equal(a->rhs, b->rhs);
  }
}

namespace detail {
inline double apply(Func f, double x) {
  switch (f) {
    case Func::Sin: return std::sin(x);
    case Func::Cos: return std::cos(x);
    case Func::Sinh: return std::sinh(x);
    case Func::Cosh: return std::cosh(x);
    case Func::Exp: return std::exp(x);
    case Func::Log:
      if (!(x > 0.0)) throw Error(ErrorCode::DomainError, "log of a non-positive value");
      return std::log(x);
    case Func::Sqrt:
      if (!(x > 0.0)) throw Error(ErrorCode::DomainError, "sqrt of a non-positive value");
      return std::sqrt(x);
  }
  return 0.0;
}
inline Jet apply(Func f, const Jet& x) {
  switch (f) {
    case Func::Sin: return sin(x);
    case Func::Cos: return cos(x);
    case Func::Sinh: return sinh(x);
    case Func::Cosh: return cosh(x);
    case Func::Exp: return exp(x);
    case Func::Log: return log(x);
    case Func::Sqrt: return sqrt(x);
  }
  return x;
}
inline double ipow(double x, int k) {
  if (k < 0) return 1.0 / ipow(x, -k);
  double r = 1.0;
  for (int i = 0; i < k; ++i) r *= x;
  return r;
}
inline Jet ipow(const Jet& x, int k) { return pow(x, k); }
inline double make_const(double v, const double&) { return v; }
inline Jet make_const(double v, const Jet& like) { return Jet::constant(v, like.dim(), like.order()); }
}  // namespace detail

// Evaluate over double or Jet parameters.
template <class T>
T evaluate(const Expr& e, std::span<const T> u) {
  using K = Expr::Kind;
  switch (e.kind) {
    case K::Constant: return detail::make_const(e.value, u[0]);
    case K::Param:
      if (e.param < 0 || e.param >= static_cast<int>(u.size()))
        throw Error(ErrorCode::UnknownIdentifier, "parameter index out of range");
      return u[e.param];
    case K::Add: return evaluate(*e.lhs, u) + evaluate(*e.rhs, u);
    case K::Sub: return evaluate(*e.lhs, u) - evaluate(*e.rhs, u);
    case K::Mul: return evaluate(*e.lhs, u) * evaluate(*e.rhs, u);
    case K::Div: return evaluate(*e.lhs, u) / evaluate(*e.rhs, u);
    case K::Neg: return -evaluate(*e.lhs, u);
    case K::Call: return detail::apply(e.fn, evaluate(*e.lhs, u));
    case K::Pow: return detail::ipow(evaluate(*e.lhs, u), e.exponent);
  }
  return u[0];
}

struct Exclusion {
  ExprPtr expr;
  bool less = true;  // excluded where expr < bound, otherwise expr > bound
  double bound = 0.0;
};

struct ImmersionSpec {
  int n = 0;
  std::vector<Interval> box;
  std::vector<Exclusion> exclusions;
  std::vector<ExprPtr> components;

  bool excluded(std::span<const double> p) const {
    for (const auto& x : exclusions) {
      double v = evaluate<double>(*x.expr, p);
      if (x.less ? v < x.bound : v > x.bound) return true;
    }
    return false;
  }

  Immersion to_immersion(std::string name = "dsl") const {
    Immersion imm;
    imm.name = std::move(name);
    imm.dim_in = n;
    imm.dim_out = static_cast<int>(components.size());
    imm.box = box;
    auto comps = components;
    imm.map = [comps](std::span<const Jet> u) {
      JetVector f;
      for (const auto& c : comps) f.push_back(evaluate<Jet>(*c, u));
      return f;
    };
    if (!exclusions.empty()) {
      auto self = *this;
      imm.excluded = [self](std::span<const double> p) { return self.excluded(p); };
    }
    return imm;
  }
};

inline JetVector eval_jet(const ImmersionSpec& spec, std::span<const double> point, int order) {
  return spec.to_immersion().eval_jet(point, order);
}

namespace detail {

struct Token {
  enum class Type { Number, Ident, Punct, End } type = Type::End;
  std::string text;
  double number = 0.0;
  int line = 1, col = 1;
};

class Lexer {
 public:
  explicit Lexer(const std::string& s) : s_(s) {}

  std::vector<Token> run() {
    std::vector<Token> out;
    for (;;) {
      skip();
      Token t;
      t.line = line_;
      t.col = col_;
      if (i_ >= s_.size()) {
        out.push_back(t);
        return out;
      }
      char c = s_[i_];
      if (std::isdigit(static_cast<unsigned char>(c)) || (c == '.' && i_ + 1 < s_.size() && std::isdigit(static_cast<unsigned char>(s_[i_ + 1])))) {
        std::size_t j = i_;
        while (j < s_.size() && (std::isdigit(static_cast<unsigned char>(s_[j])) || s_[j] == '.')) ++j;
        if (j < s_.size() && (s_[j] == 'e' || s_[j] == 'E')) {
          std::size_t k = j + 1;
          if (k < s_.size() && (s_[k] == '+' || s_[k] == '-')) ++k;
          if (k < s_.size() && std::isdigit(static_cast<unsigned char>(s_[k]))) {
            j = k;
            while (j < s_.size() && std::isdigit(static_cast<unsigned char>(s_[j]))) ++j;
          }
        }
        t.type = Token::Type::Number;
        t.text = s_.substr(i_, j - i_);
        char* end = nullptr;
        t.number = std::strtod(t.text.c_str(), &end);
        if (end != t.text.c_str() + t.text.size()) throw SyntaxError(t.line, t.col, "number");
        advance(j - i_);
      } else if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
        std::size_t j = i_;
        while (j < s_.size() && (std::isalnum(static_cast<unsigned char>(s_[j])) || s_[j] == '_')) ++j;
        t.type = Token::Type::Ident;
        t.text = s_.substr(i_, j - i_);
        advance(j - i_);
      } else if (std::string("+-*/^(),;[]=<>").find(c) != std::string::npos) {
        t.type = Token::Type::Punct;
        t.text = std::string(1, c);
        advance(1);
      } else {
        throw SyntaxError(line_, col_, "a token");
      }
      out.push_back(t);
    }
  }

 private:
  void advance(std::size_t k) {
    for (std::size_t m = 0; m < k; ++m) {
      if (s_[i_] == '\n') {
        ++line_;
        col_ = 1;
      } else {
        ++col_;
      }
      ++i_;
    }
  }
  void skip() {
    while (i_ < s_.size()) {
      if (std::isspace(static_cast<unsigned char>(s_[i_]))) {
        advance(1);
      } else if (s_[i_] == '#') {
        while (i_ < s_.size() && s_[i_] != '\n') advance(1);
      } else {
        break;
      }
    }
  }
  const std::string& s_;
  std::size_t i_ = 0;
  int line_ = 1, col_ = 1;
};

class Parser {
 public:
  explicit Parser(const std::string& src) : toks_(Lexer(src).run()) {}

  ImmersionSpec document() {
    ImmersionSpec spec;
    expect_ident("n");
    expect_punct("=");
    const Token& nt = peek();
    if (nt.type != Token::Type::Number || nt.number != std::floor(nt.number) || nt.number < 1)
      throw SyntaxError(nt.line, nt.col, "positive integer dimension");
    spec.n = static_cast<int>(nt.number);
    n_ = spec.n;
    next();
    expect_ident("on");
    spec.box.push_back(interval());
    while (is_ident("x")) {
      next();
      spec.box.push_back(interval());
    }
    if (spec.box.size() == 1 && spec.n > 1) spec.box.assign(spec.n, spec.box[0]);
    if (static_cast<int>(spec.box.size()) != spec.n)
      throw Error(ErrorCode::ArityError, "box has " + std::to_string(spec.box.size()) + " intervals for n=" + std::to_string(spec.n));
    while (is_ident("exclude")) {
      next();
      Exclusion x;
      x.expr = expr();
      if (is_punct("<")) {
        x.less = true;
      } else if (is_punct(">")) {
        x.less = false;
      } else {
        throw SyntaxError(peek().line, peek().col, "'<' or '>'");
      }
      next();
      x.bound = signed_number();
      spec.exclusions.push_back(x);
    }
    expect_punct(";");
    spec.components.push_back(expr());
    while (is_punct(";")) {
      next();
      if (peek().type == Token::Type::End) break;
      spec.components.push_back(expr());
    }
    if (peek().type != Token::Type::End) throw SyntaxError(peek().line, peek().col, "';' or end of input");
    if (static_cast<int>(spec.components.size()) != spec.n + 1)
      throw Error(ErrorCode::ArityError, "expected " + std::to_string(spec.n + 1) + " components, got " +
                                             std::to_string(spec.components.size()));
    return spec;
  }

  ExprPtr single(int n) {
    n_ = n;
    ExprPtr e = expr();
    if (peek().type != Token::Type::End) throw SyntaxError(peek().line, peek().col, "end of expression");
    return e;
  }

 private:
  const Token& peek() const { return toks_[pos_]; }
  void next() {
    if (pos_ + 1 < toks_.size()) ++pos_;
  }
  bool is_punct(const char* p) const { return peek().type == Token::Type::Punct && peek().text == p; }
  bool is_ident(const char* p) const { return peek().type == Token::Type::Ident && peek().text == p; }
  void expect_punct(const char* p) {
    if (!is_punct(p)) throw SyntaxError(peek().line, peek().col, std::string("'") + p + "'");
    next();
  }
  void expect_ident(const char* p) {
    if (!is_ident(p)) throw SyntaxError(peek().line, peek().col, std::string("'") + p + "'");
    next();
  }
  double signed_number() {
    double s = 1.0;
    if (is_punct("-")) {
      s = -1.0;
      next();
    }
    if (peek().type != Token::Type::Number) throw SyntaxError(peek().line, peek().col, "number");
    double v = s * peek().number;
    next();
    return v;
  }
  Interval interval() {
    expect_punct("[");
    Interval iv;
    iv.lo = signed_number();
    expect_punct(",");
    iv.hi = signed_number();
    expect_punct("]");
    if (!(iv.lo < iv.hi)) throw SyntaxError(peek().line, peek().col, "interval with lo < hi");
    return iv;
  }

  ExprPtr expr() {
    ExprPtr a = term();
    while (is_punct("+") || is_punct("-")) {
      auto k = is_punct("+") ? Expr::Kind::Add : Expr::Kind::Sub;
      next();
      a = Expr::binary(k, a, term());
    }
    return a;
  }
  ExprPtr term() {
    ExprPtr a = unary();
    while (is_punct("*") || is_punct("/")) {
      auto k = is_punct("*") ? Expr::Kind::Mul : Expr::Kind::Div;
      next();
      a = Expr::binary(k, a, unary());
    }
    return a;
  }
  ExprPtr unary() {
    if (is_punct("-")) {
      next();
      return Expr::neg(unary());
    }
    return power();
  }
  ExprPtr power() {
    ExprPtr a = primary();
    while (is_punct("^")) {
      next();
      int sign = 1;
      if (is_punct("-")) {
        sign = -1;
        next();
      }
      const Token& t = peek();
      if (t.type != Token::Type::Number || t.number != std::floor(t.number) || t.text.find_first_of(".eE") != std::string::npos)
        throw SyntaxError(t.line, t.col, "integer exponent");
      a = Expr::power(a, sign * static_cast<int>(t.number));
      next();
    }
    return a;
  }
  ExprPtr primary() {
    const Token t = peek();
    if (t.type == Token::Type::Number) {
      next();
      return Expr::constant(t.number);
    }
    if (is_punct("(")) {
      next();
      ExprPtr e = expr();
      expect_punct(")");
      return e;
    }
    if (t.type == Token::Type::Ident) {
      next();
      static const std::pair<const char*, Func> funcs[] = {
          {"sin", Func::Sin}, {"cos", Func::Cos},   {"sinh", Func::Sinh}, {"cosh", Func::Cosh},
          {"exp", Func::Exp}, {"log", Func::Log}, {"sqrt", Func::Sqrt}};
      for (const auto& [name, f] : funcs) {
        if (t.text != name) continue;
        expect_punct("(");
        ExprPtr arg = expr();
        int count = 1;
        while (is_punct(",")) {
          next();
          expr();
          ++count;
        }
        expect_punct(")");
        if (count != 1)
          throw Error(ErrorCode::ArityError, t.text + " takes 1 argument, got " + std::to_string(count));
        return Expr::call(f, arg);
      }
      if (t.text.size() >= 2 && t.text[0] == 'u' && t.text.find_first_not_of("0123456789", 1) == std::string::npos) {
        int k = std::atoi(t.text.c_str() + 1);
        if (k >= 1 && k <= n_) return Expr::parameter(k - 1);
      }
      throw Error(ErrorCode::UnknownIdentifier, "'" + t.text + "' at line " + std::to_string(t.line) + ", column " +
                                                    std::to_string(t.col));
    }
    throw SyntaxError(t.line, t.col, "number, identifier or '('");
  }

  std::vector<Token> toks_;
  std::size_t pos_ = 0;
  int n_ = 0;
};

inline std::string number(double v) {
  char buf[64];
  for (int prec = 1; prec <= 17; ++prec) {
    std::snprintf(buf, sizeof buf, "%.*g", prec, v);
    if (std::strtod(buf, nullptr) == v) break;
  }
  return buf;
}

inline int level(const Expr& e) {
  switch (e.kind) {
    case Expr::Kind::Add:
    case Expr::Kind::Sub: return 1;
    case Expr::Kind::Mul:
    case Expr::Kind::Div: return 2;
    case Expr::Kind::Neg: return 3;
    case Expr::Kind::Pow: return 4;
    case Expr::Kind::Constant: return e.value < 0 ? 3 : 5;
    default: return 5;
  }
}

inline std::string print(const Expr& e, int need);

inline std::string wrap(const Expr& e, int need) {
  std::string s = print(e, need);
  return level(e) < need ? "(" + s + ")" : s;
}

inline std::string print(const Expr& e, int) {
  using K = Expr::Kind;
  switch (e.kind) {
    case K::Constant: return number(e.value);
    case K::Param: return "u" + std::to_string(e.param + 1);
    case K::Add: return wrap(*e.lhs, 1) + " + " + wrap(*e.rhs, 2);
    case K::Sub: return wrap(*e.lhs, 1) + " - " + wrap(*e.rhs, 2);
    case K::Mul: return wrap(*e.lhs, 2) + "*" + wrap(*e.rhs, 3);
    case K::Div: return wrap(*e.lhs, 2) + "/" + wrap(*e.rhs, 3);
    case K::Neg: return "-" + wrap(*e.lhs, 3);
    case K::Call: return std::string(func_name(e.fn)) + "(" + print(*e.lhs, 0) + ")";
    case K::Pow: return wrap(*e.lhs, 4) + "^" + std::to_string(e.exponent);
  }
  return "";
}

}  // namespace detail

inline ImmersionSpec parse(const std::string& source) { return detail::Parser(source).document(); }

// Parse a bare expression over u1..un.
inline ExprPtr parse_expression(const std::string& source, int n) { return detail::Parser(source).single(n); }

inline std::string to_string(const Expr& e) { return detail::print(e, 0); }

inline std::string to_string(const ImmersionSpec& spec) {
  std::string s = "n=" + std::to_string(spec.n) + " on ";
  for (std::size_t i = 0; i < spec.box.size(); ++i) {
    if (i) s += "x";
    s += "[" + detail::number(spec.box[i].lo) + "," + detail::number(spec.box[i].hi) + "]";
  }
  for (const auto& x : spec.exclusions)
    s += "\nexclude " + to_string(*x.expr) + (x.less ? " < " : " > ") + detail::number(x.bound);
  for (const auto& c : spec.components) s += ";\n" + to_string(*c);
  return s + "\n";
}

inline bool equal(const ImmersionSpec& a, const ImmersionSpec& b) {
  if (a.n != b.n || a.box.size() != b.box.size() || a.components.size() != b.components.size() ||
      a.exclusions.size() != b.exclusions.size())
    return false;
  for (std::size_t i = 0; i < a.box.size(); ++i)
    if (a.box[i].lo != b.box[i].lo || a.box[i].hi != b.box[i].hi) return false;
  for (std::size_t i = 0; i < a.exclusions.size(); ++i)
    if (!equal(a.exclusions[i].expr, b.exclusions[i].expr) || a.exclusions[i].less != b.exclusions[i].less ||
        a.exclusions[i].bound != b.exclusions[i].bound)
      return false;
  for (std::size_t i = 0; i < a.components.size(); ++i)
    if (!equal(a.components[i], b.components[i])) return false;
  return true;
}

}  // namespace dupinlab::dsl
