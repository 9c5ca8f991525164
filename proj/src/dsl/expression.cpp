#include "carleson/dsl/expression.hpp"

#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>

namespace carleson::dsl {

std::string to_string(const SourcePos& pos) {
  return std::to_string(pos.line) + ":" + std::to_string(pos.column);
}

ParseError::ParseError(SourcePos pos, const std::string& message)
    : Error(to_string(pos) + ": " + message), pos_(pos) {}

EvalError::EvalError(SourcePos pos, const std::string& message)
    : InvalidInstance(to_string(pos) + ": " + message), pos_(pos) {}

ExprPtr Expr::literal(double value, SourcePos pos) {
  auto e = std::make_shared<Expr>();
  e->kind = Kind::number;
  e->value = value;
  e->pos = pos;
  return e;
}

std::string format_number(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

namespace {

bool is_ident_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_'; }

class Parser {
 public:
  Parser(std::string_view text, SourcePos origin) : text_(text), origin_(origin) {}

  ExprPtr parse() {
    auto e = parse_sum();
    skip_space();
    if (i_ < text_.size()) fail(std::string("unexpected '") + text_[i_] + "'");
    return e;
  }

 private:
  std::string_view text_;
  SourcePos origin_;
  std::size_t i_ = 0;

  SourcePos here() const { return {origin_.line, origin_.column + static_cast<int>(i_)}; }
  [[noreturn]] void fail(const std::string& message) const { throw ParseError(here(), message); }

  void skip_space() {
    while (i_ < text_.size() && (text_[i_] == ' ' || text_[i_] == '\t')) ++i_;
  }

  bool accept(char c) {
    skip_space();
    if (i_ < text_.size() && text_[i_] == c) {
      ++i_;
      return true;
    }
    return false;
  }

  static ExprPtr node(Expr::Kind kind, SourcePos pos, ExprPtr lhs, ExprPtr rhs = nullptr) {
    auto e = std::make_shared<Expr>();
    e->kind = kind;
    e->pos = pos;
    e->lhs = std::move(lhs);
    e->rhs = std::move(rhs);
    return e;
  }

  ExprPtr parse_sum() {
    auto lhs = parse_product();
    for (;;) {
      skip_space();
      const SourcePos pos = here();
      if (accept('+'))
        lhs = node(Expr::Kind::add, pos, lhs, parse_product());
      else if (accept('-'))
        lhs = node(Expr::Kind::sub, pos, lhs, parse_product());
      else
        return lhs;
    }
  }

  ExprPtr parse_product() {
    auto lhs = parse_unary();
    for (;;) {
      skip_space();
      const SourcePos pos = here();
      if (accept('*'))
        lhs = node(Expr::Kind::mul, pos, lhs, parse_unary());
      else if (accept('/'))
        lhs = node(Expr::Kind::div, pos, lhs, parse_unary());
      else
        return lhs;
    }
  }

  ExprPtr parse_unary() {
    skip_space();
    const SourcePos pos = here();
    if (accept('-')) return node(Expr::Kind::negate, pos, parse_unary());
    return parse_power();
  }

  // base ^ exponent, right associative; the exponent may carry a sign (2^-n).
  ExprPtr parse_power() {
    auto base = parse_primary();
    skip_space();
    const SourcePos pos = here();
    if (accept('^')) return node(Expr::Kind::pow, pos, base, parse_unary());
    return base;
  }

  ExprPtr parse_primary() {
    skip_space();
    const SourcePos pos = here();
    if (i_ >= text_.size()) fail("expected a value");
    const char c = text_[i_];
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return parse_number();
    if (accept('(')) {
      auto inner = parse_sum();
      if (!accept(')')) fail("expected ')'");
      return inner;
    }
    if (std::isalpha(static_cast<unsigned char>(c))) {
      std::size_t j = i_;
      while (j < text_.size() && is_ident_char(text_[j])) ++j;
      const std::string_view name = text_.substr(i_, j - i_);
      if (name == "n") {
        i_ = j;
        return node(Expr::Kind::variable, pos, nullptr);
      }
      if (name == "i") {
        i_ = j;
        auto e = node(Expr::Kind::imaginary, pos, nullptr);
        std::const_pointer_cast<Expr>(e)->value = 1.0;
        return e;
      }
      if (name == "abs") {
        i_ = j;
        if (!accept('(')) fail("expected '(' after abs");
        auto inner = parse_sum();
        if (!accept(')')) fail("expected ')'");
        return node(Expr::Kind::abs, pos, inner);
      }
      fail("unknown identifier '" + std::string(name) + "'");
    }
    fail(std::string("unexpected '") + c + "'");
  }

  ExprPtr parse_number() {
    const SourcePos pos = here();
    const std::size_t start = i_;
    auto digits = [&] {
      const std::size_t from = i_;
      while (i_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[i_]))) ++i_;
      return i_ - from;
    };
    std::size_t mantissa = digits();
    if (i_ < text_.size() && text_[i_] == '.') {
      ++i_;
      mantissa += digits();
    }
    if (mantissa == 0) throw ParseError(pos, "malformed number");
    if (i_ < text_.size() && (text_[i_] == 'e' || text_[i_] == 'E')) {
      ++i_;
      if (i_ < text_.size() && (text_[i_] == '+' || text_[i_] == '-')) ++i_;
      if (digits() == 0) throw ParseError(pos, "malformed number: exponent has no digits");
    }
    const std::string_view literal = text_.substr(start, i_ - start);
    double value = 0.0;
    const auto [end, ec] = std::from_chars(literal.data(), literal.data() + literal.size(), value);
    if (ec != std::errc() || end != literal.data() + literal.size() || !std::isfinite(value))
      throw ParseError(pos, "malformed number '" + std::string(literal) + "'");

    bool imaginary = false;
    if (i_ < text_.size() && text_[i_] == 'i' && (i_ + 1 >= text_.size() || !is_ident_char(text_[i_ + 1]))) {
      imaginary = true;
      ++i_;
    }
    if (i_ < text_.size() && (is_ident_char(text_[i_]) || text_[i_] == '.'))
      throw ParseError(pos, "malformed number '" + std::string(text_.substr(start, i_ - start + 1)) + "'");
    auto e = Expr::literal(value, pos);
    if (imaginary) std::const_pointer_cast<Expr>(e)->kind = Expr::Kind::imaginary;
    return e;
  }
};

using C = std::complex<double>;

C checked(C value, const Expr& e) {
  if (!std::isfinite(value.real()) || !std::isfinite(value.imag()))
    throw EvalError(e.pos, "result is not finite");
  return value;
}

C integer_power(C base, long long k) {
  C result(1.0);
  for (C b = base; k > 0; k >>= 1, b *= b)
    if (k & 1) result *= b;
  return result;
}

C eval(const Expr& e, std::optional<long> n) {
  switch (e.kind) {
    case Expr::Kind::number:
      return e.value;
    case Expr::Kind::imaginary:
      return {0.0, e.value};
    case Expr::Kind::variable:
      if (!n) throw EvalError(e.pos, "the index n is not defined here");
      return static_cast<double>(*n);
    case Expr::Kind::negate:
      return -eval(*e.lhs, n);
    case Expr::Kind::abs:
      return std::abs(eval(*e.lhs, n));
    case Expr::Kind::add:
      return checked(eval(*e.lhs, n) + eval(*e.rhs, n), e);
    case Expr::Kind::sub:
      return checked(eval(*e.lhs, n) - eval(*e.rhs, n), e);
    case Expr::Kind::mul:
      return checked(eval(*e.lhs, n) * eval(*e.rhs, n), e);
    case Expr::Kind::div: {
      const C num = eval(*e.lhs, n);
      const C den = eval(*e.rhs, n);
      if (den == C(0.0)) throw EvalError(e.pos, "division by zero");
      return checked(num / den, e);
    }
    case Expr::Kind::pow: {
      const C base = eval(*e.lhs, n);
      const C ex = eval(*e.rhs, n);
      if (ex.imag() != 0.0) throw EvalError(e.pos, "exponent must be real");
      const double p = ex.real();
      if (p == std::floor(p) && std::abs(p) <= 1e9) {
        const auto k = static_cast<long long>(p);
        if (k < 0) {
          if (base == C(0.0)) throw EvalError(e.pos, "zero raised to a negative power");
          return checked(C(1.0) / integer_power(base, -k), e);
        }
        return checked(integer_power(base, k), e);
      }
      if (base.imag() != 0.0) throw EvalError(e.pos, "complex base needs an integer exponent");
      if (base.real() < 0.0) throw EvalError(e.pos, "negative base needs an integer exponent");
      if (base.real() == 0.0 && p < 0.0) throw EvalError(e.pos, "zero raised to a negative power");
      return checked(std::pow(base.real(), p), e);
    }
  }
  throw EvalError(e.pos, "unknown expression node");
}

const char* symbol(Expr::Kind kind) {
  switch (kind) {
    case Expr::Kind::add: return " + ";
    case Expr::Kind::sub: return " - ";
    case Expr::Kind::mul: return " * ";
    case Expr::Kind::div: return " / ";
    case Expr::Kind::pow: return "^";
    default: return "";
  }
}

}  // namespace

ExprPtr parse_expression(std::string_view text, SourcePos origin) {
  return Parser(text, origin).parse();
}

std::complex<double> evaluate(const Expr& e, std::optional<long> n) { return eval(e, n); }

bool uses_variable(const Expr& e) {
  if (e.kind == Expr::Kind::variable) return true;
  return (e.lhs && uses_variable(*e.lhs)) || (e.rhs && uses_variable(*e.rhs));
}

std::string print(const Expr& e) {
  switch (e.kind) {
    case Expr::Kind::number:
      return format_number(e.value);
    case Expr::Kind::imaginary:
      return format_number(e.value) + "i";
    case Expr::Kind::variable:
      return "n";
    case Expr::Kind::negate:
      return "(-" + print(*e.lhs) + ")";
    case Expr::Kind::abs:
      return "abs(" + print(*e.lhs) + ")";
    default:
      return "(" + print(*e.lhs) + symbol(e.kind) + print(*e.rhs) + ")";
  }
}

bool structurally_equal(const Expr& a, const Expr& b) {
  if (a.kind != b.kind) return false;
  if ((a.kind == Expr::Kind::number || a.kind == Expr::Kind::imaginary) && a.value != b.value) return false;
  if (static_cast<bool>(a.lhs) != static_cast<bool>(b.lhs) || static_cast<bool>(a.rhs) != static_cast<bool>(b.rhs))
    return false;
  return (!a.lhs || structurally_equal(*a.lhs, *b.lhs)) && (!a.rhs || structurally_equal(*a.rhs, *b.rhs));
}

}  // namespace carleson::dsl
