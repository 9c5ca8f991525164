#pragma once

#include <complex>
#include <memory>
#include <optional>
#include <string>
#include <string_view>

#include "carleson/errors.hpp"

namespace carleson::dsl {

struct SourcePos {
  int line = 1;
  int column = 1;
};

std::string to_string(const SourcePos& pos);

/// Malformed input. Carries the 1-based line and column of the offending text.
class ParseError : public Error {
 public:
  ParseError(SourcePos pos, const std::string& message);
  SourcePos pos() const { return pos_; }

 private:
  SourcePos pos_;
};

/// Arithmetic failure while evaluating a well-formed expression (division by
/// zero, 0^negative, non-finite result, ...).
class EvalError : public InvalidInstance {
 public:
  EvalError(SourcePos pos, const std::string& message);
  SourcePos pos() const { return pos_; }

 private:
  SourcePos pos_;
};

struct Expr;
using ExprPtr = std::shared_ptr<const Expr>;

struct Expr {
  enum class Kind { number, imaginary, variable, negate, add, sub, mul, div, pow, abs };

  Kind kind = Kind::number;
  double value = 0.0;  ///< literal value for number and imaginary
  ExprPtr lhs;         ///< operand of unary nodes, left operand of binary nodes
  ExprPtr rhs;
  SourcePos pos;

  static ExprPtr literal(double value, SourcePos pos = {});
};

/// Parses a complete expression. `origin` is the position of text[0] within
/// the enclosing file, so diagnostics point at the right column.
ExprPtr parse_expression(std::string_view text, SourcePos origin = {});

/// Evaluates at index n. Passing no n makes any use of the variable an error.
std::complex<double> evaluate(const Expr& e, std::optional<long> n = std::nullopt);

bool uses_variable(const Expr& e);

/// Fully parenthesized canonical form; numbers at 17 significant digits.
std::string print(const Expr& e);

/// Equality of the abstract syntax, ignoring source positions.
bool structurally_equal(const Expr& a, const Expr& b);

std::string format_number(double x);

}  // namespace carleson::dsl
