#pragma once

// Arithmetic expressions in the spatial variables x1..xn (n = 2 or 3).
//
// Grammar (recursive descent with precedence climbing):
//
//   expr    := term   (('+' | '-') term)*
//   term    := unary  (('*' | '/') unary)*
//   unary   := ('-' | '+') unary | power
//   power   := primary ('^' unary)?          right-associative
//   primary := number | 'x'k | name '(' expr (',' expr)* ')' | '(' expr ')'
//
// Unary minus binds looser than '^', so "-2^2" evaluates to -4 and
// "2^-1" to 0.5. Functions: sin cos exp log sqrt abs (one argument),
// min max (two arguments).

#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "pxlab/errors.hpp"

namespace pxlab::expr {

enum class BinaryOp { Add, Subtract, Multiply, Divide, Power };
enum class Function { Sin, Cos, Exp, Log, Sqrt, Abs, Min, Max };

struct Node;
using NodePtr = std::shared_ptr<const Node>;

struct Number {
  double value;
};
struct Variable {
  int index;  // zero-based: x1 -> 0
};
struct Negate {
  NodePtr operand;
};
struct Binary {
  BinaryOp op;
  NodePtr lhs;
  NodePtr rhs;
};
struct Call {
  Function function;
  std::vector<NodePtr> args;
};

struct Node {
  std::variant<Number, Variable, Negate, Binary, Call> data;
};

/// Syntax error, unknown identifier or arity mismatch found while parsing.
class ParseError : public Error {
 public:
  ParseError(const std::string& message, std::size_t offset,
             std::vector<std::string> expected = {});
  std::size_t offset() const noexcept { return offset_; }
  const std::vector<std::string>& expected() const noexcept { return expected_; }

 private:
  std::size_t offset_;
  std::vector<std::string> expected_;
};

/// Evaluation hit log/sqrt of an invalid argument, division by zero or a
/// non-finite intermediate.
class DomainError : public Error {
 public:
  DomainError(const std::string& message, std::string subexpression);
  const std::string& subexpression() const noexcept { return subexpression_; }

 private:
  std::string subexpression_;
};

class NotDifferentiable : public Error {
 public:
  using Error::Error;
};

/// Immutable expression tree bound to a spatial dimension.
class Expression {
 public:
  Expression(NodePtr root, int dimension);

  static Expression constant(double value, int dimension);
  static Expression variable(int index, int dimension);

  const NodePtr& root() const noexcept { return root_; }
  int dimension() const noexcept { return dimension_; }

  /// True when the tree is a literal; `value` receives it.
  bool is_constant(double* value = nullptr) const;

 private:
  NodePtr root_;
  int dimension_;
};

Expression parse_expression(std::string_view source, int dimension);

double evaluate(const Expression& e, std::span<const double> point);

/// Exact partial derivative with respect to x_{variable_index + 1}.
/// Rejects trees containing abs, min or max anywhere.
Expression differentiate(const Expression& e, int variable_index);

/// Text form that parses back to an expression with identical values.
std::string to_string(const Expression& e);

// Builders with constant folding and the 0*e, 1*e, e+0 simplifications.
Expression operator+(const Expression& a, const Expression& b);
Expression operator-(const Expression& a, const Expression& b);
Expression operator*(const Expression& a, const Expression& b);
Expression operator/(const Expression& a, const Expression& b);
Expression operator-(const Expression& a);
Expression pow(const Expression& base, const Expression& exponent);
Expression apply(Function f, const Expression& arg);

}  // namespace pxlab::expr
