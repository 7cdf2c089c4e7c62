#pragma once

#include <cmath>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "lsr/errors.hpp"
#include "lsr/norms.hpp"

// Component-wise expression language for user-defined maps Phi(x, lambda).
//
//   list    := expr (';' expr)* [';']
//   expr    := term (('+' | '-') term)*
//   term    := unary (('*' | '/') unary)*
//   unary   := '-' unary | '+' unary | power
//   power   := primary ['^' integer]
//   primary := number | identifier | function '(' expr [',' expr] ')' | '(' expr ')'
//
// Identifiers are x1..xn (state) and l1..lm (parameters) unless a custom
// variable table is supplied. Functions: tanh sech sin cos exp log sqrt abs
// (one argument) and min max (two arguments). Exponents must be nonnegative
// integer literals.
namespace lsr::expr {

enum class NodeKind { Constant, Variable, Unary, Binary };
enum class UnaryOp { Neg, Tanh, Sech, Sin, Cos, Exp, Log, Sqrt, Abs };
enum class BinaryOp { Add, Sub, Mul, Div, Pow, Min, Max };

struct Node {
  NodeKind kind = NodeKind::Constant;
  double value = 0.0;  ///< constant value, or the exponent for Pow
  int slot = -1;       ///< variable slot
  UnaryOp unary = UnaryOp::Neg;
  BinaryOp binary = BinaryOp::Add;
  int lhs = -1;
  int rhs = -1;

  bool operator==(const Node&) const = default;
};

/// Immutable expression tree stored in post-order (children precede their
/// parent, root last). Evaluation scratch space is bounded by node count.
class Ast {
 public:
  Ast() = default;
  explicit Ast(std::vector<Node> nodes) : nodes_(std::move(nodes)) {}

  const std::vector<Node>& nodes() const noexcept { return nodes_; }
  int root() const noexcept { return static_cast<int>(nodes_.size()) - 1; }
  std::size_t size() const noexcept { return nodes_.size(); }

  bool operator==(const Ast&) const = default;

 private:
  std::vector<Node> nodes_;
};

/// Names for variable slots. Slots [0, n_state) are state variables, the
/// remainder parameters.
struct Variables {
  std::vector<std::string> names;
  int n_state = 0;

  int size() const noexcept { return static_cast<int>(names.size()); }
};

/// x1..xn followed by l1..lm.
Variables state_and_parameters(int n, int m);

class ParseFailure : public Error {
 public:
  ParseFailure(int line, int column, std::vector<std::string> expected, const std::string& message);

  int line() const noexcept { return line_; }
  int column() const noexcept { return column_; }
  const std::vector<std::string>& expected() const noexcept { return expected_; }

 private:
  int line_;
  int column_;
  std::vector<std::string> expected_;
};

/// One AST per ';'-separated component. ArityError unless exactly n
/// components are present.
std::vector<Ast> parse(std::string_view source, int n, int m);

std::vector<Ast> parse_list(std::string_view source, const Variables& vars);
Ast parse_single(std::string_view source, const Variables& vars);

/// Fully parenthesised text that parses back to an identical tree.
std::string to_string(const Ast& ast, const Variables& vars);

/// Value-only evaluation; `values` is indexed by slot. DomainError for log of
/// a nonpositive number, sqrt of a negative number and division by zero.
double evaluate(const Ast& ast, std::span<const double> values);

/// Forward-mode number: value plus gradient with respect to every slot.
struct DualVector {
  double value = 0.0;
  Vector partials;
};

/// Value and gradient of one expression at `values`. Besides the value-mode
/// domain errors, rejects points within 1e-12 of a kink (abs, min, max) and
/// sqrt at 0, where the derivative does not exist.
DualVector eval_dual(const Ast& ast, std::span<const double> values);

struct DualEvaluation {
  Vector value;       ///< Phi(x, lambda)
  Matrix jac_x;       ///< n x n
  Matrix jac_lambda;  ///< n x m
};

/// Phi and both Jacobians in one forward sweep per component.
DualEvaluation eval_dual(const std::vector<Ast>& components, const Vector& x, const Vector& lambda);

/// 1 / cosh(z).
inline double sech(double z) { return 1.0 / std::cosh(z); }

/// Largest variable slot referenced, or -1.
int max_slot(const Ast& ast) noexcept;

}  // namespace lsr::expr
