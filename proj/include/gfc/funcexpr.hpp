#pragma once

#include <cstddef>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "gfc/errors.hpp"
#include "gfc/expseries.hpp"

namespace gfc::expr {

enum class NodeKind { Constant, Variable, Add, Sub, Mul, Div, Pow, Neg, Call };

enum class CallFn {
    Exp,
    Sin,
    Cos,
    Sqrt,
    Log,
    H  // gamma-shifted power h(alpha): h_alpha(t) = t^{alpha-1} / Gamma(alpha)
};

struct Node;
using ExprPtr = std::shared_ptr<const Node>;

// Immutable expression tree in the single variable t. Pow exponents and the
// h(alpha) parameter are literal constants, which keeps symbolic derivatives
// closed-form.
struct Node {
    NodeKind kind;
    double value = 0.0;  // Constant: the value; Pow: the exponent; Call H: alpha
    CallFn fn = CallFn::Exp;
    ExprPtr a;  // left / only child
    ExprPtr b;  // right child of binary nodes
};

inline constexpr int kMaxDepth = 64;
inline constexpr std::size_t kMaxNodes = 10000;
inline constexpr int kMaxDerivativeOrder = 8;

// Parse failure with the byte offset and the expected-token description.
class SyntaxError : public Error {
public:
    SyntaxError(std::size_t offset, std::string expected)
        : Error("syntax error at byte " + std::to_string(offset) + ": expected " + expected),
          offset_(offset),
          expected_(std::move(expected)) {}

    std::size_t offset() const { return offset_; }
    const std::string& expected() const { return expected_; }

private:
    std::size_t offset_;
    std::string expected_;
};

// Recursive-descent parser. Grammar (whitespace-insensitive):
//   expr    := term (('+' | '-') term)*
//   term    := unary (('*' | '/') unary)*
//   unary   := '-' unary | power
//   power   := primary ('^' unary)?        -- exponent must be constant
//   primary := NUMBER | 't' | NAME '(' expr ')' | '(' expr ')'
//   NAME    := exp | sin | cos | sqrt | log | h   -- h takes a constant
ExprPtr parse_expr(std::string_view text);

// Arithmetic evaluation at t >= 0. DomainError for log/negative powers at 0,
// division by zero and similar.
double eval_expr(const ExprPtr& ast, double t);

// Exact symbolic derivative of the given order (1..8), simplified by constant
// folding and zero/one elimination. DepthError past the node budget.
ExprPtr diff_expr(const ExprPtr& ast, int order = 1);

// f^(order)(0) estimated from probes at t = 1e-9, 1e-10, 1e-11 with a
// Richardson extrapolation; SingularAtZeroError when the probes disagree by
// more than 1e-6 (relative to max(1, probe scale)) or fail to evaluate.
double value_at_zero(const ExprPtr& ast, int order);

// Prints with minimal parentheses; parse(to_string(ast)) reproduces the tree.
std::string to_string(const ExprPtr& ast);

std::size_t node_count(const ExprPtr& ast);
int depth(const ExprPtr& ast);
bool contains_variable(const ExprPtr& ast);

// A user-supplied function: either a parsed expression (with cached symbolic
// derivatives) or an exact exponent-sum series. Exactly one variant is set.
class FunctionInput {
public:
    static FunctionInput from_expression(std::string_view text);
    static FunctionInput from_ast(ExprPtr ast);
    static FunctionInput from_series(series::ExponentSumSeries s);

    bool is_series() const { return series_.has_value(); }
    const series::ExponentSumSeries& series_value() const;
    const ExprPtr& ast() const;

    // order-th symbolic derivative (0 = the expression itself). Caches; call
    // from a single thread before any concurrent evaluation (construct, then
    // freeze). Expression inputs only.
    ExprPtr derivative(int order) const;

    // Evaluate the function itself (series inputs require t > 0).
    double eval(double t) const;

    // CLI/report label: the expression text or "series(<n> terms)".
    std::string description() const;

private:
    FunctionInput() = default;

    ExprPtr ast_;
    std::optional<series::ExponentSumSeries> series_;
    mutable std::vector<ExprPtr> deriv_cache_;
};

}  // namespace gfc::expr
