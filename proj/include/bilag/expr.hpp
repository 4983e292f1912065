#pragma once

#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "bilag/errors.hpp"
#include "bilag/jet.hpp"

namespace bilag {

// A numeric evaluation failure carrying the offending subexpression.
struct EvalError : DomainError {
    using DomainError::DomainError;
};

enum class ExprKind : std::uint8_t { Literal, Variable, Pi, Add, Sub, Mul, Div, Pow, Neg, Call };
enum class Func : std::uint8_t { Sin, Cos, Tan, Exp, Log, Sqrt, Abs };

// Immutable expression AST. Subtrees are shared; nodes never mutate after parse.
struct Expr {
    ExprKind kind;
    double literal = 0.0;     // Literal
    std::string name;         // Variable
    Func func = Func::Sin;    // Call
    std::shared_ptr<const Expr> a, b; // operands (Call and Neg use only a)
    int line = 0, col = 0;
};

using ExprPtr = std::shared_ptr<const Expr>;

// Parses the expression grammar: + - * / ^ (right-associative, binds tighter
// than unary minus), sin cos tan exp log sqrt abs, constant pi, decimal
// literals. Throws ParseError with 1-based line/column.
ExprPtr parse(std::string_view source);

// Minimal-parenthesis rendering; parse(to_string(parse(s))) reproduces the AST.
std::string to_string(const Expr& e);
inline std::string to_string(const ExprPtr& e) { return to_string(*e); }

bool equal(const Expr& a, const Expr& b);

// Free variables in first-appearance order.
std::vector<std::string> variables(const Expr& e);

// Expression bound to an ordered variable list and flattened to a postfix
// program; this is the hot path for flow integration.
class CompiledExpr {
public:
    CompiledExpr() = default;
    // Throws BindError naming any identifier not in `vars`.
    CompiledExpr(ExprPtr ast, std::span<const std::string> vars);

    double operator()(std::span<const double> x) const;
    // Taylor expansion at x, variables seeded in slot order. Order in [0, 4].
    Jet jet(std::span<const double> x, int order) const;
    // Evaluation on caller-seeded jets (used when composing charts).
    Jet jet(std::span<const Jet> x) const;

    const ExprPtr& ast() const { return ast_; }
    int arity() const { return nvars_; }
    bool valid() const { return ast_ != nullptr; }

private:
    struct Op {
        std::uint8_t code = 0;
        double imm = 0.0;
        int slot = 0;
        const Expr* src = nullptr;
    };
    template <class T> T run(std::span<const T> x) const;

    ExprPtr ast_;
    std::vector<Op> ops_;
    int nvars_ = 0;
    int stack_need_ = 0;
};

// Convenience one-shot form of the above.
Jet eval_jet(const Expr& e, std::span<const std::string> vars, std::span<const double> x, int order);
double eval(const Expr& e, std::span<const std::string> vars, std::span<const double> x);

} // namespace bilag
