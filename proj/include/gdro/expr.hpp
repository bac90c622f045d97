#ifndef GDRO_EXPR_HPP
#define GDRO_EXPR_HPP

#include <array>
#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace gdro {

/// Closed-form coefficient expressions over the variables t, x, y, z.
///
/// Grammar (all binary operators left-associative):
///
///   expr    := term (('+' | '-') term)*
///   term    := unary (('*' | '/') unary)*
///   unary   := '-' unary | power
///   power   := primary ('^' integer-literal)*
///   primary := number | variable | call | '(' expr ')'
///   call    := name '(' expr (',' expr)* ')'
///
/// `pow(a, k)` is accepted as a call spelling of `a ^ k`. Exponents must be
/// non-negative integer literals so evaluation stays total.

enum class Var : std::uint8_t { t = 0, x = 1, y = 2, z = 3 };

enum class Op : std::uint8_t {
    literal,
    variable,
    negate,
    add,
    sub,
    mul,
    div,
    pow,
    min,
    max,
    abs,
    exp,
    log,
    sin,
    cos,
    sqrt,
    pos,
    neg,
};

struct ExprNode {
    Op op = Op::literal;
    double value = 0.0;     // literal value, or exponent for Op::pow
    Var var = Var::t;       // Op::variable
    std::int32_t lhs = -1;  // child indices into the owning node array
    std::int32_t rhs = -1;
};

/// Raised by parse_expr. `offset` is the byte offset into the source.
class ParseError : public std::runtime_error {
public:
    enum class Kind { syntax, unknown_identifier };
    ParseError(Kind kind, std::size_t offset, const std::string& what);
    Kind kind() const noexcept { return kind_; }
    std::size_t offset() const noexcept { return offset_; }

private:
    Kind kind_;
    std::size_t offset_;
};

/// Raised by Expression::eval.
class EvalError : public std::runtime_error {
public:
    enum class Kind { unbound_variable, division_by_zero, log_domain, sqrt_domain };
    EvalError(Kind kind, std::string node, const std::string& what);
    Kind kind() const noexcept { return kind_; }
    /// Pretty-printed offending sub-expression.
    const std::string& node() const noexcept { return node_; }

private:
    Kind kind_;
    std::string node_;
};

/// Variable bindings. Unset variables are unbound.
class Bindings {
public:
    Bindings() = default;
    Bindings& set(Var v, double value) {
        values_[index(v)] = value;
        bound_ |= static_cast<std::uint8_t>(1u << index(v));
        return *this;
    }
    bool bound(Var v) const { return (bound_ >> index(v)) & 1u; }
    double get(Var v) const { return values_[index(v)]; }

    static Bindings tx(double t, double x) { return Bindings{}.set(Var::t, t).set(Var::x, x); }
    static Bindings txyz(double t, double x, double y, double z) {
        return Bindings{}.set(Var::t, t).set(Var::x, x).set(Var::y, y).set(Var::z, z);
    }

private:
    static std::size_t index(Var v) { return static_cast<std::size_t>(v); }
    std::array<double, 4> values_{};
    std::uint8_t bound_ = 0;
};

/// Immutable parsed expression. Copies share nothing mutable; eval is const
/// and safe to call concurrently.
class Expression {
public:
    Expression() = default;

    double eval(const Bindings& b) const;
    double operator()(const Bindings& b) const { return eval(b); }

    /// Fully parenthesised rendering that parses back to the same tree.
    std::string to_string() const;

    bool depends_on(Var v) const;
    bool empty() const { return nodes_.empty(); }

    /// Original source text (empty for programmatically built expressions).
    const std::string& source() const { return source_; }

    const std::vector<ExprNode>& nodes() const { return nodes_; }
    std::int32_t root() const { return root_; }

    /// Structural equality of the trees (literal values compared exactly).
    friend bool structurally_equal(const Expression& a, const Expression& b);

    /// Builders used by the parser and by property-test generators.
    static Expression from_nodes(std::vector<ExprNode> nodes, std::int32_t root,
                                 std::string source = {});

private:
    double eval_node(std::int32_t i, const Bindings& b) const;
    void print_node(std::int32_t i, std::string& out) const;

    std::vector<ExprNode> nodes_;
    std::int32_t root_ = -1;
    std::string source_;
};

Expression parse_expr(std::string_view source);

/// Convenience: parse then evaluate.
inline double eval_expr(const Expression& e, const Bindings& b) { return e.eval(b); }

std::string_view op_name(Op op);

}  // namespace gdro

#endif  // GDRO_EXPR_HPP
