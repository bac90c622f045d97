#include "gdro/expr.hpp"

#include <cctype>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <utility>

namespace gdro {

ParseError::ParseError(Kind kind, std::size_t offset, const std::string& what)
    : std::runtime_error(what + " at offset " + std::to_string(offset)), kind_(kind), offset_(offset) {}

EvalError::EvalError(Kind kind, std::string node, const std::string& what)
    : std::runtime_error(what + " in '" + node + "'"), kind_(kind), node_(std::move(node)) {}

std::string_view op_name(Op op) {
    switch (op) {
        case Op::literal: return "literal";
        case Op::variable: return "variable";
        case Op::negate: return "-";
        case Op::add: return "+";
        case Op::sub: return "-";
        case Op::mul: return "*";
        case Op::div: return "/";
        case Op::pow: return "pow";
        case Op::min: return "min";
        case Op::max: return "max";
        case Op::abs: return "abs";
        case Op::exp: return "exp";
        case Op::log: return "log";
        case Op::sin: return "sin";
        case Op::cos: return "cos";
        case Op::sqrt: return "sqrt";
        case Op::pos: return "pos";
        case Op::neg: return "neg";
    }
    return "?";
}

namespace {

constexpr double kMaxExponent = 64.0;

struct Token {
    enum Kind { number, ident, plus, minus, star, slash, caret, lparen, rparen, comma, end } kind;
    std::size_t offset;
    std::string_view text;
    double value = 0.0;
};

class Lexer {
public:
    explicit Lexer(std::string_view src) : src_(src) {}

    std::vector<Token> run() {
        std::vector<Token> out;
        for (;;) {
            while (pos_ < src_.size() && std::isspace(static_cast<unsigned char>(src_[pos_]))) ++pos_;
            if (pos_ >= src_.size()) {
                out.push_back({Token::end, pos_, {}});
                return out;
            }
            const char c = src_[pos_];
            const std::size_t start = pos_;
            if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
                out.push_back(number());
                continue;
            }
            if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
                while (pos_ < src_.size() &&
                       (std::isalnum(static_cast<unsigned char>(src_[pos_])) || src_[pos_] == '_'))
                    ++pos_;
                out.push_back({Token::ident, start, src_.substr(start, pos_ - start)});
                continue;
            }
            Token::Kind k;
            switch (c) {
                case '+': k = Token::plus; break;
                case '-': k = Token::minus; break;
                case '*': k = Token::star; break;
                case '/': k = Token::slash; break;
                case '^': k = Token::caret; break;
                case '(': k = Token::lparen; break;
                case ')': k = Token::rparen; break;
                case ',': k = Token::comma; break;
                default:
                    throw ParseError(ParseError::Kind::syntax, start,
                                     std::string("unexpected character '") + c + "'");
            }
            ++pos_;
            out.push_back({k, start, src_.substr(start, 1)});
        }
    }

private:
    Token number() {
        const std::size_t start = pos_;
        std::size_t digits = 0;
        while (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_]))) ++pos_, ++digits;
        if (pos_ < src_.size() && src_[pos_] == '.') {
            ++pos_;
            while (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_]))) ++pos_, ++digits;
        }
        if (digits == 0) throw ParseError(ParseError::Kind::syntax, start, "malformed number");
        if (pos_ < src_.size() && (src_[pos_] == 'e' || src_[pos_] == 'E')) {
            std::size_t p = pos_ + 1;
            if (p < src_.size() && (src_[p] == '+' || src_[p] == '-')) ++p;
            std::size_t exp_digits = 0;
            while (p < src_.size() && std::isdigit(static_cast<unsigned char>(src_[p]))) ++p, ++exp_digits;
            if (exp_digits == 0) throw ParseError(ParseError::Kind::syntax, pos_, "malformed exponent");
            pos_ = p;
        }
        if (pos_ < src_.size() && (std::isalpha(static_cast<unsigned char>(src_[pos_])) || src_[pos_] == '_'))
            throw ParseError(ParseError::Kind::syntax, pos_, "malformed number");
        const std::string text(src_.substr(start, pos_ - start));
        Token tok{Token::number, start, src_.substr(start, pos_ - start)};
        tok.value = std::strtod(text.c_str(), nullptr);
        return tok;
    }

    std::string_view src_;
    std::size_t pos_ = 0;
};

struct FunctionInfo {
    std::string_view name;
    Op op;
    int arity;
};

constexpr FunctionInfo kFunctions[] = {
    {"min", Op::min, 2},   {"max", Op::max, 2},   {"abs", Op::abs, 1}, {"exp", Op::exp, 1},
    {"log", Op::log, 1},   {"sin", Op::sin, 1},   {"cos", Op::cos, 1}, {"sqrt", Op::sqrt, 1},
    {"pos", Op::pos, 1},   {"neg", Op::neg, 1},   {"pow", Op::pow, 2},
};

class Parser {
public:
    Parser(std::string_view src, std::vector<Token> toks) : src_(src), toks_(std::move(toks)) {}

    Expression run() {
        const std::int32_t root = expr();
        if (peek().kind != Token::end) syntax(peek(), "unexpected token '" + std::string(peek().text) + "'");
        return Expression::from_nodes(std::move(nodes_), root, std::string(src_));
    }

private:
    const Token& peek() const { return toks_[pos_]; }
    const Token& take() { return toks_[pos_++]; }

    [[noreturn]] void syntax(const Token& t, const std::string& msg) {
        throw ParseError(ParseError::Kind::syntax, t.offset,
                         t.kind == Token::end ? "unexpected end of input" : msg);
    }

    std::int32_t push(ExprNode n) {
        nodes_.push_back(n);
        return static_cast<std::int32_t>(nodes_.size() - 1);
    }

    std::int32_t binary(Op op, std::int32_t a, std::int32_t b) {
        ExprNode n;
        n.op = op;
        n.lhs = a;
        n.rhs = b;
        return push(n);
    }

    std::int32_t expr() {
        std::int32_t lhs = term();
        while (peek().kind == Token::plus || peek().kind == Token::minus) {
            const Op op = take().kind == Token::plus ? Op::add : Op::sub;
            lhs = binary(op, lhs, term());
        }
        return lhs;
    }

    std::int32_t term() {
        std::int32_t lhs = unary();
        while (peek().kind == Token::star || peek().kind == Token::slash) {
            const Op op = take().kind == Token::star ? Op::mul : Op::div;
            lhs = binary(op, lhs, unary());
        }
        return lhs;
    }

    std::int32_t unary() {
        if (peek().kind == Token::minus) {
            take();
            ExprNode n;
            n.op = Op::negate;
            n.lhs = unary();
            return push(n);
        }
        return power();
    }

    std::int32_t power() {
        std::int32_t base = primary();
        while (peek().kind == Token::caret) {
            take();
            const Token& at = peek();
            const std::int32_t e = primary();
            base = make_pow(base, e, at);
        }
        return base;
    }

    std::int32_t make_pow(std::int32_t base, std::int32_t exponent, const Token& at) {
        const ExprNode& e = nodes_[static_cast<std::size_t>(exponent)];
        if (e.op != Op::literal || e.value < 0.0 || e.value != std::floor(e.value) || e.value > kMaxExponent)
            syntax(at, "exponent must be a non-negative integer literal");
        ExprNode n;
        n.op = Op::pow;
        n.lhs = base;
        n.value = e.value;
        nodes_.pop_back();  // the exponent literal was the last node pushed
        return push(n);
    }

    std::int32_t primary() {
        const Token& t = peek();
        switch (t.kind) {
            case Token::number: {
                take();
                ExprNode n;
                n.value = t.value;
                return push(n);
            }
            case Token::lparen: {
                take();
                const std::int32_t inner = expr();
                if (peek().kind != Token::rparen) syntax(peek(), "expected ')'");
                take();
                return inner;
            }
            case Token::ident: return identifier();
            default: syntax(t, "unexpected token '" + std::string(t.text) + "'");
        }
    }

    std::int32_t identifier() {
        const Token& t = take();
        if (t.text.size() == 1 && peek().kind != Token::lparen) {
            ExprNode n;
            n.op = Op::variable;
            switch (t.text[0]) {
                case 't': n.var = Var::t; return push(n);
                case 'x': n.var = Var::x; return push(n);
                case 'y': n.var = Var::y; return push(n);
                case 'z': n.var = Var::z; return push(n);
                default: break;
            }
        }
        const FunctionInfo* fn = nullptr;
        for (const auto& f : kFunctions)
            if (f.name == t.text) fn = &f;
        if (fn == nullptr || peek().kind != Token::lparen)
            throw ParseError(ParseError::Kind::unknown_identifier, t.offset,
                             "unknown identifier '" + std::string(t.text) +
                                 "' (variables: t x y z; functions: min max abs exp log sin cos sqrt "
                                 "pos neg pow)");
        take();  // '('
        std::int32_t args[2] = {-1, -1};
        const Token* arg_tokens[2] = {nullptr, nullptr};
        for (int k = 0; k < fn->arity; ++k) {
            if (k > 0) {
                if (peek().kind != Token::comma) syntax(peek(), "expected ','");
                take();
            }
            arg_tokens[k] = &peek();
            args[k] = expr();
        }
        if (peek().kind != Token::rparen) syntax(peek(), "expected ')'");
        take();
        if (fn->op == Op::pow) {
            // The exponent expression must have been the last node pushed.
            if (args[1] != static_cast<std::int32_t>(nodes_.size() - 1) ||
                nodes_.back().op != Op::literal)
                syntax(*arg_tokens[1], "exponent must be a non-negative integer literal");
            return make_pow(args[0], args[1], *arg_tokens[1]);
        }
        ExprNode n;
        n.op = fn->op;
        n.lhs = args[0];
        n.rhs = args[1];
        return push(n);
    }

    std::string_view src_;
    std::vector<Token> toks_;
    std::size_t pos_ = 0;
    std::vector<ExprNode> nodes_;
};

double int_pow(double base, int k) {
    double result = 1.0;
    while (k > 0) {
        if (k & 1) result *= base;
        base *= base;
        k >>= 1;
    }
    return result;
}

bool nodes_equal(const Expression& a, std::int32_t i, const Expression& b, std::int32_t j) {
    if ((i < 0) != (j < 0)) return false;
    if (i < 0) return true;
    const ExprNode& p = a.nodes()[static_cast<std::size_t>(i)];
    const ExprNode& q = b.nodes()[static_cast<std::size_t>(j)];
    if (p.op != q.op) return false;
    if (p.op == Op::literal || p.op == Op::pow)
        if (p.value != q.value) return false;
    if (p.op == Op::variable && p.var != q.var) return false;
    return nodes_equal(a, p.lhs, b, q.lhs) && nodes_equal(a, p.rhs, b, q.rhs);
}

}  // namespace

Expression Expression::from_nodes(std::vector<ExprNode> nodes, std::int32_t root, std::string source) {
    Expression e;
    e.nodes_ = std::move(nodes);
    e.root_ = root;
    e.source_ = std::move(source);
    return e;
}

Expression parse_expr(std::string_view source) {
    Lexer lex(source);
    auto toks = lex.run();
    if (toks.size() == 1) throw ParseError(ParseError::Kind::syntax, 0, "empty expression");
    return Parser(source, std::move(toks)).run();
}

double Expression::eval(const Bindings& b) const {
    if (root_ < 0) throw std::logic_error("evaluating an empty expression");
    return eval_node(root_, b);
}

double Expression::eval_node(std::int32_t i, const Bindings& b) const {
    const ExprNode& n = nodes_[static_cast<std::size_t>(i)];
    auto fail = [&](EvalError::Kind k, const char* what) -> double {
        std::string text;
        print_node(i, text);
        throw EvalError(k, text, what);
    };
    switch (n.op) {
        case Op::literal: return n.value;
        case Op::variable:
            if (!b.bound(n.var)) return fail(EvalError::Kind::unbound_variable, "unbound variable");
            return b.get(n.var);
        case Op::negate: return -eval_node(n.lhs, b);
        case Op::add: return eval_node(n.lhs, b) + eval_node(n.rhs, b);
        case Op::sub: return eval_node(n.lhs, b) - eval_node(n.rhs, b);
        case Op::mul: return eval_node(n.lhs, b) * eval_node(n.rhs, b);
        case Op::div: {
            const double num = eval_node(n.lhs, b);
            const double den = eval_node(n.rhs, b);
            if (den == 0.0) return fail(EvalError::Kind::division_by_zero, "division by zero");
            return num / den;
        }
        case Op::pow: return int_pow(eval_node(n.lhs, b), static_cast<int>(n.value));
        case Op::min: return std::min(eval_node(n.lhs, b), eval_node(n.rhs, b));
        case Op::max: return std::max(eval_node(n.lhs, b), eval_node(n.rhs, b));
        case Op::abs: return std::abs(eval_node(n.lhs, b));
        case Op::exp: return std::exp(eval_node(n.lhs, b));
        case Op::log: {
            const double a = eval_node(n.lhs, b);
            if (!(a > 0.0)) return fail(EvalError::Kind::log_domain, "log of non-positive value");
            return std::log(a);
        }
        case Op::sin: return std::sin(eval_node(n.lhs, b));
        case Op::cos: return std::cos(eval_node(n.lhs, b));
        case Op::sqrt: {
            const double a = eval_node(n.lhs, b);
            if (a < 0.0) return fail(EvalError::Kind::sqrt_domain, "sqrt of negative value");
            return std::sqrt(a);
        }
        case Op::pos: return std::max(eval_node(n.lhs, b), 0.0);
        case Op::neg: return std::max(-eval_node(n.lhs, b), 0.0);
    }
    return 0.0;
}

std::string Expression::to_string() const {
    std::string out;
    if (root_ >= 0) print_node(root_, out);
    return out;
}

void Expression::print_node(std::int32_t i, std::string& out) const {
    const ExprNode& n = nodes_[static_cast<std::size_t>(i)];
    switch (n.op) {
        case Op::literal: {
            char buf[32];
            std::snprintf(buf, sizeof buf, "%.17g", n.value);
            out += buf;
            return;
        }
        case Op::variable: out += "txyz"[static_cast<int>(n.var)]; return;
        case Op::negate:
            out += "(-";
            print_node(n.lhs, out);
            out += ')';
            return;
        case Op::add:
        case Op::sub:
        case Op::mul:
        case Op::div:
            out += '(';
            print_node(n.lhs, out);
            out += ' ';
            out += op_name(n.op);
            out += ' ';
            print_node(n.rhs, out);
            out += ')';
            return;
        case Op::pow:
            out += '(';
            print_node(n.lhs, out);
            out += '^';
            out += std::to_string(static_cast<int>(n.value));
            out += ')';
            return;
        default:
            out += op_name(n.op);
            out += '(';
            print_node(n.lhs, out);
            if (n.rhs >= 0) {
                out += ", ";
                print_node(n.rhs, out);
            }
            out += ')';
            return;
    }
}

bool Expression::depends_on(Var v) const {
    for (const auto& n : nodes_)
        if (n.op == Op::variable && n.var == v) return true;
    return false;
}

bool structurally_equal(const Expression& a, const Expression& b) {
    return nodes_equal(a, a.root_, b, b.root_);
}

}  // namespace gdro
