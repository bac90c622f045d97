#include <doctest.h>

#include "gdro/expr.hpp"

#include <cmath>
#include <random>
#include <string>

using namespace gdro;

namespace {

double at_x(const char* src, double x) { return parse_expr(src).eval(Bindings::tx(0.0, x)); }

// Random source strings over the whole grammar.
std::string random_expr(std::mt19937& rng, int depth) {
    std::uniform_int_distribution<int> pick(0, depth <= 0 ? 2 : 12);
    static const char* vars[] = {"t", "x", "y", "z"};
    static const char* unary[] = {"abs", "exp", "sin", "cos", "pos", "neg", "sqrt", "log"};
    switch (pick(rng)) {
        case 0: return std::to_string(std::uniform_int_distribution<int>(0, 99)(rng));
        case 1: return "2.5e-1";
        case 2: return vars[std::uniform_int_distribution<int>(0, 3)(rng)];
        case 3: return random_expr(rng, depth - 1) + " + " + random_expr(rng, depth - 1);
        case 4: return random_expr(rng, depth - 1) + " - " + random_expr(rng, depth - 1);
        case 5: return random_expr(rng, depth - 1) + "*" + random_expr(rng, depth - 1);
        case 6: return random_expr(rng, depth - 1) + " / " + random_expr(rng, depth - 1);
        case 7: return "-" + random_expr(rng, depth - 1);
        case 8: return "(" + random_expr(rng, depth - 1) + ")^" + std::to_string(rng() % 4);
        case 9: return "min(" + random_expr(rng, depth - 1) + ", " + random_expr(rng, depth - 1) + ")";
        case 10: return "max(" + random_expr(rng, depth - 1) + "," + random_expr(rng, depth - 1) + ")";
        case 11: return "pow(" + random_expr(rng, depth - 1) + ", 2)";
        default: return std::string(unary[rng() % 8]) + "(" + random_expr(rng, depth - 1) + ")";
    }
}

}  // namespace

TEST_SUITE("expr") {

TEST_CASE("spec examples") {
    CHECK(at_x("x*x", 2.0) == 4.0);
    CHECK(at_x("max(1-x,0)", 0.25) == 0.75);
    CHECK(parse_expr("pos(y - 1)").eval(Bindings::txyz(0, 0, 0.4, 0)) == 0.0);

    const Expression sq = parse_expr("x*x");
    REQUIRE(sq.nodes()[sq.root()].op == Op::mul);
    const Expression put = parse_expr("max(1 - x, 0)");
    CHECK(put.nodes()[put.root()].op == Op::max);
    CHECK(put.to_string() == "max((1 - x), 0)");
}

TEST_CASE("syntax error offset") {
    try {
        parse_expr("x +* 2");
        FAIL("expected a parse error");
    } catch (const ParseError& e) {
        CHECK(e.kind() == ParseError::Kind::syntax);
        CHECK(e.offset() == 3);
    }
    CHECK_THROWS_AS(parse_expr(""), ParseError);
    CHECK_THROWS_AS(parse_expr("(x"), ParseError);
    CHECK_THROWS_AS(parse_expr("x 2"), ParseError);
    CHECK_THROWS_AS(parse_expr("x^1.5"), ParseError);
    CHECK_THROWS_AS(parse_expr("x^-1"), ParseError);
    CHECK_THROWS_AS(parse_expr("0x10"), ParseError);
    CHECK_THROWS_AS(parse_expr("1_000"), ParseError);
    try {
        parse_expr("foo(x)");
        FAIL("expected a parse error");
    } catch (const ParseError& e) {
        CHECK(e.kind() == ParseError::Kind::unknown_identifier);
        CHECK(e.offset() == 0);
    }
    CHECK_THROWS_AS(parse_expr("min(x)"), ParseError);
}

TEST_CASE("precedence and associativity") {
    CHECK(at_x("1 - 2 - 3", 0) == -4.0);
    CHECK(at_x("8 / 4 / 2", 0) == 1.0);
    CHECK(at_x("2 + 3*4", 0) == 14.0);
    CHECK(at_x("-x^2", 3.0) == -9.0);
    CHECK(at_x("2^3^2", 0) == 64.0);  // left-associative
    CHECK(at_x("pow(x, 3)", 2.0) == 8.0);
    CHECK(at_x("x^0", 0.0) == 1.0);
    CHECK(at_x("1.5e2 + 2E-1", 0) == 150.2);
}

TEST_CASE("eval errors") {
    CHECK_THROWS_AS(parse_expr("y").eval(Bindings::tx(0, 0)), EvalError);
    try {
        parse_expr("1 / (x - 1)").eval(Bindings::tx(0, 1.0));
        FAIL("expected division by zero");
    } catch (const EvalError& e) {
        CHECK(e.kind() == EvalError::Kind::division_by_zero);
        CHECK(e.node() == "(1 / (x - 1))");
    }
    CHECK_THROWS_AS(at_x("log(x)", 0.0), EvalError);
    CHECK_THROWS_AS(at_x("sqrt(x)", -1.0), EvalError);
    CHECK(at_x("sqrt(x)", 4.0) == 2.0);
}

TEST_CASE("depends_on") {
    const Expression e = parse_expr("3*cos(x) - 0.1*y");
    CHECK(e.depends_on(Var::x));
    CHECK(e.depends_on(Var::y));
    CHECK_FALSE(e.depends_on(Var::z));
    CHECK_FALSE(e.depends_on(Var::t));
}

TEST_CASE("round trip on generated expressions") {
    std::mt19937 rng(20261015);
    for (int k = 0; k < 2000; ++k) {
        const std::string src = random_expr(rng, 4);
        const Expression a = parse_expr(src);
        const Expression b = parse_expr(a.to_string());
        INFO(src);
        CHECK(structurally_equal(a, b));
        CHECK(b.to_string() == a.to_string());
    }
}

TEST_CASE("literal binary operations are exact") {
    std::mt19937 rng(7);
    std::uniform_real_distribution<double> d(-1e3, 1e3);
    char buf[128];
    for (int k = 0; k < 500; ++k) {
        const double a = d(rng), b = d(rng);
        const auto eval2 = [&](const char* op) {
            std::snprintf(buf, sizeof buf, "%.17g %s (%.17g)", a, op, b);
            return parse_expr(buf).eval(Bindings{});
        };
        CHECK(eval2("+") == a + b);
        CHECK(eval2("-") == a - b);
        CHECK(eval2("*") == a * b);
        CHECK(eval2("/") == a / b);
    }
}

TEST_CASE("pos and neg identities") {
    std::mt19937 rng(11);
    std::uniform_real_distribution<double> d(-50.0, 50.0);
    const Expression pos = parse_expr("pos(x)"), neg = parse_expr("neg(x)");
    for (int k = 0; k < 1000; ++k) {
        const double a = d(rng);
        const double p = pos.eval(Bindings::tx(0, a)), n = neg.eval(Bindings::tx(0, a));
        CHECK(p >= 0.0);
        CHECK(n >= 0.0);
        CHECK(p - n == a);
        CHECK(p + n == std::abs(a));
    }
}

}  // TEST_SUITE
