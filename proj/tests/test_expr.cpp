#include <doctest.h>

#include <cmath>
#include <functional>
#include <memory>
#include <random>
#include <string>
#include <vector>

#include "bilag/errors.hpp"
#include "bilag/expr.hpp"

using namespace bilag;

namespace {

const std::vector<std::string> kXY = {"x", "y"};
const std::vector<std::string> kX = {"x"};

double ev(const std::string& src, const std::vector<std::string>& vars,
          const std::vector<double>& at) {
    CompiledExpr c(parse(src), vars);
    return c(at);
}

} // namespace

TEST_CASE("grammar basics") {
    auto e = parse("q*p + 1");
    REQUIRE(e->kind == ExprKind::Add);
    CHECK(e->a->kind == ExprKind::Mul);
    CHECK(e->b->kind == ExprKind::Literal);
    CHECK(e->a->a->name == "q");
    CHECK(e->a->b->name == "p");

    auto s = parse("sin(2*pi*x)");
    REQUIRE(s->kind == ExprKind::Call);
    CHECK(s->func == Func::Sin);
    CHECK(s->a->kind == ExprKind::Mul);
    CHECK(s->a->a->kind == ExprKind::Mul);
    CHECK(s->a->b->name == "x");
}

TEST_CASE("power is right-associative and binds tighter than unary minus") {
    CHECK(ev("2^3^2", {}, {}) == 512.0);
    CHECK(ev("-2^2", {}, {}) == -4.0);
    CHECK(ev("2^-1", {}, {}) == 0.5);
    CHECK(ev("-2^-2", {}, {}) == -0.25);
    CHECK(ev("(-2)^2", {}, {}) == 4.0);
    CHECK(ev("2*3^2", {}, {}) == 18.0);
    CHECK(ev("1-2-3", {}, {}) == -4.0);
    CHECK(ev("12/4/3", {}, {}) == 1.0);
    CHECK(ev("1+2*3", {}, {}) == 7.0);
    CHECK(std::abs(ev("cos(pi)", {}, {}) + 1.0) < 1e-15);
}

TEST_CASE("scientific literals and whitespace") {
    CHECK(ev("1.5e2", {}, {}) == 150.0);
    CHECK(ev("2.5E-1", {}, {}) == 0.25);
    CHECK(ev(" 1 +\n 2 ", {}, {}) == 3.0);
    CHECK(ev(".5*4", {}, {}) == 2.0);
}

TEST_CASE("parse errors carry line and column") {
    try {
        parse("1 + * 2");
        FAIL("expected ParseError");
    } catch (const ParseError& e) {
        CHECK(e.line == 1);
        CHECK(e.col == 5);
    }
    try {
        parse("sin(x");
        FAIL("expected ParseError");
    } catch (const ParseError& e) {
        CHECK(e.col == 6);
    }
    CHECK_THROWS_AS(parse("x + + y"), ParseError);
    CHECK_THROWS_AS(parse("(x"), ParseError);
    CHECK_THROWS_AS(parse("x y"), ParseError);
    CHECK_THROWS_AS(parse(""), ParseError);
    CHECK_THROWS_AS(parse("x @ y"), ParseError);
    CHECK_THROWS_AS(parse("sin x"), ParseError);
}

TEST_CASE("unknown identifiers are rejected at bind time") {
    auto e = parse("x + z");
    try {
        CompiledExpr c(e, kXY);
        FAIL("expected BindError");
    } catch (const BindError& err) {
        CHECK(std::string(err.what()).find("'z'") != std::string::npos);
    }
}

TEST_CASE("print then re-parse yields an equal tree") {
    std::vector<std::string> sources = {
        "q*p + 1",
        "sin(2*pi*x)",
        "2^3^2",
        "-x^2",
        "(-x)^2",
        "(x+y)*(x-y)",
        "a - (b - c)",
        "a - b - c",
        "x/(y*z)",
        "x/y*z",
        "-(x+y)",
        "2^(x+1)",
        "(2^x)^3",
        "abs(-x) + sqrt(y)/tan(z)",
        "1.25e-3 + x*1e6",
        "x^-2",
    };
    for (const auto& s : sources) {
        auto e = parse(s);
        std::string printed = to_string(*e);
        CAPTURE(s);
        CAPTURE(printed);
        auto e2 = parse(printed);
        CHECK(equal(*e, *e2));
        // printing is stable once normalized
        CHECK(to_string(*e2) == printed);
    }
}

TEST_CASE("round-trip holds for random expression trees") {
    std::mt19937_64 rng(7771);
    std::uniform_int_distribution<int> pick(0, 9);
    std::uniform_real_distribution<double> U(-3.0, 3.0);

    std::function<ExprPtr(int)> gen = [&](int depth) -> ExprPtr {
        auto leaf = [&]() -> ExprPtr {
            auto e = std::make_shared<Expr>();
            if (pick(rng) < 5) {
                e->kind = ExprKind::Literal;
                // the lexer never produces negative literals (a leading minus
                // is unary negation), so the reachable AST space has none
                e->literal = std::abs(U(rng));
            } else {
                e->kind = ExprKind::Variable;
                e->name = pick(rng) < 5 ? "x" : "y";
            }
            return e;
        };
        if (depth == 0) return leaf();
        int k = pick(rng);
        auto e = std::make_shared<Expr>();
        switch (k) {
            case 0: e->kind = ExprKind::Add; break;
            case 1: e->kind = ExprKind::Sub; break;
            case 2: e->kind = ExprKind::Mul; break;
            case 3: e->kind = ExprKind::Div; break;
            case 4: e->kind = ExprKind::Pow; break;
            case 5: e->kind = ExprKind::Neg; break;
            case 6:
                e->kind = ExprKind::Call;
                e->func = static_cast<Func>(pick(rng) % 7);
                break;
            default: return leaf();
        }
        e->a = gen(depth - 1);
        if (e->kind != ExprKind::Neg && e->kind != ExprKind::Call) e->b = gen(depth - 1);
        return e;
    };

    for (int t = 0; t < 200; ++t) {
        auto e = gen(4);
        auto e2 = parse(to_string(*e));
        CAPTURE(to_string(*e));
        CHECK(equal(*e, *e2));
    }
}

TEST_CASE("variables are reported in first-appearance order") {
    auto e = parse("b + a*b + c^a");
    auto v = variables(*e);
    REQUIRE(v.size() == 3);
    CHECK(v[0] == "b");
    CHECK(v[1] == "a");
    CHECK(v[2] == "c");
}

TEST_CASE("jet evaluation of the identity and a square") {
    auto cx = CompiledExpr(parse("x"), kX);
    Jet j = cx.jet(std::vector<double>{3.0}, 2);
    CHECK(j.coeff(0) == 3.0);
    CHECK(j.coeff(1) == 1.0);
    CHECK(j.coeff(2) == 0.0);

    auto cq = CompiledExpr(parse("x*x"), kX);
    Jet q = cq.jet(std::vector<double>{2.0}, 2);
    CHECK(q.coeff(0) == 4.0);
    CHECK(q.coeff(1) == 4.0);
    CHECK(q.coeff(2) == 1.0);
}

TEST_CASE("sin jet derivative matches a central finite difference") {
    auto c = CompiledExpr(parse("sin(x)"), kX);
    Jet j = c.jet(std::vector<double>{0.7}, 2);
    const double h = 1e-5;
    double fd = (std::sin(0.7 + h) - std::sin(0.7 - h)) / (2 * h);
    CHECK(std::abs(j.coeff(1) - fd) < 1e-7);
}

TEST_CASE("product rule is exact coefficientwise") {
    auto a = CompiledExpr(parse("x^2*y + sin(x)"), kXY);
    auto b = CompiledExpr(parse("exp(y) - x*y"), kXY);
    auto ab = CompiledExpr(parse("(x^2*y + sin(x)) * (exp(y) - x*y)"), kXY);
    std::vector<double> p = {0.3, -0.6};
    Jet ja = a.jet(p, 3), jb = b.jet(p, 3), jab = ab.jet(p, 3);
    Jet prod = ja * jb;
    for (int k = 0; k < prod.size(); ++k)
        CHECK(std::abs(prod.coeff(k) - jab.coeff(k)) <= 1e-12 * std::max(1.0, std::abs(jab.coeff(k))));
}

TEST_CASE("random polynomial jets match finite differences within 1e-6 relative") {
    std::mt19937_64 rng(424242);
    std::uniform_real_distribution<double> U(-1.0, 1.0);
    for (int trial = 0; trial < 8; ++trial) {
        double c3 = U(rng), c2 = U(rng), c1 = U(rng), c0 = U(rng), m = U(rng);
        std::string src = std::to_string(c3) + "*x^3 + " + std::to_string(c2) + "*x^2*y + " +
                          std::to_string(c1) + "*y^2 + " + std::to_string(c0) + " + " +
                          std::to_string(m) + "*x*y";
        CompiledExpr ce(parse(src), kXY);
        std::vector<double> p = {U(rng), U(rng)};
        Jet j = ce.jet(p, 3);
        const double h = 0.1;
        // d/dx at p via 5-point-free simple central scheme, exact for cubics up to roundoff
        auto f = [&](double x, double y) { return ce(std::vector<double>{x, y}); };
        double fx = (f(p[0] + h, p[1]) - f(p[0] - h, p[1])) / (2 * h) - h * h * c3; // remove cubic FD bias
        double fy = (f(p[0], p[1] + h) - f(p[0], p[1] - h)) / (2 * h);
        CHECK(std::abs(j.coeff(1) - fx) <= 1e-6 * std::max(1.0, std::abs(fx)));
        CHECK(std::abs(j.coeff(2) - fy) <= 1e-6 * std::max(1.0, std::abs(fy)));
    }
}

TEST_CASE("domain errors name the offending subexpression") {
    auto c = CompiledExpr(parse("1 + log(x - 2)"), kX);
    try {
        c(std::vector<double>{1.0});
        FAIL("expected EvalError");
    } catch (const EvalError& e) {
        std::string msg = e.what();
        CHECK(msg.find("log(x-2)") != std::string::npos);
        CHECK(msg.find("non-positive") != std::string::npos);
    }

    auto d = CompiledExpr(parse("x / (x - 1)"), kX);
    CHECK_THROWS_AS(d(std::vector<double>{1.0}), EvalError);
    CHECK(d(std::vector<double>{3.0}) == 1.5);

    auto s = CompiledExpr(parse("sqrt(x)"), kX);
    CHECK_THROWS_AS(s(std::vector<double>{-1.0}), EvalError);

    auto pw = CompiledExpr(parse("x^0.5"), kX);
    CHECK_THROWS_AS(pw(std::vector<double>{-2.0}), EvalError);
    CHECK(std::abs(pw(std::vector<double>{4.0}) - 2.0) < 1e-15);

    auto pn = CompiledExpr(parse("x^3"), kX);
    CHECK(pn(std::vector<double>{-2.0}) == -8.0);
}

TEST_CASE("jet path and scalar path agree") {
    CompiledExpr c(parse("exp(x*y)/(1 + x^2) + log(2 + y)*sin(x - y)"), kXY);
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> U(-0.9, 0.9);
    for (int t = 0; t < 20; ++t) {
        std::vector<double> p = {U(rng), U(rng)};
        double direct = c(p);
        Jet j = c.jet(p, 0);
        CHECK(std::abs(direct - j.value()) < 1e-12 * std::max(1.0, std::abs(direct)));
    }
}
