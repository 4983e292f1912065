#include "bilag/geom.hpp"

#include <array>
#include <cmath>
#include <vector>

#include "bilag/chart.hpp"
#include "bilag/errors.hpp"
#include "doctest.h"

using namespace bilag;

namespace {

VectorField vf(ChartPtr c, std::initializer_list<const char*> comps) {
    std::vector<ExprPtr> es;
    for (const char* s : comps) es.push_back(parse(s));
    return VectorField::from_exprs(std::move(c), std::move(es));
}

OneForm form1(ChartPtr c, std::initializer_list<const char*> comps) {
    std::vector<ExprPtr> es;
    for (const char* s : comps) es.push_back(parse(s));
    return OneForm::from_exprs(std::move(c), std::move(es));
}

} // namespace

TEST_CASE("lie bracket of x d/dy with d/dx is -d/dy") {
    auto c = make_chart("plane", {"x", "y"});
    auto X = vf(c, {"0", "x"});
    auto Y = vf(c, {"1", "0"});
    auto br = lie_bracket(X, Y, std::array{0.3, -0.7});
    CHECK(br[0] == doctest::Approx(0.0));
    CHECK(br[1] == doctest::Approx(-1.0));
}

TEST_CASE("lie bracket is antisymmetric and bilinear on polynomial fields") {
    auto c = make_chart("plane", {"x", "y"});
    auto X = vf(c, {"x*y", "y^2 - x"});
    auto Y = vf(c, {"1 + x^2", "x*y - 2"});
    auto Z = vf(c, {"y", "x"});
    for (const auto& p : sample_box(*c, 7, 5)) {
        auto xy = lie_bracket(X, Y, p);
        auto yx = lie_bracket(Y, X, p);
        auto xz = lie_bracket(X, Z, p);
        auto x_yz = lie_bracket(X, vf_add(Y, Z), p);
        for (int i = 0; i < 2; ++i) {
            CHECK(xy[i] == doctest::Approx(-yx[i]));
            CHECK(x_yz[i] == doctest::Approx(xy[i] + xz[i]));
        }
        auto x_2y = lie_bracket(X, vf_scale(2.0, Y), p);
        for (int i = 0; i < 2; ++i) CHECK(x_2y[i] == doctest::Approx(2.0 * xy[i]));
    }
}

TEST_CASE("jacobi identity holds for nested brackets") {
    auto c = make_chart("space", {"x", "y", "z"});
    auto X = vf(c, {"y*z", "x", "1"});
    auto Y = vf(c, {"z", "x*y", "y"});
    auto Z = vf(c, {"x^2", "z", "x + y"});
    auto j1 = lie_bracket(X, lie_bracket(Y, Z));
    auto j2 = lie_bracket(Y, lie_bracket(Z, X));
    auto j3 = lie_bracket(Z, lie_bracket(X, Y));
    for (const auto& p : sample_box(*c, 9, 11)) {
        auto a = j1.values(p);
        auto b = j2.values(p);
        auto d = j3.values(p);
        for (int i = 0; i < 3; ++i) CHECK(std::abs(a[i] + b[i] + d[i]) <= 1e-8);
    }
}

TEST_CASE("exterior derivative of x dy is dx^dy") {
    auto c = make_chart("plane", {"x", "y"});
    auto da = exterior_derivative(form1(c, {"0", "x"}));
    auto M = da.values(std::array{0.4, 0.9});
    CHECK(M[0 * 2 + 1] == doctest::Approx(1.0));
    CHECK(M[1 * 2 + 0] == doctest::Approx(-1.0));
    CHECK(M[0] == doctest::Approx(0.0));
    CHECK(M[3] == doctest::Approx(0.0));
}

TEST_CASE("exterior derivative of f dg matches df^dg componentwise") {
    auto c = make_chart("space", {"x", "y", "z"});
    // a = f dg with f = x*y + z, g = x - z^2
    auto f = ScalarField::from_expr(c, parse("x*y + z"));
    auto g = ScalarField::from_expr(c, parse("x - z^2"));
    auto a = form1(c, {"(x*y + z) * 1", "0", "(x*y + z) * (-2*z)"});
    auto da = exterior_derivative(a);
    for (const auto& p : sample_box(*c, 6, 3)) {
        auto fj = f.jet(p, 1);
        auto gj = g.jet(p, 1);
        auto M = da.values(p);
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j) {
                double want = fj.partial(i).value() * gj.partial(j).value() -
                              fj.partial(j).value() * gj.partial(i).value();
                CHECK(M[static_cast<std::size_t>(i) * 3 + j] == doctest::Approx(want).epsilon(1e-10));
            }
    }
}

TEST_CASE("derivative of the tautological-style form is the constant pairing form") {
    auto c = make_chart("phase", {"x", "y", "px", "py"});
    auto theta = form1(c, {"px", "py", "0", "0"});
    auto dth = exterior_derivative(theta);
    auto M = dth.values(std::array{0.2, -0.3, 0.5, 0.7});
    // (d theta)_{i, j} = d_i theta_j - d_j theta_i
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j) {
            double want = 0.0;
            if (i == 2 && j == 0) want = 1.0;
            if (i == 0 && j == 2) want = -1.0;
            if (i == 3 && j == 1) want = 1.0;
            if (i == 1 && j == 3) want = -1.0;
            CHECK(M[static_cast<std::size_t>(i) * 4 + j] == doctest::Approx(want));
        }
}

TEST_CASE("covariant derivative with zero connection reduces to the directional part") {
    auto c = make_chart("plane", {"x", "y"});
    auto nabla = Connection::zero(c);
    auto X = vf(c, {"1", "0"});
    auto Y = vf(c, {"y", "x^2"});
    auto D = covariant_derivative(nabla, X, Y).values(std::array{0.5, 0.25});
    CHECK(D[0] == doctest::Approx(0.0));
    CHECK(D[1] == doctest::Approx(1.0)); // d/dx x^2 at x = 0.5
}

TEST_CASE("torsion picks out the antisymmetric part of the christoffels") {
    auto c = make_chart("plane", {"x", "y"});
    // Gamma^x_{xy} = 1, everything else zero
    std::vector<ExprPtr> gamma(8, parse("0"));
    gamma[(0 * 2 + 0) * 2 + 1] = parse("1");
    auto nabla = Connection::from_exprs(c, std::move(gamma));
    auto X = vf(c, {"1", "0"});
    auto Y = vf(c, {"0", "1"});
    auto T = torsion(nabla, X, Y, std::array{0.1, 0.2});
    CHECK(T[0] == doctest::Approx(1.0));
    CHECK(T[1] == doctest::Approx(0.0));
    auto T2 = torsion(nabla, Y, X, std::array{0.1, 0.2});
    CHECK(T2[0] == doctest::Approx(-1.0));
}

TEST_CASE("curvature of the round-sphere connection in a polar patch") {
    auto c = make_chart("patch", {"t", "u"}, {{0.3, 2.8}, {-3.0, 3.0}});
    // metric dt^2 + sin(t)^2 du^2
    std::vector<ExprPtr> gamma(8, parse("0"));
    gamma[(0 * 2 + 1) * 2 + 1] = parse("-sin(t)*cos(t)"); // Gamma^t_{uu}
    gamma[(1 * 2 + 0) * 2 + 1] = parse("cos(t)/sin(t)");  // Gamma^u_{tu}
    gamma[(1 * 2 + 1) * 2 + 0] = parse("cos(t)/sin(t)");  // Gamma^u_{ut}
    auto nabla = Connection::from_exprs(c, std::move(gamma));
    for (const auto& p : sample_box(*c, 8, 17)) {
        auto R = curvature_tensor(nabla, p, 0);
        double s2 = std::sin(p[0]) * std::sin(p[0]);
        // R^t_{u t u} = sin^2 t
        CHECK(R[((0 * 2 + 1) * 2 + 0) * 2 + 1].value() == doctest::Approx(s2).epsilon(1e-9));
        // R^u_{t t u} = -1
        CHECK(R[((1 * 2 + 0) * 2 + 0) * 2 + 1].value() == doctest::Approx(-1.0).epsilon(1e-9));
        // antisymmetry in the last two slots
        for (int l = 0; l < 2; ++l)
            for (int k = 0; k < 2; ++k)
                for (int i = 0; i < 2; ++i)
                    for (int j = 0; j < 2; ++j)
                        CHECK(R[((static_cast<std::size_t>(l) * 2 + k) * 2 + i) * 2 + j].value() ==
                              doctest::Approx(
                                  -R[((static_cast<std::size_t>(l) * 2 + k) * 2 + j) * 2 + i]
                                       .value())
                                  .epsilon(1e-12));
    }
}

TEST_CASE("flat connections have zero curvature") {
    auto c = make_chart("plane", {"x", "y"});
    auto R = curvature_tensor(Connection::zero(c), std::array{0.2, 0.4}, 0);
    for (const auto& e : R) CHECK(e.value() == doctest::Approx(0.0));
}

TEST_CASE("tensor curvature agrees with the nested covariant-derivative route") {
    auto c = make_chart("plane", {"x", "y"});
    std::vector<ExprPtr> gamma;
    const char* entries[8] = {"x",     "y^2", "x*y - 1", "0",
                              "x + y", "1",   "y",       "x^2*y"};
    for (const char* s : entries) gamma.push_back(parse(s));
    auto nabla = Connection::from_exprs(c, std::move(gamma));
    auto X = vf(c, {"y", "x^2"});
    auto Y = vf(c, {"1", "x*y"});
    auto Z = vf(c, {"x + y", "2"});
    auto nzy = covariant_derivative(nabla, Y, Z);
    auto nzx = covariant_derivative(nabla, X, Z);
    auto route2 = covariant_derivative(nabla, X, nzy);   // nabla_X nabla_Y Z
    auto route2b = covariant_derivative(nabla, Y, nzx);  // nabla_Y nabla_X Z
    auto routebr = covariant_derivative(nabla, lie_bracket(X, Y), Z);
    for (const auto& p : sample_box(*c, 6, 23)) {
        auto direct = curvature(nabla, X, Y, Z, p);
        auto a = route2.values(p);
        auto b = route2b.values(p);
        auto d = routebr.values(p);
        for (int i = 0; i < 2; ++i) CHECK(std::abs(direct[i] - (a[i] - b[i] - d[i])) <= 1e-8);
    }
}

TEST_CASE("pushforward along the identity returns the same components") {
    auto c = make_chart("plane", {"x", "y"});
    auto X = vf(c, {"x*y", "1 - y"});
    auto id = Map::identity(c);
    auto Y = pushforward_vf(id, id, X);
    for (const auto& p : sample_box(*c, 5, 2)) {
        auto a = X.values(p);
        auto b = Y.values(p);
        CHECK(a[0] == doctest::Approx(b[0]).epsilon(1e-12));
        CHECK(a[1] == doctest::Approx(b[1]).epsilon(1e-12));
    }
}

TEST_CASE("pushforward by a linear stretch rescales the components") {
    auto src = make_chart("plane", {"x", "y"});
    auto dst = make_chart("stretched", {"u", "v"}, {{-2.0, 2.0}, {-1.0, 1.0}});
    Map phi(src, dst, {parse("2*x"), parse("y")});
    Map phi_inv(dst, src, {parse("u/2"), parse("v")});
    auto X = vf(src, {"1", "x"});
    auto Y = pushforward_vf(phi, phi_inv, X);
    auto q = std::array{0.8, -0.4}; // = phi(0.4, -0.4)
    auto v = Y.values(q);
    CHECK(v[0] == doctest::Approx(2.0));
    CHECK(v[1] == doctest::Approx(0.4));
}

TEST_CASE("pushforward with a wrong inverse is rejected") {
    auto c = make_chart("plane", {"x", "y"});
    Map phi(c, c, {parse("x + y^2"), parse("y")});
    Map bad(c, c, {parse("x"), parse("y")});
    auto X = vf(c, {"1", "0"});
    CHECK_THROWS_AS(pushforward_vf(phi, bad, X), DomainError);
}

TEST_CASE("pullback of the area form by a fold is the jacobian multiple") {
    auto src = make_chart("plane", {"x", "y"});
    auto dst = make_chart("image", {"u", "v"});
    Map psi(src, dst, {parse("x^2"), parse("y")});
    auto area = TwoForm::from_entries(dst, {{0, 1, parse("1")}});
    auto back = pullback_form(psi, area);
    for (const auto& p : sample_box(*src, 6, 7)) {
        auto M = back.values(p);
        CHECK(M[0 * 2 + 1] == doctest::Approx(2.0 * p[0]).epsilon(1e-10));
        CHECK(M[1 * 2 + 0] == doctest::Approx(-2.0 * p[0]).epsilon(1e-10));
    }
}

TEST_CASE("contract2 and directional evaluate pairings and derivatives") {
    auto c = make_chart("plane", {"q", "p"});
    auto w = TwoForm::from_entries(c, {{0, 1, parse("1")}});
    auto dq = vf(c, {"1", "0"});
    auto dp = vf(c, {"0", "1"});
    auto pt = std::array{0.3, 0.6};
    auto W = w.matrix(pt, 0);
    auto Xq = dq.jets(pt, 0);
    auto Xp = dp.jets(pt, 0);
    CHECK(contract2(W, Xq, Xp).value() == doctest::Approx(1.0));
    CHECK(contract2(W, Xp, Xq).value() == doctest::Approx(-1.0));

    auto f = ScalarField::from_expr(c, parse("q^2*p"));
    auto X = vf(c, {"1", "1"});
    auto fj = f.jet(pt, 1);
    auto Xj = X.jets(pt, 1);
    // X.f = 2qp + q^2
    CHECK(directional(Xj, fj).value() ==
          doctest::Approx(2.0 * 0.3 * 0.6 + 0.3 * 0.3).epsilon(1e-12));
}
