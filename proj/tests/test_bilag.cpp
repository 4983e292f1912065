#include "bilag/bilag.hpp"

#include <array>
#include <cmath>
#include <vector>

#include "bilag/errors.hpp"
#include "bilag/geom.hpp"
#include "doctest.h"

using namespace bilag;

namespace {

VectorField vf(ChartPtr c, std::initializer_list<const char*> comps) {
    std::vector<ExprPtr> es;
    for (const char* s : comps) es.push_back(parse(s));
    return VectorField::from_exprs(std::move(c), std::move(es));
}

BiLagrangianStructure darboux2() {
    auto c = make_chart("plane", {"q", "p"});
    BiLagrangianStructure S;
    S.chart = c;
    S.name = "darboux2";
    S.omega = TwoForm::from_entries(c, {{0, 1, parse("1")}});
    S.f1 = make_foliation(c, "horizontal", {vf(c, {"1", "0"})});
    S.f2 = make_foliation(c, "vertical", {vf(c, {"0", "1"})});
    return S;
}

BiLagrangianStructure weighted2(const char* weight) {
    auto c = make_chart("plane", {"q", "p"});
    BiLagrangianStructure S;
    S.chart = c;
    S.name = weight;
    S.omega = TwoForm::from_entries(c, {{0, 1, parse(weight)}});
    S.f1 = make_foliation(c, "horizontal", {vf(c, {"1", "0"})});
    S.f2 = make_foliation(c, "vertical", {vf(c, {"0", "1"})});
    return S;
}

BiLagrangianStructure darboux4() {
    auto c = make_chart("phase4", {"q1", "q2", "p1", "p2"});
    BiLagrangianStructure S;
    S.chart = c;
    S.name = "darboux4";
    S.omega = TwoForm::from_entries(c, {{0, 2, parse("1")}, {1, 3, parse("1")}});
    S.f1 = make_foliation(c, "base",
                          {vf(c, {"1", "0", "0", "0"}), vf(c, {"0", "1", "0", "0"})});
    S.f2 = make_foliation(c, "fiber",
                          {vf(c, {"0", "0", "1", "0"}), vf(c, {"0", "0", "0", "1"})});
    return S;
}

// second foliation is the graph of d(p1^2 p2 / 2); frames are not coordinate
// fields, so the within-foliation solve actually has work to do
BiLagrangianStructure graph4() {
    auto c = make_chart("phase4", {"q1", "q2", "p1", "p2"});
    BiLagrangianStructure S;
    S.chart = c;
    S.name = "graph4";
    S.omega = TwoForm::from_entries(c, {{0, 2, parse("1")}, {1, 3, parse("1")}});
    S.f1 = make_foliation(c, "base",
                          {vf(c, {"1", "0", "0", "0"}), vf(c, {"0", "1", "0", "0"})});
    S.f2 = make_foliation(c, "graph",
                          {vf(c, {"p2", "p1", "1", "0"}), vf(c, {"p1", "0", "0", "1"})});
    return S;
}

} // namespace

TEST_CASE("darboux plane passes every structure check") {
    auto S = darboux2();
    auto rep = verify_structure(S);
    CHECK(rep.pass());
    CHECK(rep.find("symplectic/closed")->residual <= 1e-15);
    CHECK(rep.find("lagrangian/horizontal")->residual <= 1e-15);
    CHECK(rep.find("transversal")->residual == doctest::Approx(1.0));
}

TEST_CASE("darboux plane is flat for its canonical connection") {
    auto S = darboux2();
    auto nabla = hess_connection(S);
    auto G = nabla.christoffels(std::array{0.3, -0.5}, 0);
    for (const auto& g : G) CHECK(std::abs(g.value()) <= 1e-12);
    VerifyOptions opt;
    opt.samples = 25;
    auto def = check_hess_defining(S, nabla, opt);
    CHECK(def.pass());
    for (const auto& ck : def.checks) CHECK(ck.residual <= 1e-12);
    auto aff = check_affine(S, nabla, opt);
    CHECK(aff.pass());
    CHECK(aff.find("affine/curvature")->residual <= 1e-12);
}

TEST_CASE("exp(q) weight gives Gamma^q_qq = 1 and stays flat") {
    auto S = weighted2("exp(q)");
    CHECK(verify_structure(S).pass());
    auto nabla = hess_connection(S);
    auto pt = std::array{0.4, -0.2};
    auto G = nabla.christoffels(pt, 0);
    CHECK(G[(0 * 2 + 0) * 2 + 0].value() == doctest::Approx(1.0).epsilon(1e-10));
    for (std::size_t t = 1; t < G.size(); ++t) CHECK(std::abs(G[t].value()) <= 1e-10);
    VerifyOptions opt;
    opt.samples = 25;
    CHECK(check_hess_defining(S, nabla, opt).pass());
    auto aff = check_affine(S, nabla, opt);
    CHECK(aff.pass());
    CHECK(aff.find("affine/curvature")->residual <= 1e-10);
}

TEST_CASE("exp(q*p) weight is a valid structure but not affine") {
    auto S = weighted2("exp(q*p)");
    CHECK(verify_structure(S).pass());
    auto nabla = hess_connection(S);
    auto pt = std::array{0.7, -0.3};
    auto G = nabla.christoffels(pt, 0);
    // Gamma^q_qq = p and Gamma^p_pp = q, everything else zero
    CHECK(G[(0 * 2 + 0) * 2 + 0].value() == doctest::Approx(-0.3).epsilon(1e-10));
    CHECK(G[(1 * 2 + 1) * 2 + 1].value() == doctest::Approx(0.7).epsilon(1e-10));
    CHECK(std::abs(G[(0 * 2 + 0) * 2 + 1].value()) <= 1e-10);
    CHECK(std::abs(G[(1 * 2 + 0) * 2 + 0].value()) <= 1e-10);

    VerifyOptions opt;
    opt.samples = 25;
    CHECK(check_hess_defining(S, nabla, opt).pass());

    // R(d_q, d_p) d_q = -d_q, so the curvature check must report ~1
    auto dq = vf(S.chart, {"1", "0"});
    auto dp = vf(S.chart, {"0", "1"});
    auto R = curvature(nabla, dq, dp, dq, pt);
    CHECK(R[0] == doctest::Approx(-1.0).epsilon(1e-9));
    CHECK(std::abs(R[1]) <= 1e-9);
    auto aff = check_affine(S, nabla, opt);
    CHECK(!aff.pass());
    CHECK(aff.find("affine/curvature")->residual == doctest::Approx(1.0).epsilon(1e-6));
}

TEST_CASE("four-dimensional darboux block passes and is flat") {
    auto S = darboux4();
    CHECK(verify_structure(S).pass());
    auto nabla = hess_connection(S);
    VerifyOptions opt;
    opt.samples = 10;
    CHECK(check_hess_defining(S, nabla, opt).pass());
    auto aff = check_affine(S, nabla, opt);
    CHECK(aff.find("affine/curvature")->residual <= 1e-11);
}

TEST_CASE("graph foliation structure verifies and its connection satisfies the axioms") {
    auto S = graph4();
    auto rep = verify_structure(S);
    CHECK(rep.pass());
    auto nabla = hess_connection(S);
    VerifyOptions opt;
    opt.samples = 15;
    auto def = check_hess_defining(S, nabla, opt);
    CHECK(def.pass());
    for (const auto& ck : def.checks) CHECK(ck.residual <= 1e-7);
}

TEST_CASE("perturbing any christoffel entry breaks a defining property") {
    auto S = darboux2();
    auto base = hess_connection(S);
    VerifyOptions opt;
    opt.samples = 10;
    for (int idx = 0; idx < 8; ++idx) {
        auto bumped = Connection::from_fn(
            S.chart,
            [base, idx](std::span<const double> p, int order) {
                auto G = base.christoffels(p, order);
                G[idx] += Jet::constant(1e-3, 2, order);
                return G;
            },
            /*memoize=*/false);
        auto rep = check_hess_defining(S, bumped, opt);
        CHECK(!rep.pass());
    }
}

TEST_CASE("near-degenerate weight fails the nondegeneracy gate") {
    auto c = make_chart("pinched", {"q", "p"}, {{-1e-12, 1e-12}, {-1.0, 1.0}});
    BiLagrangianStructure S;
    S.chart = c;
    S.name = "pinched";
    S.omega = TwoForm::from_entries(c, {{0, 1, parse("q")}});
    S.f1 = make_foliation(c, "horizontal", {vf(c, {"1", "0"})});
    S.f2 = make_foliation(c, "vertical", {vf(c, {"0", "1"})});
    auto rep = check_symplectic(S.omega);
    CHECK(!rep.pass());
    CHECK(!rep.find("symplectic/nondegenerate")->pass);
    CHECK(rep.find("symplectic/closed")->pass);
}

TEST_CASE("non-lagrangian and non-transversal foliations are reported") {
    auto S = darboux4();
    auto bad = make_foliation(S.chart, "mixed",
                              {vf(S.chart, {"1", "0", "0", "0"}), vf(S.chart, {"0", "0", "1", "0"})});
    auto rep = check_lagrangian(S.omega, bad);
    CHECK(!rep.pass());
    CHECK(rep.find("lagrangian/mixed")->residual == doctest::Approx(1.0));

    auto S2 = darboux2();
    auto again = make_foliation(S2.chart, "again", {vf(S2.chart, {"1", "0"})});
    CHECK(!check_transversal(S2.f1, again).pass());
}

TEST_CASE("a bracket leaving the span fails involutivity") {
    auto c = make_chart("space", {"x", "y", "z"});
    auto F = make_foliation(c, "twist", {vf(c, {"1", "0", "0"}), vf(c, {"0", "1", "x"})});
    auto rep = check_involutive(F);
    CHECK(!rep.pass());
    CHECK(!rep.find("foliation/twist/involutive")->pass);
    CHECK(rep.find("foliation/twist/independent")->pass);
}

TEST_CASE("odd-dimensional charts are rejected by the symplectic check") {
    auto c = make_chart("odd", {"x", "y", "z"});
    auto w = TwoForm::from_entries(c, {{0, 1, parse("1")}});
    CHECK_THROWS_AS(check_symplectic(w), DomainError);
}

TEST_CASE("degenerate joint frames raise a check error naming the point") {
    auto c = make_chart("plane", {"q", "p"});
    BiLagrangianStructure S;
    S.chart = c;
    S.name = "collapsed";
    S.omega = TwoForm::from_entries(c, {{0, 1, parse("1")}});
    S.f1 = make_foliation(c, "null", {vf(c, {"0", "0"})});
    S.f2 = make_foliation(c, "vertical", {vf(c, {"0", "1"})});
    auto nabla = hess_connection(S);
    auto pt = std::array{0.5, 0.5};
    CHECK_THROWS_WITH_AS(nabla.christoffels(pt, 0),
                         doctest::Contains("degenerates"), CheckError);
}

TEST_CASE("christoffel queries beyond the jet budget are rejected") {
    auto nabla = hess_connection(darboux2());
    auto pt = std::array{0.1, 0.1};
    CHECK_NOTHROW(nabla.christoffels(pt, 2));
    CHECK_THROWS_AS(nabla.christoffels(pt, 3), DomainError);
}

TEST_CASE("para-kahler pair of the darboux plane is the sign split") {
    auto S = darboux2();
    auto pk = para_kahler(S);
    auto pt = std::array{0.2, 0.8};
    auto F = pk.F(pt, 0);
    CHECK(F[0].value() == doctest::Approx(1.0));
    CHECK(F[3].value() == doctest::Approx(-1.0));
    CHECK(std::abs(F[1].value()) <= 1e-14);
    CHECK(std::abs(F[2].value()) <= 1e-14);
    auto G = pk.G(pt, 0);
    CHECK(G[0 * 2 + 1].value() == doctest::Approx(1.0));
    CHECK(G[1 * 2 + 0].value() == doctest::Approx(1.0));
    CHECK(std::abs(G[0].value()) <= 1e-14);
    CHECK(std::abs(G[3].value()) <= 1e-14);
    CHECK(check_para_kahler(S, pk).pass());
}

TEST_CASE("para-kahler identities hold for the weighted and graph structures") {
    for (auto S : {weighted2("exp(q*p)"), graph4()}) {
        auto pk = para_kahler(S);
        auto rep = check_para_kahler(S, pk);
        CHECK(rep.pass());
        for (const auto& ck : rep.checks) CHECK(ck.residual <= 1e-9);
    }
    auto S = weighted2("exp(q*p)");
    auto pk = para_kahler(S);
    auto pt = std::array{0.5, 0.4};
    auto G = pk.G(pt, 0);
    CHECK(G[1].value() == doctest::Approx(std::exp(0.2)).epsilon(1e-12));
}

TEST_CASE("pushforward along a shear is again a verified structure") {
    auto S = weighted2("exp(q)");
    auto dst = make_chart("sheared", {"u", "v"}, {{-1.0, 1.0}, {-2.0, 2.0}});
    Map phi(S.chart, dst, {parse("q"), parse("p + q^2")});
    Map phi_inv(dst, S.chart, {parse("u"), parse("v - u^2")});
    auto T = pushforward_structure(phi, phi_inv, S);
    CHECK(T.chart == dst);
    auto rep = verify_structure(T);
    CHECK(rep.pass());

    auto nabla = hess_connection(T);
    VerifyOptions opt;
    opt.samples = 15;
    CHECK(check_hess_defining(T, nabla, opt).pass());

    // round trip back to the original chart and compare fields pointwise
    auto back = pushforward_structure(phi_inv, phi, T);
    for (const auto& p : sample_box(*S.chart, 8, 3)) {
        auto a = S.omega.values(p);
        auto b = back.omega.values(p);
        for (std::size_t t = 0; t < a.size(); ++t) CHECK(std::abs(a[t] - b[t]) <= 1e-8);
        auto x = S.f1.frame[0].values(p);
        auto y = back.f1.frame[0].values(p);
        CHECK(std::abs(x[0] - y[0]) <= 1e-8);
        CHECK(std::abs(x[1] - y[1]) <= 1e-8);
    }
}
