#include "doctest.h"

#include <cmath>

#include "bilag/errors.hpp"
#include "bilag/expr.hpp"
#include "bilag/torus.hpp"

using namespace bilag;

namespace {

const char* kCherryW =
    "(1 - exp(-30 * exp(5*(cos(2*pi*(x-0.5))-1)) * exp(5*(cos(2*pi*(y-0.5))-1))))";

TorusVectorField cherry_field() {
    std::string W = kCherryW;
    std::string ex = "0.3*(1 - " + W + ") - 0.6*" + W + "*sin(2*pi*(x-0.5))/(2*pi)";
    std::string ey =
        "(1 - " + W + ") + " + W + "*2*((sin(2*pi*(y-0.5))/(2*pi))^2 - 0.0064)";
    return TorusVectorField::from_exprs(parse(ex), parse(ey));
}

// built once; several cases share the (expensive) flow-backed map
const CircleMapWithFlat& cherry_map() {
    static const CircleMapWithFlat f = return_map(cherry_field());
    return f;
}

TorusVectorField sin_field() {
    return TorusVectorField::from_exprs(parse("sin(2*pi*x)"), parse("sin(2*pi*y)"));
}

} // namespace

TEST_CASE("circle arithmetic") {
    CHECK(wrap01(0.25) == doctest::Approx(0.25));
    CHECK(wrap01(-0.25) == doctest::Approx(0.75));
    CHECK(wrap01(3.25) == doctest::Approx(0.25));
    CHECK(wrap01(1.0) == doctest::Approx(0.0));
    CHECK(circle_dist(0.1, 0.9) == doctest::Approx(0.2));
    CHECK(circle_dist(0.9, 0.1) == doctest::Approx(0.2));
    CHECK(circle_dist(0.25, 0.75) == doctest::Approx(0.5));
    CHECK(circle_dist(0.3, 0.3) == doctest::Approx(0.0));
}

TEST_CASE("torus field construction enforces periodicity") {
    CHECK_NOTHROW(TorusVectorField::from_exprs(parse("sin(2*pi*x)"), parse("1")));
    CHECK_THROWS_AS(TorusVectorField::from_exprs(parse("x"), parse("1")), DomainError);
    CHECK_THROWS_AS(TorusVectorField::from_exprs(parse("1"), parse("y*y")), DomainError);
    auto X = TorusVectorField::from_exprs(parse("cos(2*pi*x)"), parse("0.5"));
    auto v = X(0.25, 0.0);
    CHECK(v[0] == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(v[1] == doctest::Approx(0.5));
    auto j = X.jets(0.0, 0.0, 1);
    CHECK(j[0].partial(0).value() == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("singularities of the product sine field") {
    auto sing = find_singularities(sin_field());
    REQUIRE(sing.size() == 4);
    // sorted by y then x: (0,0) source, (0.5,0) saddle, (0,0.5) saddle, (0.5,0.5) sink
    const double tp = 2.0 * M_PI;
    CHECK(sing[0].x == doctest::Approx(0.0).epsilon(1e-9));
    CHECK(sing[0].y == doctest::Approx(0.0).epsilon(1e-9));
    CHECK(sing[0].cls == "hyperbolic-source");
    CHECK(sing[0].eig_re[0] == doctest::Approx(tp).epsilon(1e-9));
    CHECK(sing[0].eig_re[1] == doctest::Approx(tp).epsilon(1e-9));
    CHECK(sing[1].cls == "hyperbolic-saddle");
    CHECK(sing[2].cls == "hyperbolic-saddle");
    CHECK(sing[1].eig_re[0] == doctest::Approx(-tp).epsilon(1e-9));
    CHECK(sing[1].eig_re[1] == doctest::Approx(tp).epsilon(1e-9));
    CHECK(sing[3].x == doctest::Approx(0.5).epsilon(1e-9));
    CHECK(sing[3].y == doctest::Approx(0.5).epsilon(1e-9));
    CHECK(sing[3].cls == "hyperbolic-sink");

    // four singularities, two of the wrong kind: not a Cherry field
    auto rep = validate_cherry(sin_field());
    CHECK(!rep.pass());
    CHECK(!rep.find("cherry/singularities")->pass);
}

TEST_CASE("constant field has no singularities") {
    auto X = TorusVectorField::from_exprs(parse("1"), parse("0.3"));
    CHECK(find_singularities(X).empty());
    CHECK(!validate_cherry(X).pass());
}

TEST_CASE("cherry member: sink and saddle with the designed eigenvalues") {
    auto X = cherry_field();
    auto sing = find_singularities(X);
    REQUIRE(sing.size() == 2);
    const auto& sink = sing[0];
    const auto& saddle = sing[1];
    CHECK(sink.cls == "hyperbolic-sink");
    CHECK(sink.x == doctest::Approx(0.5).epsilon(1e-6));
    CHECK(sink.y == doctest::Approx(0.416179).epsilon(1e-4));
    CHECK(sink.eig_re[0] == doctest::Approx(-0.6).epsilon(1e-3));
    CHECK(sink.eig_re[1] == doctest::Approx(-0.2767).epsilon(1e-3));
    CHECK(saddle.cls == "hyperbolic-saddle");
    CHECK(saddle.x == doctest::Approx(0.5).epsilon(1e-6));
    CHECK(saddle.y == doctest::Approx(0.583821).epsilon(1e-4));
    CHECK(saddle.eig_re[0] == doctest::Approx(-0.6).epsilon(1e-3));
    CHECK(saddle.eig_re[1] == doctest::Approx(0.2767).epsilon(1e-3));

    auto rep = validate_cherry(X);
    CHECK(rep.pass());
    CHECK(rep.find("cherry/closed-orbit-free")->note.find("assumed") != std::string::npos);
}

TEST_CASE("fixed-time flow against analytic solutions") {
    auto vertical = TorusVectorField::from_exprs(parse("0"), parse("1"));
    auto p = flow_fixed(vertical, {0.3, 0.0}, 1.0);
    CHECK(p[0] == doctest::Approx(0.3).epsilon(1e-10));
    CHECK(circle_dist(p[1], 0.0) < 1e-10); // wrapped from y=1

    auto slanted = TorusVectorField::from_exprs(parse("0.37"), parse("1"));
    p = flow_fixed(slanted, {0.9, 0.0}, 1.0);
    CHECK(p[0] == doctest::Approx(wrap01(0.9 + 0.37)).epsilon(1e-10));

    // dy/dt = 1 + 0.5 sin(2 pi y): the time through one period is
    // 1/sqrt(1 - 0.25), and x advances c * T for constant c
    auto pulsed = TorusVectorField::from_exprs(parse("0.2"), parse("1 + 0.5*sin(2*pi*y)"));
    const double T = 1.0 / std::sqrt(0.75);
    auto cr = flow_to_section(pulsed, {0.1, 0.0}, 1.0);
    CHECK(!cr.captured);
    CHECK(cr.time == doctest::Approx(T).epsilon(1e-8));
    CHECK(cr.point[1] == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(cr.point[0] == doctest::Approx(wrap01(0.1 + 0.2 * T)).epsilon(1e-8));

    // reversibility
    auto q = flow_fixed(pulsed, {0.1, 0.2}, 0.7);
    auto back = flow_fixed(pulsed, q, -0.7);
    CHECK(circle_dist(back[0], 0.1) < 1e-9);
    CHECK(circle_dist(back[1], 0.2) < 1e-9);
}

TEST_CASE("flow group law on the cherry field") {
    auto X = cherry_field();
    // tight local tolerances: the composed-vs-direct comparison is sensitive
    // to error amplification through the bump region
    FlowOptions tight;
    tight.atol = 1e-13;
    tight.rtol = 1e-13;
    const double pts[][2] = {{0.1, 0.2}, {0.62, 0.8}, {0.45, 0.05}};
    const double st[][2] = {{0.5, 0.7}, {1.3, -0.6}, {-0.9, -0.4}, {2.0, -2.0}};
    for (const auto& p0 : pts)
        for (const auto& pair : st) {
            double s = pair[0], t = pair[1];
            auto onego = flow_fixed(X, {p0[0], p0[1]}, s + t, tight);
            auto steps = flow_fixed(X, flow_fixed(X, {p0[0], p0[1]}, t, tight), s, tight);
            CHECK(circle_dist(onego[0], steps[0]) < 1e-8);
            CHECK(circle_dist(onego[1], steps[1]) < 1e-8);
        }
}

TEST_CASE("section crossing on straight-line flows") {
    auto vertical = TorusVectorField::from_exprs(parse("0"), parse("1"));
    auto cr = flow_to_section(vertical, {0.3, 0.0}, 1.0);
    CHECK(!cr.captured);
    CHECK(cr.point[0] == doctest::Approx(0.3).epsilon(1e-10));
    CHECK(cr.point[1] == doctest::Approx(1.0).epsilon(1e-10));
    CHECK(cr.time == doctest::Approx(1.0).epsilon(1e-10));

    auto slanted = TorusVectorField::from_exprs(parse("0.37"), parse("1"));
    cr = flow_to_section(slanted, {0.9, 0.0}, 1.0);
    CHECK(cr.point[0] == doctest::Approx(0.27).epsilon(1e-9));
    CHECK(cr.time == doctest::Approx(1.0).epsilon(1e-10));

    // a horizontal field never reaches the section: reported as tmax capture
    auto horizontal = TorusVectorField::from_exprs(parse("1"), parse("0"));
    FlowOptions fast;
    fast.tmax = 5.0;
    cr = flow_to_section(horizontal, {0.0, 0.5}, 1.0, fast);
    CHECK(cr.captured);
    CHECK(cr.note == "tmax");
}

TEST_CASE("cherry orbits: capture inside the flat piece, escape outside") {
    auto X = cherry_field();
    auto sing = find_singularities(X);
    std::optional<std::array<double, 2>> sink;
    for (const auto& s : sing)
        if (s.cls == "hyperbolic-sink") sink = std::array<double, 2>{s.x, s.y};
    REQUIRE(sink.has_value());

    auto cr = flow_to_section(X, {0.35, 0.0}, 1.0, {}, sink);
    CHECK(cr.captured);
    CHECK(cr.note == "sink-ball");

    cr = flow_to_section(X, {0.8, 0.0}, 1.0, {}, sink);
    CHECK(!cr.captured);
    CHECK(cr.time >= 1.0);
    CHECK(cr.point[1] == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("return map of a rigid slant is the rigid rotation") {
    auto slanted = TorusVectorField::from_exprs(parse("0.37"), parse("1"));
    auto f = return_map(slanted);
    CHECK(!f.has_flat);
    CHECK(!f.warning.empty());
    REQUIRE(f.xs.size() == 512);
    for (std::size_t i = 0; i < f.xs.size(); ++i) {
        CHECK(circle_dist(f.fs[i], wrap01(f.xs[i] + 0.37)) < 1e-9);
        CHECK(f.ts[i] == doctest::Approx(1.0).epsilon(1e-9));
    }
    CHECK(circle_dist(f.eval(0.8), wrap01(0.8 + 0.37)) < 1e-9);
}

TEST_CASE("cherry return map: wide flat piece with consistent one-sided limits") {
    const auto& f = cherry_map();
    REQUIRE(f.has_flat);
    CHECK(f.width() > 0.01);
    CHECK(f.a == doctest::Approx(0.145933).epsilon(2e-4));
    CHECK(f.b == doctest::Approx(0.557666).epsilon(2e-4));
    CHECK(f.v == doctest::Approx(0.602187).epsilon(2e-4));
    CHECK(f.warning.empty());

    double vl = f.fn(f.a - 1e-7), vr = f.fn(f.b + 1e-7);
    CHECK(circle_dist(vl, vr) <= 1e-6);

    CHECK(f.in_flat(0.3));
    CHECK(!f.in_flat(0.7));
    CHECK(f.eval(0.3) == doctest::Approx(f.v));
    // the flat value lies outside the flat piece: recurrent dynamics
    CHECK(!f.in_flat(f.v));

    // sampled graph excludes the flat piece and is monotone (construction
    // would have thrown otherwise); spot-check degree-one monotonicity
    for (std::size_t i = 0; i < f.xs.size(); ++i) CHECK(!f.in_flat(f.xs[i]));
    CHECK(f.xs.size() + static_cast<std::size_t>(f.width() * 512) >= 500);
}

TEST_CASE("rotation number of rigid rotations") {
    auto f = rigid_rotation(0.3);
    auto est = rotation_number(f, 10000);
    CHECK(std::abs(est.value - 0.3) <= est.enclosure);
    CHECK(std::abs(est.value - 0.3) < 1e-12); // linear interpolation is exact here
    CHECK(est.enclosure == doctest::Approx(2e-4));

    auto g = rigid_rotation(1.0 / 3.0);
    CHECK(std::abs(rotation_number(g, 9999).value - 1.0 / 3.0) < 1e-12);
}

TEST_CASE("rotation number: enclosure contains a 10x longer run") {
    auto f = diffeo_map([](double x) { return x + 0.3 + 0.05 * std::sin(2 * M_PI * x); });
    auto est1 = rotation_number(f, 10000);
    auto est2 = rotation_number(f, 100000);
    CHECK(circle_dist(est1.value, est2.value) <= est1.enclosure);
}

TEST_CASE("rotation number locks on a flat map with a periodic orbit") {
    auto f = synthetic_flat_map(0.3, 0.4, 0.95, 0.5, 2.0, 2.0);
    auto est = rotation_number(f, 10000);
    CHECK(std::abs(est.value - 0.5) <= est.enclosure + 1e-9);
}

TEST_CASE("rotation number of the cherry member sits near one third") {
    auto est = rotation_number(cherry_map(), 10000);
    CHECK(std::abs(est.value - 1.0 / 3.0) <= est.enclosure + 1e-6);
}

TEST_CASE("non-monotone samples are rejected when building the lift") {
    auto f = diffeo_map([](double x) { return x + 0.4 * std::sin(2 * M_PI * x); });
    CHECK_THROWS_AS(rotation_number(f, 100), DomainError);
}

TEST_CASE("critical exponents of synthetic class members") {
    auto f = synthetic_flat_map(0.3, 0.48, 0.95, 0.5, 2.0, 3.0);
    auto fit = critical_exponents(f);
    CHECK(fit.ell_left == doctest::Approx(2.0).epsilon(0.01));
    CHECK(fit.ell_right == doctest::Approx(3.0).epsilon(0.01));
    CHECK(fit.r2_left > 0.999);
    CHECK(fit.r2_right > 0.999);
    CHECK(fit.points_left >= 20);

    auto lin = synthetic_flat_map(0.4, 0.6, 0.2, 0.5, 1.0, 1.0);
    auto lfit = critical_exponents(lin);
    CHECK(lfit.ell_left == doctest::Approx(1.0).epsilon(0.02));
    CHECK(lfit.ell_right == doctest::Approx(1.0).epsilon(0.02));

    CHECK_THROWS_AS(critical_exponents(rigid_rotation(0.3)), DomainError);
}

TEST_CASE("critical exponents of the cherry member (left endpoint)") {
    auto fit = critical_exponents(cherry_map());
    // saddle eigenvalue ratio 0.6/0.2767 = 2.17; the fit sees the left
    // asymptote inside the ladder, the right one only begins below 1e-4
    CHECK(fit.ell_left > 1.8);
    CHECK(fit.ell_left < 2.4);
    CHECK(fit.r2_left > 0.9);
    CHECK(fit.points_left == 25);
    CHECK(fit.points_right == 25);
}

TEST_CASE("glue of an admissible pair") {
    auto f1 = synthetic_flat_map(0.30, 0.40, 0.95, 0.5, 2.0, 2.0);
    auto f2 = synthetic_flat_map(0.36, 0.48, 0.95, 0.5, 2.0, 3.0);
    auto g = glue(f1, f2);
    REQUIRE(g.has_flat);
    CHECK(g.a == doctest::Approx(0.30));
    CHECK(g.b == doctest::Approx(0.48));
    CHECK(g.v == doctest::Approx(0.95));
    // continuity at both joints
    CHECK(std::abs(g.fn(0.30 - 1e-9) - 0.95) < 1e-6);
    CHECK(std::abs(g.fn(0.48 + 1e-9) - 0.95) < 1e-6);
    CHECK(g.fn(0.0) == doctest::Approx(f1.fn(0.0)));
    CHECK(g.fn(0.7) == doctest::Approx(f2.fn(0.7)));
    auto fit = critical_exponents(g);
    CHECK(fit.ell_left == doctest::Approx(2.0).epsilon(0.1));
    CHECK(fit.ell_right == doctest::Approx(3.0).epsilon(0.1));
}

TEST_CASE("glue rejects bad pairs") {
    auto f1 = synthetic_flat_map(0.30, 0.40, 0.95, 0.5, 2.0, 2.0);
    auto f2 = synthetic_flat_map(0.36, 0.48, 0.95, 0.5, 2.0, 3.0);
    CHECK_THROWS_AS(glue(f1, f1), DomainError);  // ordering a1 < a2 fails
    CHECK_THROWS_AS(glue(f2, f1), DomainError);  // wrong order
    auto f3 = synthetic_flat_map(0.36, 0.48, 0.9505, 0.5, 2.0, 3.0);
    CHECK_THROWS_AS(glue(f1, f3), DomainError);  // values differ beyond 1e-6
    CHECK_THROWS_AS(glue(f1, rigid_rotation(0.3)), DomainError);
    // disjoint flats (a2 > b1) violate the overlap requirement
    auto f4 = synthetic_flat_map(0.55, 0.6, 0.95, 0.5, 2.0, 2.0);
    CHECK_THROWS_AS(glue(f1, f4), DomainError);
}

TEST_CASE("circle diffeomorphism: lift checks, inverse, derivative") {
    CircleDiffeo phi(parse("x + 0.3 + 0.05*sin(2*pi*x)"));
    CHECK(phi(0.0) == doctest::Approx(0.3));
    CHECK(phi(1.0) - phi(0.0) == doctest::Approx(1.0));
    for (double y : {0.1, 0.42, 0.77, 1.3, -0.2}) {
        double x = phi.inverse(y);
        CHECK(std::abs(phi(x) - y) < 1e-10);
    }
    CHECK(phi.deriv(0.25) == doctest::Approx(1.0 + 0.1 * M_PI * std::cos(M_PI / 2)).epsilon(1e-9));
    auto j = phi.jet(0.1, 2);
    CHECK(j.value() == doctest::Approx(phi(0.1)));
    CHECK(j.partial(0).value() == doctest::Approx(phi.deriv(0.1)).epsilon(1e-12));

    CHECK_THROWS_AS(CircleDiffeo(parse("x + 0.4*sin(2*pi*x)")), DomainError);  // not monotone
    CHECK_THROWS_AS(CircleDiffeo(parse("2*x")), DomainError);                  // not degree one
}

TEST_CASE("torus diffeomorphism: construction checks and jets") {
    TorusDiffeo shear(parse("x + 0.1*sin(2*pi*y)"), parse("y"),
                      parse("x - 0.1*sin(2*pi*y)"), parse("y"));
    auto q = shear(0.2, 0.25);
    CHECK(q[0] == doctest::Approx(0.3));
    CHECK(q[1] == doctest::Approx(0.25));
    auto r = shear.inv(q[0], q[1]);
    CHECK(r[0] == doctest::Approx(0.2));
    auto j = shear.jets(0.2, 0.25, 1);
    CHECK(j[0].partial(1).value() == doctest::Approx(0.2 * M_PI * std::cos(M_PI / 2)).epsilon(1e-9));

    CHECK_THROWS_AS(TorusDiffeo(parse("x + 0.1*sin(2*pi*y)"), parse("y"),
                                parse("x + 0.1*sin(2*pi*y)"), parse("y")),
                    DomainError); // wrong inverse
    CHECK_THROWS_AS(TorusDiffeo(parse("x*2"), parse("y"), parse("x/2"), parse("y")),
                    DomainError); // translation compatibility broken
}

TEST_CASE("pushforward by a torus translation moves singularities rigidly") {
    TorusDiffeo shift(parse("x + 0.25"), parse("y + 0.5"), parse("x - 0.25"), parse("y - 0.5"));
    auto Y = pushforward_torus_field(shift, sin_field());
    auto sing = find_singularities(Y);
    REQUIRE(sing.size() == 4);
    // the sink of the sine field sits at (0.5, 0.5); shifted to (0.75, 0.0)
    bool found = false;
    for (const auto& s : sing)
        if (s.cls == "hyperbolic-sink") {
            found = true;
            CHECK(circle_dist(s.x, 0.75) < 1e-8);
            CHECK(circle_dist(s.y, 0.0) < 1e-8);
            CHECK(s.eig_re[0] == doctest::Approx(-2 * M_PI).epsilon(1e-8));
        }
    CHECK(found);
}

TEST_CASE("pushforward round trip returns the original field") {
    TorusDiffeo shear(parse("x + 0.1*sin(2*pi*y)"), parse("y"),
                      parse("x - 0.1*sin(2*pi*y)"), parse("y"));
    TorusDiffeo unshear(parse("x - 0.1*sin(2*pi*y)"), parse("y"),
                        parse("x + 0.1*sin(2*pi*y)"), parse("y"));
    auto X = sin_field();
    auto Y = pushforward_torus_field(shear, X);
    auto Z = pushforward_torus_field(unshear, Y);
    for (int i = 0; i < 16; ++i)
        for (int j = 0; j < 16; ++j) {
            double x = i / 16.0, y = j / 16.0;
            auto a = X(x, y), b = Z(x, y);
            CHECK(std::abs(a[0] - b[0]) < 1e-7);
            CHECK(std::abs(a[1] - b[1]) < 1e-7);
        }
}

TEST_CASE("pushforward along a circle diffeomorphism acts on x only") {
    CircleDiffeo phi(parse("x + 0.05*sin(2*pi*x)"));
    auto X = sin_field();
    auto Y = pushforward_torus_field(phi, X);
    // (phi_* X)(phi(x), y) = (phi'(x) X_x(x,y), X_y(x,y))
    for (double x : {0.12, 0.37, 0.81})
        for (double y : {0.2, 0.66}) {
            auto v = X(x, y);
            auto w = Y(phi(x), y);
            CHECK(w[0] == doctest::Approx(phi.deriv(x) * v[0]).epsilon(1e-8));
            CHECK(w[1] == doctest::Approx(v[1]).epsilon(1e-8));
        }
    // jets of the pushed field agree with divided differences
    auto j = Y.jets(0.3, 0.2, 1);
    double h = 1e-6;
    double fd = (Y(0.3 + h, 0.2)[0] - Y(0.3 - h, 0.2)[0]) / (2 * h);
    CHECK(j[0].partial(0).value() == doctest::Approx(fd).epsilon(1e-5));
}

TEST_CASE("conjugation by a rotation shifts the flat data") {
    auto f = synthetic_flat_map(0.3, 0.4, 0.95, 0.5, 2.0, 2.0);
    CircleDiffeo rot(parse("x + 0.25"));
    auto h = conjugate_map(rot, f);
    REQUIRE(h.has_flat);
    CHECK(h.a == doctest::Approx(0.55));
    CHECK(h.b == doctest::Approx(0.65));
    CHECK(h.v == doctest::Approx(wrap01(0.95 + 0.25)));
    CHECK(h.eval(0.6) == doctest::Approx(h.v));
    CHECK(circle_dist(h.eval(0.1), wrap01(f.eval(0.1 - 0.25) + 0.25)) < 1e-12);

    CircleDiffeo id(parse("x"));
    auto g = conjugate_map(id, f);
    CHECK(g.a == doctest::Approx(f.a));
    CHECK(circle_dist(g.eval(0.77), f.eval(0.77)) < 1e-12);
}

TEST_CASE("conjugation wraps the flat piece across the seam") {
    auto f = synthetic_flat_map(0.3, 0.4, 0.95, 0.5, 2.0, 2.0);
    CircleDiffeo rot(parse("x + 0.65"));
    auto h = conjugate_map(rot, f);
    REQUIRE(h.has_flat);
    CHECK(h.a == doctest::Approx(0.95));
    CHECK(h.b == doctest::Approx(1.05)); // exceeds 1: wraps past the seam
    CHECK(h.in_flat(0.0));
    CHECK(h.in_flat(0.99));
    CHECK(!h.in_flat(0.5));
    CHECK(h.eval(0.01) == doctest::Approx(h.v));
}

TEST_CASE("conjugation preserves the rotation number") {
    auto f = rigid_rotation(0.3);
    CircleDiffeo phi(parse("x + 0.05*sin(2*pi*x)"));
    auto h = conjugate_map(phi, f);
    auto est = rotation_number(h, 10000);
    CHECK(std::abs(est.value - 0.3) <= est.enclosure + 1e-6);
}

TEST_CASE("equivariance of the cherry return map under a small diffeomorphism") {
    auto X = cherry_field();
    CircleDiffeo phi(parse("x + 0.03*sin(2*pi*x)"));
    ReturnMapOptions opt;
    opt.grid = 128;
    auto rep = verify_equivariance(phi, X, 128, opt, 1e-4);
    CHECK(rep.pass());
    CHECK(rep.find("equivariance/map-sup") != nullptr);
    CHECK(rep.find("equivariance/flat-hausdorff") != nullptr);
    CHECK(rep.find("equivariance/map-sup")->residual <= 1e-4);
}

TEST_CASE("synthetic map construction rejects bad parameters") {
    CHECK_THROWS_AS(synthetic_flat_map(0.5, 0.4, 0.9, 0.5, 2, 2), DomainError);
    CHECK_THROWS_AS(synthetic_flat_map(0.0, 0.4, 0.9, 0.5, 2, 2), DomainError);
    CHECK_THROWS_AS(synthetic_flat_map(0.3, 1.0, 0.9, 0.5, 2, 2), DomainError);
    CHECK_THROWS_AS(synthetic_flat_map(0.3, 0.4, 0.9, 1.5, 2, 2), DomainError);
    CHECK_THROWS_AS(synthetic_flat_map(0.3, 0.4, 0.9, 0.5, 0.5, 2), DomainError);
}
