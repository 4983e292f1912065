#pragma once

#include <array>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "bilag/expr.hpp"
#include "bilag/jet.hpp"
#include "bilag/report.hpp"

namespace bilag {

// canonical representative in [0, 1)
double wrap01(double u);
// distance on the circle of circumference 1
double circle_dist(double a, double b);

// Vector field on the 2-torus, components 1-periodic in both coordinates.
// Periodicity is checked on a 32x32 grid at construction (residual 1e-9).
// Evaluation works in the universal cover; jets power the Jacobians used by
// the singularity solver and by pushforwards.
class TorusVectorField {
public:
    using JetEval = std::function<std::array<Jet, 2>(double, double, int)>;

    TorusVectorField() = default;
    static TorusVectorField from_exprs(ExprPtr x_comp, ExprPtr y_comp);
    static TorusVectorField from_fn(JetEval fn);

    std::array<double, 2> operator()(double x, double y) const;
    std::array<Jet, 2> jets(double x, double y, int order) const;
    const ExprPtr& x_expr() const { return ex_; }
    const ExprPtr& y_expr() const { return ey_; }
    bool valid() const { return static_cast<bool>(fn_); }

private:
    JetEval fn_;
    ExprPtr ex_, ey_;
};

struct SingularityInfo {
    double x = 0, y = 0;
    std::array<double, 2> eig_re{0, 0};
    std::array<double, 2> eig_im{0, 0};
    std::string cls; // hyperbolic-sink | hyperbolic-saddle | hyperbolic-source | non-hyperbolic
};

// Newton refinement from a 64x64 seed grid; duplicates merged within 1e-6
// torus distance; classification from the Jacobian eigenvalues.
std::vector<SingularityInfo> find_singularities(const TorusVectorField& X);

// Passes iff the field has exactly one hyperbolic sink and one hyperbolic
// saddle. The no-closed-trajectory clause is reported as assumed, never
// decided.
VerificationReport validate_cherry(const TorusVectorField& X);

struct FlowOptions {
    double atol = 1e-10;
    double rtol = 1e-10;
    double tmax = 1e3;
};

// Fixed-time flow in the cover; the returned point is wrapped in x and y.
std::array<double, 2> flow_fixed(const TorusVectorField& X, std::array<double, 2> p, double t,
                                 const FlowOptions& opt = {});

struct SectionCrossing {
    std::array<double, 2> point{0, 0}; // x wrapped, y at the section level
    double time = 0;
    bool captured = false;
    std::string note; // "sink-ball" or "tmax" when captured
};

// Integrates from p in the cover until y first reaches section_y (crossing
// localized to |y - c| <= 1e-10), or until capture: entering the 1e-3 ball
// around `sink` or exceeding opt.tmax.
SectionCrossing flow_to_section(const TorusVectorField& X, std::array<double, 2> p,
                                double section_y, const FlowOptions& opt = {},
                                std::optional<std::array<double, 2>> sink = {},
                                double capture_radius = 1e-3);

// Degree-one circle map, diffeomorphic off a flat interval (a, b) that maps
// to the single value v. Empty flat piece (width 0) marks a plain circle
// diffeomorphism. The callable is exact; the sampled graph (on the
// complement of the flat piece) feeds rotation numbers and CSV output.
struct CircleMapWithFlat {
    bool has_flat = false;
    double a = 0, b = 0; // b may exceed 1 when the flat piece wraps past x=1
    double v = 0;
    std::function<double(double)> fn;            // wrapped values in [0,1)
    std::function<double(double)> transit_time;  // empty when not flow-backed
    std::vector<double> xs, fs, ts;              // sampled graph over the complement
    std::string warning;

    double eval(double x) const;       // flat-aware, wrapped
    double width() const { return has_flat ? b - a : 0.0; }
    bool in_flat(double x) const;
};

struct ReturnMapOptions {
    int grid = 512;
    double tmax = 1e3;
    double capture_radius = 1e-3;
    double endpoint_tol = 1e-8; // bisection width for the flat endpoints
    FlowOptions flow{};
};

// First-return map of the section pair y=0 -> y=1. Captured starts form the
// flat piece; endpoints are refined by bisection on reach-vs-capture, the
// flat value is the common one-sided limit (gap beyond 1e-4 is an error).
// Fields with no capture region come back with an empty flat piece and a
// warning.
CircleMapWithFlat return_map(const TorusVectorField& X, const ReturnMapOptions& opt = {});

// Class-L family with prescribed flat piece, value, and endpoint exponents:
// v - A_l (a-x)^l1 on [0,a] and v + A_r (x-b)^l2 on [b,1], where A_l a^l1 =
// zeta and A_r (1-b)^l2 = 1-zeta fix degree-one continuity across 0.
CircleMapWithFlat synthetic_flat_map(double a, double b, double v, double zeta, double ell_left,
                                     double ell_right);
CircleMapWithFlat rigid_rotation(double alpha);
// wraps an arbitrary monotone degree-one lift F (no flat piece)
CircleMapWithFlat diffeo_map(std::function<double(double)> lift);

struct RotationNumberEstimate {
    double value = 0;     // in [0, 1)
    long iterations = 0;
    double enclosure = 0; // width 2/N centred at value
};

// Lift built by unwrapping the sampled graph (linear interpolation between
// samples, constant across the flat piece); returns F^N(0)/N.
RotationNumberEstimate rotation_number(const CircleMapWithFlat& f, long N);

struct ExponentFit {
    double ell_left = 0, ell_right = 0;
    double r2_left = 0, r2_right = 0;
    int points_left = 0, points_right = 0;
};

// Log-log least squares of |f(a -/+ delta) - v| against delta over a ladder
// in [1e-5, 1e-2], evaluated through the exact callable.
ExponentFit critical_exponents(const CircleMapWithFlat& f);

// Piecewise map f1 on [0,a1], constant v1 on (a1,b2), f2 on [b2,1].
// Requires a1 < a2 <= b1 < b2 and matching flat values within 1e-6.
CircleMapWithFlat glue(const CircleMapWithFlat& f1, const CircleMapWithFlat& f2);

// Monotone degree-one circle diffeomorphism from an expression in x; the
// inverse is computed by bracketed Newton on the lift.
class CircleDiffeo {
public:
    explicit CircleDiffeo(ExprPtr e);
    double operator()(double x) const; // lift value
    double inverse(double y) const;
    double deriv(double x) const;
    Jet jet(double x, int order) const;
    const ExprPtr& expr() const { return expr_; }

private:
    ExprPtr expr_;
    std::shared_ptr<const CompiledExpr> comp_;
    double off_lo_ = 0, off_hi_ = 0; // range of phi(x) - x, for bracketing
};

// Torus diffeomorphism given by explicit forward and inverse component
// expressions in (x, y). Degree-one compatibility (integer displacement
// under unit translations) and the inverse identity are checked on a 32x32
// grid at construction.
class TorusDiffeo {
public:
    TorusDiffeo(ExprPtr fx, ExprPtr fy, ExprPtr ix, ExprPtr iy);
    std::array<double, 2> operator()(double x, double y) const;
    std::array<double, 2> inv(double x, double y) const;
    std::array<Jet, 2> jets(double x, double y, int order) const;
    std::array<Jet, 2> inv_jets(double x, double y, int order) const;

private:
    std::array<std::shared_ptr<const CompiledExpr>, 4> comp_;
};

// (phi_* X)(q) = Dphi(phi^-1 q) X(phi^-1 q); the result is re-validated
// (periodicity, singularity count and classes preserved).
TorusVectorField pushforward_torus_field(const TorusDiffeo& phi, const TorusVectorField& X);
// pushforward along (x, y) -> (phi(x), y) for a circle diffeomorphism
TorusVectorField pushforward_torus_field(const CircleDiffeo& phi, const TorusVectorField& X);

// phi . f . phi^-1 with flat piece (phi(a), phi(b)) and value phi(v)
CircleMapWithFlat conjugate_map(const CircleDiffeo& phi, const CircleMapWithFlat& f);

// Compares the map generated by phi_* X with the conjugate of the map
// generated by X: sup distance on a grid plus the Hausdorff distance of the
// flat pieces. phi acts as (circle diffeo) x (identity) so the section
// circles are preserved.
VerificationReport verify_equivariance(const CircleDiffeo& phi, const TorusVectorField& X,
                                       int grid = 256, const ReturnMapOptions& opt = {},
                                       double tol = 1e-4);

} // namespace bilag
