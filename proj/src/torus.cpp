#include "bilag/torus.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <limits>
#include <map>
#include <utility>

#include "bilag/errors.hpp"
#include "bilag/parallel.hpp"

namespace bilag {

double wrap01(double u) {
    double w = u - std::floor(u);
    if (w >= 1.0) w -= 1.0; // floor rounding at the seam
    return w;
}

double circle_dist(double a, double b) {
    double d = wrap01(a - b);
    return std::min(d, 1.0 - d);
}

// ------------------------------------------------------------- vector field

namespace {

void check_periodicity(const TorusVectorField& X) {
    const int n = 32;
    double worst = 0.0;
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            double x = static_cast<double>(i) / n, y = static_cast<double>(j) / n;
            auto v0 = X(x, y);
            auto vx = X(x + 1.0, y);
            auto vy = X(x, y + 1.0);
            for (int k = 0; k < 2; ++k) {
                worst = std::max(worst, std::abs(vx[k] - v0[k]));
                worst = std::max(worst, std::abs(vy[k] - v0[k]));
            }
        }
    if (worst > 1e-9)
        throw DomainError("torus field is not 1-periodic (residual " + std::to_string(worst) +
                          " on a 32x32 grid)");
}

} // namespace

TorusVectorField TorusVectorField::from_exprs(ExprPtr x_comp, ExprPtr y_comp) {
    const std::vector<std::string> vars = {"x", "y"};
    auto cx = std::make_shared<CompiledExpr>(x_comp, vars);
    auto cy = std::make_shared<CompiledExpr>(y_comp, vars);
    TorusVectorField X;
    X.ex_ = std::move(x_comp);
    X.ey_ = std::move(y_comp);
    X.fn_ = [cx, cy](double x, double y, int order) {
        const std::array<double, 2> p{x, y};
        return std::array<Jet, 2>{cx->jet(p, order), cy->jet(p, order)};
    };
    check_periodicity(X);
    return X;
}

TorusVectorField TorusVectorField::from_fn(JetEval fn) {
    TorusVectorField X;
    X.fn_ = std::move(fn);
    check_periodicity(X);
    return X;
}

std::array<double, 2> TorusVectorField::operator()(double x, double y) const {
    auto j = fn_(x, y, 0);
    return {j[0].value(), j[1].value()};
}

std::array<Jet, 2> TorusVectorField::jets(double x, double y, int order) const {
    return fn_(x, y, order);
}

// ---------------------------------------------------------------- integrator

namespace {

struct RkState {
    double x, y, t;
};

// Dormand-Prince 5(4) tableau
constexpr double A21 = 1.0 / 5;
constexpr double A31 = 3.0 / 40, A32 = 9.0 / 40;
constexpr double A41 = 44.0 / 45, A42 = -56.0 / 15, A43 = 32.0 / 9;
constexpr double A51 = 19372.0 / 6561, A52 = -25360.0 / 2187, A53 = 64448.0 / 6561,
                 A54 = -212.0 / 729;
constexpr double A61 = 9017.0 / 3168, A62 = -355.0 / 33, A63 = 46732.0 / 5247, A64 = 49.0 / 176,
                 A65 = -5103.0 / 18656;
constexpr double B1 = 35.0 / 384, B3 = 500.0 / 1113, B4 = 125.0 / 192, B5 = -2187.0 / 6784,
                 B6 = 11.0 / 84;
constexpr double E1 = 71.0 / 57600, E3 = -71.0 / 16695, E4 = 71.0 / 1920, E5 = -17253.0 / 339200,
                 E6 = 22.0 / 525, E7 = -1.0 / 40;

struct Stepper {
    const TorusVectorField& X;
    double atol, rtol;
    double h = 1e-3;

    std::array<double, 2> f(double x, double y) const { return X(x, y); }

    // one adaptive step from s with |h| <= |hmax|; updates s and suggests the
    // next h. Returns the actually used step size.
    double step(RkState& s, double hmax_signed) {
        double dir = hmax_signed >= 0 ? 1.0 : -1.0;
        double hctl = std::abs(h);
        for (int tries = 0; tries < 200; ++tries) {
            double hs = dir * std::min(hctl, std::abs(hmax_signed));
            auto k1 = f(s.x, s.y);
            auto k2 = f(s.x + hs * A21 * k1[0], s.y + hs * A21 * k1[1]);
            auto k3 = f(s.x + hs * (A31 * k1[0] + A32 * k2[0]),
                        s.y + hs * (A31 * k1[1] + A32 * k2[1]));
            auto k4 = f(s.x + hs * (A41 * k1[0] + A42 * k2[0] + A43 * k3[0]),
                        s.y + hs * (A41 * k1[1] + A42 * k2[1] + A43 * k3[1]));
            auto k5 = f(s.x + hs * (A51 * k1[0] + A52 * k2[0] + A53 * k3[0] + A54 * k4[0]),
                        s.y + hs * (A51 * k1[1] + A52 * k2[1] + A53 * k3[1] + A54 * k4[1]));
            auto k6 = f(s.x + hs * (A61 * k1[0] + A62 * k2[0] + A63 * k3[0] + A64 * k4[0] +
                                    A65 * k5[0]),
                        s.y + hs * (A61 * k1[1] + A62 * k2[1] + A63 * k3[1] + A64 * k4[1] +
                                    A65 * k5[1]));
            double nx = s.x + hs * (B1 * k1[0] + B3 * k3[0] + B4 * k4[0] + B5 * k5[0] + B6 * k6[0]);
            double ny = s.y + hs * (B1 * k1[1] + B3 * k3[1] + B4 * k4[1] + B5 * k5[1] + B6 * k6[1]);
            auto k7 = f(nx, ny);
            double ex = hs * (E1 * k1[0] + E3 * k3[0] + E4 * k4[0] + E5 * k5[0] + E6 * k6[0] +
                              E7 * k7[0]);
            double ey = hs * (E1 * k1[1] + E3 * k3[1] + E4 * k4[1] + E5 * k5[1] + E6 * k6[1] +
                              E7 * k7[1]);
            double sx = atol + rtol * std::max(std::abs(s.x), std::abs(nx));
            double sy = atol + rtol * std::max(std::abs(s.y), std::abs(ny));
            double err = std::sqrt(0.5 * ((ex / sx) * (ex / sx) + (ey / sy) * (ey / sy)));
            if (err <= 1.0) {
                s.x = nx;
                s.y = ny;
                s.t += hs;
                double grow = err == 0.0 ? 5.0 : std::clamp(0.9 * std::pow(err, -0.2), 0.2, 5.0);
                h = std::clamp(std::abs(hs) * grow, 1e-12, 0.5);
                return hs;
            }
            hctl = std::abs(hs) * std::clamp(0.9 * std::pow(err, -0.2), 0.1, 0.9);
            if (hctl < 1e-13) throw DomainError("step-size underflow in torus flow");
        }
        throw DomainError("step-size control failed to converge in torus flow");
    }
};

RkState integrate_fixed(const TorusVectorField& X, RkState s, double T, const FlowOptions& opt) {
    if (T == 0.0) return s;
    Stepper st{X, opt.atol, opt.rtol};
    double target = s.t + T;
    double dir = T >= 0 ? 1.0 : -1.0;
    while (dir * (target - s.t) > 1e-14) st.step(s, target - s.t);
    return s;
}

} // namespace

std::array<double, 2> flow_fixed(const TorusVectorField& X, std::array<double, 2> p, double t,
                                 const FlowOptions& opt) {
    RkState s{p[0], p[1], 0.0};
    s = integrate_fixed(X, s, t, opt);
    return {wrap01(s.x), wrap01(s.y)};
}

SectionCrossing flow_to_section(const TorusVectorField& X, std::array<double, 2> p,
                                double section_y, const FlowOptions& opt,
                                std::optional<std::array<double, 2>> sink,
                                double capture_radius) {
    Stepper st{X, opt.atol, opt.rtol};
    RkState s{p[0], p[1], 0.0};
    const double c = section_y;
    auto side = [c](const RkState& q) { return q.y - c; };
    if (std::abs(side(s)) <= 1e-10)
        return {{wrap01(s.x), s.y}, 0.0, false, ""};
    while (true) {
        RkState prev = s;
        st.step(s, opt.tmax - s.t + 1.0);
        if (side(prev) * side(s) <= 0.0) {
            // crossing inside this step; bisect on the sub-time
            RkState left = prev;
            double lo = 0.0, hi = s.t - prev.t;
            RkState probe = s;
            for (int it = 0; it < 200 && std::abs(side(probe)) > 1e-10; ++it) {
                double mid = 0.5 * (lo + hi);
                probe = integrate_fixed(X, left, mid - lo, opt);
                if (side(left) * side(probe) > 0.0) {
                    left = probe;
                    lo = mid;
                } else {
                    hi = mid;
                }
                if (hi - lo < 1e-16) break;
            }
            if (std::abs(side(probe)) > 1e-10) probe = left;
            return {{wrap01(probe.x), probe.y}, probe.t, false, ""};
        }
        if (sink) {
            double d = std::hypot(circle_dist(s.x, (*sink)[0]), circle_dist(s.y, (*sink)[1]));
            if (d <= capture_radius) return {{wrap01(s.x), wrap01(s.y)}, s.t, true, "sink-ball"};
        }
        if (s.t > opt.tmax) return {{wrap01(s.x), wrap01(s.y)}, s.t, true, "tmax"};
    }
}

// -------------------------------------------------------------- singularities

std::vector<SingularityInfo> find_singularities(const TorusVectorField& X) {
    const int n = 64;
    std::vector<SingularityInfo> found;
    auto classify = [&](double x, double y) {
        auto j = X.jets(x, y, 1);
        double j11 = j[0].partial(0).value(), j12 = j[0].partial(1).value();
        double j21 = j[1].partial(0).value(), j22 = j[1].partial(1).value();
        double tr = j11 + j22, det = j11 * j22 - j12 * j21;
        double disc = tr * tr - 4.0 * det;
        SingularityInfo s;
        s.x = wrap01(x);
        s.y = wrap01(y);
        if (disc >= 0.0) {
            double r = std::sqrt(disc);
            s.eig_re = {(tr - r) / 2.0, (tr + r) / 2.0};
            s.eig_im = {0.0, 0.0};
        } else {
            double im = std::sqrt(-disc) / 2.0;
            s.eig_re = {tr / 2.0, tr / 2.0};
            s.eig_im = {-im, im};
        }
        const double hyp = 1e-6;
        bool real = s.eig_im[0] == 0.0;
        if (std::abs(s.eig_re[0]) <= hyp || std::abs(s.eig_re[1]) <= hyp)
            s.cls = "non-hyperbolic";
        else if (real && s.eig_re[0] * s.eig_re[1] < 0.0)
            s.cls = "hyperbolic-saddle";
        else if (s.eig_re[0] < 0.0 && s.eig_re[1] < 0.0)
            s.cls = "hyperbolic-sink";
        else
            s.cls = "hyperbolic-source";
        return s;
    };

    for (int i = 0; i < n; ++i)
        for (int jj = 0; jj < n; ++jj) {
            double x = static_cast<double>(i) / n, y = static_cast<double>(jj) / n;
            bool ok = false;
            for (int it = 0; it < 40; ++it) {
                auto v = X(x, y);
                double nv = std::hypot(v[0], v[1]);
                if (nv <= 1e-13) {
                    ok = true;
                    break;
                }
                if (nv > 1e3) break;
                auto jx = X.jets(x, y, 1);
                double a = jx[0].partial(0).value(), b = jx[0].partial(1).value();
                double cc = jx[1].partial(0).value(), d = jx[1].partial(1).value();
                double det = a * d - b * cc;
                if (std::abs(det) < 1e-14) break;
                double dx = (d * v[0] - b * v[1]) / det;
                double dy = (-cc * v[0] + a * v[1]) / det;
                double len = std::hypot(dx, dy);
                if (len > 0.2) {
                    dx *= 0.2 / len;
                    dy *= 0.2 / len;
                }
                x -= dx;
                y -= dy;
            }
            if (!ok) continue;
            auto v = X(x, y);
            if (std::hypot(v[0], v[1]) > 1e-10) continue;
            double wx = wrap01(x), wy = wrap01(y);
            bool dup = false;
            for (const auto& s : found)
                if (circle_dist(s.x, wx) <= 1e-6 && circle_dist(s.y, wy) <= 1e-6) {
                    dup = true;
                    break;
                }
            if (!dup) found.push_back(classify(x, y));
        }
    std::sort(found.begin(), found.end(), [](const SingularityInfo& a, const SingularityInfo& b) {
        return a.y != b.y ? a.y < b.y : a.x < b.x;
    });
    return found;
}

VerificationReport validate_cherry(const TorusVectorField& X) {
    auto sing = find_singularities(X);
    int sinks = 0, saddles = 0;
    double min_hyp = std::numeric_limits<double>::infinity();
    std::string listing;
    for (const auto& s : sing) {
        if (s.cls == "hyperbolic-sink") ++sinks;
        if (s.cls == "hyperbolic-saddle") ++saddles;
        min_hyp = std::min(min_hyp, std::min(std::abs(s.eig_re[0]), std::abs(s.eig_re[1])));
        if (!listing.empty()) listing += "; ";
        listing += s.cls + " at (" + std::to_string(s.x) + ", " + std::to_string(s.y) + ")";
    }
    if (sing.empty()) {
        min_hyp = 0.0;
        listing = "none";
    }
    VerificationReport rep;
    rep.title = "cherry";
    rep.add(CheckResult::upper("cherry/singularities",
                               std::abs(static_cast<double>(sing.size()) - 2.0), 0.0,
                               static_cast<int>(sing.size()), "", listing));
    rep.add(CheckResult::upper("cherry/sink", sinks == 1 ? 0.0 : 1.0, 0.0, 1));
    rep.add(CheckResult::upper("cherry/saddle", saddles == 1 ? 0.0 : 1.0, 0.0, 1));
    rep.add(CheckResult::lower("cherry/hyperbolic", min_hyp, 1e-6,
                               static_cast<int>(sing.size())));
    rep.add(CheckResult::upper("cherry/closed-orbit-free", 0.0, 0.0, 0, "",
                               "assumed, not decided"));
    return rep;
}

// ----------------------------------------------------------------- flat maps

bool CircleMapWithFlat::in_flat(double x) const {
    if (!has_flat) return false;
    double rel = wrap01(x - a);
    return rel > 0.0 && rel < b - a;
}

double CircleMapWithFlat::eval(double x) const {
    if (in_flat(x)) return v;
    return fn(wrap01(x));
}

namespace {

std::vector<double> uniform_grid(int n) {
    std::vector<double> xs(n);
    for (int i = 0; i < n; ++i) xs[i] = static_cast<double>(i) / n;
    return xs;
}

void resample(CircleMapWithFlat& m, int n) {
    m.xs.clear();
    m.fs.clear();
    m.ts.clear();
    for (double x : uniform_grid(n)) {
        if (m.in_flat(x)) continue;
        m.xs.push_back(x);
        m.fs.push_back(m.fn(x));
    }
}

} // namespace

CircleMapWithFlat synthetic_flat_map(double a, double b, double v, double zeta, double ell_left,
                                     double ell_right) {
    if (!(0.0 < a && a < b && b < 1.0))
        throw DomainError("synthetic flat map needs 0 < a < b < 1");
    if (!(zeta > 0.0 && zeta < 1.0)) throw DomainError("synthetic flat map needs zeta in (0,1)");
    if (ell_left < 1.0 || ell_right < 1.0)
        throw DomainError("critical exponents below 1 break monotonicity");
    double Al = zeta / std::pow(a, ell_left);
    double Ar = (1.0 - zeta) / std::pow(1.0 - b, ell_right);
    CircleMapWithFlat m;
    m.has_flat = true;
    m.a = a;
    m.b = b;
    m.v = wrap01(v);
    double vv = m.v;
    m.fn = [a, b, vv, Al, Ar, ell_left, ell_right](double x) {
        x = wrap01(x);
        if (x <= a) return wrap01(vv - Al * std::pow(a - x, ell_left));
        if (x >= b) return wrap01(vv + Ar * std::pow(x - b, ell_right));
        return vv;
    };
    resample(m, 512);
    return m;
}

CircleMapWithFlat rigid_rotation(double alpha) {
    CircleMapWithFlat m;
    m.fn = [alpha](double x) { return wrap01(x + alpha); };
    resample(m, 512);
    return m;
}

CircleMapWithFlat diffeo_map(std::function<double(double)> lift) {
    CircleMapWithFlat m;
    m.fn = [lift](double x) { return wrap01(lift(wrap01(x))); };
    resample(m, 512);
    return m;
}

// ---------------------------------------------------------------- return map

CircleMapWithFlat return_map(const TorusVectorField& X, const ReturnMapOptions& opt) {
    FlowOptions fopt = opt.flow;
    fopt.tmax = opt.tmax;
    std::optional<std::array<double, 2>> sink;
    for (const auto& s : find_singularities(X))
        if (s.cls == "hyperbolic-sink") sink = std::array<double, 2>{s.x, s.y};

    const int N = opt.grid;
    std::vector<double> fx(N), ft(N);
    std::vector<char> cap(N, 0);
    parallel_for(N, [&](int i) {
        double x = static_cast<double>(i) / N;
        auto cr = flow_to_section(X, {x, 0.0}, 1.0, fopt, sink, opt.capture_radius);
        fx[i] = cr.point[0];
        ft[i] = cr.time;
        cap[i] = cr.captured ? 1 : 0;
    });

    auto transit_x = [=](double x) {
        return flow_to_section(X, {wrap01(x), 0.0}, 1.0, fopt, sink, opt.capture_radius);
    };

    CircleMapWithFlat m;
    int ncap = 0;
    for (char c : cap) ncap += c;
    if (ncap == N) throw DomainError("every section start is captured; there is no return map");

    int s0 = -1, len = 0;
    if (ncap == 0) {
        m.has_flat = false;
        m.warning = "no capture region found; the return map is a circle diffeomorphism";
    } else {
        int starts = 0;
        for (int i = 0; i < N; ++i)
            if (cap[i] && !cap[(i + N - 1) % N]) {
                ++starts;
                s0 = i;
            }
        if (starts != 1) throw DomainError("capture region is not a single arc");
        while (cap[(s0 + len) % N]) ++len;

        // refine both edges in cover coordinates around the arc
        auto captured_at = [&](double x) { return transit_x(x).captured; };
        double lo = static_cast<double>(s0 - 1) / N, hi = static_cast<double>(s0) / N;
        while (hi - lo > opt.endpoint_tol) {
            double mid = 0.5 * (lo + hi);
            (captured_at(mid) ? hi : lo) = mid;
        }
        double a_cov = 0.5 * (lo + hi);
        lo = static_cast<double>(s0 + len - 1) / N;
        hi = static_cast<double>(s0 + len) / N;
        while (hi - lo > opt.endpoint_tol) {
            double mid = 0.5 * (lo + hi);
            (captured_at(mid) ? lo : hi) = mid;
        }
        double b_cov = 0.5 * (lo + hi);

        double shift = std::floor(a_cov);
        m.has_flat = true;
        m.a = a_cov - shift;
        m.b = b_cov - shift;

        // common value of the two one-sided limits
        double dv = 1e-7;
        auto crl = transit_x(a_cov - dv);
        auto crr = transit_x(b_cov + dv);
        if (crl.captured || crr.captured)
            throw CheckError("points just outside the flat piece are still captured; "
                             "endpoint refinement is inconsistent");
        double gap = circle_dist(crl.point[0], crr.point[0]);
        if (gap > 1e-4)
            throw CheckError("inconsistent one-sided limits at the flat piece (gap " +
                             std::to_string(gap) + ")");
        double vl = crl.point[0];
        double diff = wrap01(crr.point[0] - vl);
        if (diff > 0.5) diff -= 1.0;
        m.v = wrap01(vl + 0.5 * diff);
    }

    // sampled graph over the complement, in cyclic order starting after the
    // flat piece so the monotonicity scan needs no special seam handling
    const int first = m.has_flat ? (s0 + len) % N : 0;
    std::vector<int> order;
    order.reserve(N - ncap);
    for (int k = 0; k < N; ++k) {
        int idx = (first + k) % N;
        if (!cap[idx]) order.push_back(idx);
    }

    double prev_lift = 0.0;
    bool have_prev = false;
    int inversions = 0;
    for (int idx : order) {
        double val = fx[idx];
        if (!have_prev) {
            prev_lift = val;
            have_prev = true;
        } else {
            double inc = wrap01(val - prev_lift);
            if (inc > 1.0 - 1e-9) inc -= 1.0; // tiny negative step wrapped around
            if (inc < -1e-9) ++inversions;
            prev_lift += inc;
        }
    }
    if (inversions > 0)
        throw CheckError("return map is not monotone off the flat piece (" +
                         std::to_string(inversions) + " inversions)");

    m.xs.reserve(order.size());
    m.fs.reserve(order.size());
    m.ts.reserve(order.size());
    std::vector<std::pair<double, std::pair<double, double>>> rows;
    rows.reserve(order.size());
    for (int idx : order)
        rows.push_back({static_cast<double>(idx) / N, {fx[idx], ft[idx]}});
    std::sort(rows.begin(), rows.end());
    for (const auto& r : rows) {
        m.xs.push_back(r.first);
        m.fs.push_back(r.second.first);
        m.ts.push_back(r.second.second);
    }

    double va = m.has_flat ? m.v : 0.0;
    bool hf = m.has_flat;
    double aa = m.a, bb = m.b;
    m.fn = [transit_x, va, hf, aa, bb](double x) {
        x = wrap01(x);
        if (hf) {
            double rel = wrap01(x - aa);
            if (rel > 0.0 && rel < bb - aa) return va;
        }
        auto cr = transit_x(x);
        return cr.captured ? va : cr.point[0];
    };
    m.transit_time = [transit_x](double x) {
        auto cr = transit_x(x);
        return cr.captured ? -1.0 : cr.time;
    };
    return m;
}

// ------------------------------------------------------------ rotation number

namespace {

struct SampledLift {
    std::vector<double> kx, ky; // knots on [kx0, kx0+1), unwrapped values

    double operator()(double x) const {
        double k = std::floor(x - kx.front());
        double xi = x - k;
        if (xi < kx.front()) xi = kx.front(); // floor rounding guard
        // find interval [kx[j], kx[j+1]) with the wrap interval at the end
        auto it = std::upper_bound(kx.begin(), kx.end(), xi);
        std::size_t j = static_cast<std::size_t>(it - kx.begin());
        double x0, x1, y0, y1;
        if (j == 0 || j > kx.size()) throw DomainError("lift evaluation out of range");
        x0 = kx[j - 1];
        y0 = ky[j - 1];
        if (j == kx.size()) {
            x1 = kx.front() + 1.0;
            y1 = ky.front() + 1.0;
        } else {
            x1 = kx[j];
            y1 = ky[j];
        }
        double t = x1 > x0 ? (xi - x0) / (x1 - x0) : 0.0;
        return y0 + t * (y1 - y0) + k;
    }
};

SampledLift build_lift(const CircleMapWithFlat& f) {
    std::vector<std::pair<double, double>> pts;
    for (std::size_t i = 0; i < f.xs.size(); ++i) pts.push_back({wrap01(f.xs[i]), wrap01(f.fs[i])});
    if (f.has_flat) {
        pts.push_back({wrap01(f.a), wrap01(f.v)});
        pts.push_back({wrap01(f.b), wrap01(f.v)});
    }
    if (pts.size() < 2) throw DomainError("not enough samples to build a lift");
    std::sort(pts.begin(), pts.end());
    SampledLift L;
    double prev_x = -1.0, prev_y = 0.0;
    for (const auto& [x, y] : pts) {
        if (!L.kx.empty() && x - prev_x < 1e-12) continue; // duplicate knot
        double yy = y;
        if (!L.kx.empty()) {
            double m = std::ceil(prev_y - 1e-9 - yy);
            yy += m;
            if (yy - prev_y < -1e-9 || yy - prev_y > 1.0 + 1e-9)
                throw DomainError("non-monotone samples in rotation-number lift");
        }
        L.kx.push_back(x);
        L.ky.push_back(yy);
        prev_x = x;
        prev_y = yy;
    }
    // seam: continuing to kx0 + 1 must rise to ky0 + 1
    double inc = L.ky.front() + 1.0 - L.ky.back();
    if (inc < -1e-9 || inc > 1.0 + 1e-9)
        throw DomainError("non-monotone samples in rotation-number lift");
    return L;
}

} // namespace

RotationNumberEstimate rotation_number(const CircleMapWithFlat& f, long N) {
    if (N < 1) throw DomainError("rotation number needs at least one iteration");
    SampledLift L = build_lift(f);
    double x = 0.0;
    for (long k = 0; k < N; ++k) x = L(x);
    RotationNumberEstimate est;
    est.value = wrap01(x / static_cast<double>(N));
    est.iterations = N;
    est.enclosure = 2.0 / static_cast<double>(N);
    return est;
}

// --------------------------------------------------------- critical exponents

namespace {

std::pair<double, double> loglog_fit(const std::vector<double>& lx, const std::vector<double>& ly) {
    const double n = static_cast<double>(lx.size());
    double sx = 0, sy = 0, sxx = 0, sxy = 0, syy = 0;
    for (std::size_t i = 0; i < lx.size(); ++i) {
        sx += lx[i];
        sy += ly[i];
        sxx += lx[i] * lx[i];
        sxy += lx[i] * ly[i];
        syy += ly[i] * ly[i];
    }
    double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    double r2num = (n * sxy - sx * sy) * (n * sxy - sx * sy);
    double r2den = (n * sxx - sx * sx) * (n * syy - sy * sy);
    double r2 = r2den > 0 ? r2num / r2den : 0.0;
    return {slope, r2};
}

} // namespace

ExponentFit critical_exponents(const CircleMapWithFlat& f) {
    if (!f.has_flat) throw DomainError("critical exponents need a non-empty flat piece");
    ExponentFit fit;
    auto side = [&](double endpoint, double sign, double& ell, double& r2, int& npts) {
        std::vector<double> lx, ly;
        const int n = 25;
        for (int j = 0; j < n; ++j) {
            double d = std::pow(10.0, -5.0 + 3.0 * j / (n - 1.0));
            double val = f.eval(endpoint + sign * d);
            double dist = circle_dist(val, f.v);
            if (dist <= 1e-13) continue;
            lx.push_back(std::log(d));
            ly.push_back(std::log(dist));
        }
        npts = static_cast<int>(lx.size());
        if (npts < 5)
            throw DomainError("insufficient resolution near the flat piece for an exponent fit");
        auto [slope, rsq] = loglog_fit(lx, ly);
        ell = slope;
        r2 = rsq;
    };
    side(f.a, -1.0, fit.ell_left, fit.r2_left, fit.points_left);
    side(f.b, +1.0, fit.ell_right, fit.r2_right, fit.points_right);
    return fit;
}

// ----------------------------------------------------------------------- glue

CircleMapWithFlat glue(const CircleMapWithFlat& f1, const CircleMapWithFlat& f2) {
    if (!f1.has_flat || !f2.has_flat) throw DomainError("glue needs two maps with flat pieces");
    if (f1.b >= 1.0 || f2.b >= 1.0)
        throw DomainError("glue needs flat pieces contained in (0,1)");
    double a1 = f1.a, b1 = f1.b, a2 = f2.a, b2 = f2.b;
    if (!(a1 < a2 && a2 <= b1 && b1 < b2))
        throw DomainError("glue ordering violated: need a1 < a2 <= b1 < b2");
    if (std::abs(f1.v - f2.v) > 1e-6)
        throw DomainError("glue needs matching flat values (difference " +
                          std::to_string(std::abs(f1.v - f2.v)) + ")");
    CircleMapWithFlat m;
    m.has_flat = true;
    m.a = a1;
    m.b = b2;
    m.v = f1.v;
    auto g1 = f1.fn;
    auto g2 = f2.fn;
    double vv = m.v;
    m.fn = [a1, b2, vv, g1, g2](double x) {
        x = wrap01(x);
        if (x <= a1) return g1(x);
        if (x >= b2) return g2(x);
        return vv;
    };
    resample(m, 512);
    return m;
}

// -------------------------------------------------------------- circle diffeo

CircleDiffeo::CircleDiffeo(ExprPtr e) : expr_(std::move(e)) {
    comp_ = std::make_shared<CompiledExpr>(expr_, std::vector<std::string>{"x"});
    const int n = 256;
    double lo = std::numeric_limits<double>::infinity(), hi = -lo;
    double worst_deg = 0.0, min_deriv = std::numeric_limits<double>::infinity();
    for (int i = 0; i < n; ++i) {
        double x = static_cast<double>(i) / n;
        std::array<double, 1> p{x};
        std::array<double, 1> p1{x + 1.0};
        double fx = (*comp_)(p);
        worst_deg = std::max(worst_deg, std::abs((*comp_)(p1) - fx - 1.0));
        lo = std::min(lo, fx - x);
        hi = std::max(hi, fx - x);
        min_deriv = std::min(min_deriv, comp_->jet(p, 1).partial(0).value());
    }
    if (worst_deg > 1e-9)
        throw DomainError("circle diffeomorphism must be a degree-one lift (residual " +
                          std::to_string(worst_deg) + ")");
    if (min_deriv < 1e-6)
        throw DomainError("circle diffeomorphism must be strictly increasing (min slope " +
                          std::to_string(min_deriv) + ")");
    off_lo_ = lo - 0.02;
    off_hi_ = hi + 0.02;
}

double CircleDiffeo::operator()(double x) const {
    std::array<double, 1> p{x};
    return (*comp_)(p);
}

double CircleDiffeo::deriv(double x) const {
    std::array<double, 1> p{x};
    return comp_->jet(p, 1).partial(0).value();
}

Jet CircleDiffeo::jet(double x, int order) const {
    std::array<double, 1> p{x};
    return comp_->jet(p, order);
}

double CircleDiffeo::inverse(double y) const {
    double lo = y - off_hi_, hi = y - off_lo_;
    for (int it = 0; it < 200; ++it) {
        double mid = 0.5 * (lo + hi);
        double fm = (*this)(mid);
        if (std::abs(fm - y) <= 1e-14) return mid;
        // Newton candidate, kept only inside the bracket
        double d = deriv(mid);
        if (d > 1e-9) {
            double xn = mid - (fm - y) / d;
            if (xn > lo && xn < hi) {
                double fn_ = (*this)(xn);
                if (std::abs(fn_ - y) <= 1e-14) return xn;
                if ((fn_ - y) * ((*this)(lo)-y) > 0.0) lo = xn;
                else hi = xn;
            }
        }
        if ((fm - y) * ((*this)(lo)-y) > 0.0) lo = mid;
        else hi = mid;
        if (hi - lo < 1e-15) break;
    }
    return 0.5 * (lo + hi);
}

// --------------------------------------------------------------- torus diffeo

TorusDiffeo::TorusDiffeo(ExprPtr fx, ExprPtr fy, ExprPtr ix, ExprPtr iy) {
    const std::vector<std::string> vars = {"x", "y"};
    comp_[0] = std::make_shared<CompiledExpr>(std::move(fx), vars);
    comp_[1] = std::make_shared<CompiledExpr>(std::move(fy), vars);
    comp_[2] = std::make_shared<CompiledExpr>(std::move(ix), vars);
    comp_[3] = std::make_shared<CompiledExpr>(std::move(iy), vars);

    const int n = 32;
    std::array<std::array<double, 2>, 2> deg{};
    bool first = true;
    double worst_deg = 0.0, worst_inv = 0.0;
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            double x = static_cast<double>(i) / n, y = static_cast<double>(j) / n;
            auto at = [&](int k, double px, double py) {
                std::array<double, 2> p{px, py};
                return (*comp_[k])(p);
            };
            for (int axis = 0; axis < 2; ++axis) {
                double dx = axis == 0 ? 1.0 : 0.0, dy = axis == 0 ? 0.0 : 1.0;
                std::array<double, 2> d{at(0, x + dx, y + dy) - at(0, x, y),
                                        at(1, x + dx, y + dy) - at(1, x, y)};
                for (int k = 0; k < 2; ++k) {
                    double r = std::abs(d[k] - std::round(d[k]));
                    worst_deg = std::max(worst_deg, r);
                    if (first) deg[axis][k] = std::round(d[k]);
                    else worst_deg = std::max(worst_deg, std::abs(d[k] - deg[axis][k]));
                }
            }
            first = false;
            auto q = inv(at(0, x, y), at(1, x, y));
            worst_inv = std::max(worst_inv, circle_dist(q[0], wrap01(x)));
            worst_inv = std::max(worst_inv, circle_dist(q[1], wrap01(y)));
            auto r = (*this)(at(2, x, y), at(3, x, y));
            worst_inv = std::max(worst_inv, circle_dist(r[0], wrap01(x)));
            worst_inv = std::max(worst_inv, circle_dist(r[1], wrap01(y)));
        }
    if (worst_deg > 1e-7)
        throw DomainError("torus diffeomorphism is not unit-translation compatible (residual " +
                          std::to_string(worst_deg) + ")");
    double det = deg[0][0] * deg[1][1] - deg[0][1] * deg[1][0];
    if (std::abs(std::abs(det) - 1.0) > 1e-7)
        throw DomainError("torus map displacement matrix is not unimodular (det " +
                          std::to_string(det) + "); the map cannot be a diffeomorphism");
    if (worst_inv > 1e-7)
        throw DomainError("torus diffeomorphism inverse check failed (residual " +
                          std::to_string(worst_inv) + " on a 32x32 grid)");
}

std::array<double, 2> TorusDiffeo::operator()(double x, double y) const {
    std::array<double, 2> p{x, y};
    return {(*comp_[0])(p), (*comp_[1])(p)};
}

std::array<double, 2> TorusDiffeo::inv(double x, double y) const {
    std::array<double, 2> p{x, y};
    return {(*comp_[2])(p), (*comp_[3])(p)};
}

std::array<Jet, 2> TorusDiffeo::jets(double x, double y, int order) const {
    std::array<double, 2> p{x, y};
    return {comp_[0]->jet(p, order), comp_[1]->jet(p, order)};
}

std::array<Jet, 2> TorusDiffeo::inv_jets(double x, double y, int order) const {
    std::array<double, 2> p{x, y};
    return {comp_[2]->jet(p, order), comp_[3]->jet(p, order)};
}

// --------------------------------------------------------------- pushforwards

namespace {

void check_singularities_preserved(const TorusVectorField& X, const TorusVectorField& Y) {
    auto cls_counts = [](const TorusVectorField& F) {
        std::map<std::string, int> c;
        for (const auto& s : find_singularities(F)) ++c[s.cls];
        return c;
    };
    if (cls_counts(X) != cls_counts(Y))
        throw DomainError("pushforward changed the singularity structure");
}

} // namespace

TorusVectorField pushforward_torus_field(const TorusDiffeo& phi, const TorusVectorField& X) {
    TorusVectorField::JetEval fn = [phi, X](double u, double w, int order) {
        auto r = phi.inv(u, w);
        auto rj = phi.inv_jets(u, w, order);
        auto Xj = X.jets(r[0], r[1], order);
        auto Fj = phi.jets(r[0], r[1], order + 1);
        std::array<Jet, 2> out;
        for (int b = 0; b < 2; ++b) {
            Jet acc = Jet::constant(0.0, 2, order);
            for (int a = 0; a < 2; ++a)
                acc += compose(Fj[b].partial(a), rj) * compose(Xj[a], rj);
            out[b] = std::move(acc);
        }
        return out;
    };
    auto Y = TorusVectorField::from_fn(std::move(fn));
    check_singularities_preserved(X, Y);
    return Y;
}

TorusVectorField pushforward_torus_field(const CircleDiffeo& phi, const TorusVectorField& X) {
    TorusVectorField::JetEval fn = [phi, X](double u, double w, int order) {
        double eta0 = phi.inverse(u);
        Jet ujet = Jet::variable(u, 0, 2, order);
        Jet wjet = Jet::variable(w, 1, 2, order);
        Jet phij = phi.jet(eta0, order + 1);
        Jet dphij = phij.partial(0);
        // invert the jet of phi around eta0 by Newton iteration
        Jet eta = Jet::constant(eta0, 2, order);
        std::array<Jet, 1> etaspan;
        for (int it = 0; it < 4; ++it) {
            etaspan[0] = eta;
            Jet val = compose(phij.truncated(order), etaspan);
            Jet der = compose(dphij.truncated(order), etaspan);
            eta = eta - (val - ujet) / der;
        }
        etaspan[0] = eta;
        Jet slope = compose(dphij.truncated(order), etaspan);
        auto Xj = X.jets(eta0, w, order);
        std::array<Jet, 2> g{eta, wjet};
        std::array<Jet, 2> out;
        out[0] = slope * compose(Xj[0], g);
        out[1] = compose(Xj[1], g);
        return out;
    };
    auto Y = TorusVectorField::from_fn(std::move(fn));
    check_singularities_preserved(X, Y);
    return Y;
}

// ----------------------------------------------------------------- conjugates

CircleMapWithFlat conjugate_map(const CircleDiffeo& phi, const CircleMapWithFlat& f) {
    CircleMapWithFlat m;
    auto base = f; // copy keeps the callable alive
    m.fn = [phi, base](double x) {
        return wrap01(phi(base.eval(phi.inverse(wrap01(x)))));
    };
    if (f.has_flat) {
        double pa = phi(f.a);
        m.has_flat = true;
        m.a = wrap01(pa);
        m.b = m.a + (phi(f.b) - pa); // same width in the lift, may exceed 1
        m.v = wrap01(phi(f.v));
    }
    resample(m, 512);
    return m;
}

VerificationReport verify_equivariance(const CircleDiffeo& phi, const TorusVectorField& X,
                                       int grid, const ReturnMapOptions& opt, double tol) {
    auto f = return_map(X, opt);
    auto Y = pushforward_torus_field(phi, X);
    auto g = return_map(Y, opt);
    auto h = conjugate_map(phi, f);

    // compare on the shared sample grid: g's samples are exact transits of
    // the pushed field, h evaluates through f's (cheaper) transits
    double sup = 0.0;
    std::string at;
    for (int i = 0; i < grid; ++i) {
        double x = static_cast<double>(i) / grid;
        double gv;
        if (g.in_flat(x)) {
            gv = g.v;
        } else {
            auto it = std::lower_bound(g.xs.begin(), g.xs.end(), x - 1e-12);
            if (it != g.xs.end() && std::abs(*it - x) <= 1e-9)
                gv = g.fs[static_cast<std::size_t>(it - g.xs.begin())];
            else
                gv = g.eval(x);
        }
        double hv = h.eval(x);
        double d = circle_dist(gv, hv);
        if (d > sup) {
            sup = d;
            at = "(" + std::to_string(x) + ")";
        }
    }

    double haus = 0.0;
    if (g.has_flat != h.has_flat) {
        haus = 1.0;
    } else if (g.has_flat) {
        haus = std::max(circle_dist(g.a, h.a), circle_dist(wrap01(g.b), wrap01(h.b)));
    }

    VerificationReport rep;
    rep.title = "equivariance";
    rep.add(CheckResult::upper("equivariance/map-sup", sup, tol, grid, at));
    rep.add(CheckResult::upper("equivariance/flat-hausdorff", haus, tol, 2));
    return rep;
}

} // namespace bilag
