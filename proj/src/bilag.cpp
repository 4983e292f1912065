#include "bilag/bilag.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>

#include "bilag/errors.hpp"
#include "bilag/parallel.hpp"

namespace bilag {

namespace {

// worst-residual bookkeeping across a sample set
struct Extreme {
    double value;
    int sample = -1;
    explicit Extreme(bool lower) : value(lower ? std::numeric_limits<double>::infinity() : 0.0) {}
};

void see_max(Extreme& e, double v, int sample) {
    if (v > e.value || e.sample < 0) {
        e.value = v;
        e.sample = sample;
    }
}

void see_min(Extreme& e, double v, int sample) {
    if (v < e.value || e.sample < 0) {
        e.value = v;
        e.sample = sample;
    }
}

std::string point_of(const std::vector<std::vector<double>>& pts, const Extreme& e) {
    return e.sample < 0 ? std::string() : format_point(pts[e.sample]);
}

Eigen::MatrixXd frame_values(const std::vector<VectorField>& frame, std::span<const double> p) {
    const int m = static_cast<int>(p.size());
    const int k = static_cast<int>(frame.size());
    Eigen::MatrixXd A(m, k);
    for (int a = 0; a < k; ++a) {
        auto v = frame[a].values(p);
        for (int i = 0; i < m; ++i) A(i, a) = v[i];
    }
    return A;
}

double smallest_singular_value(const Eigen::MatrixXd& A) {
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(A);
    return svd.singularValues().tail(1)(0);
}

} // namespace

Foliation make_foliation(ChartPtr chart, std::string name, std::vector<VectorField> frame) {
    if (frame.empty()) throw DomainError("foliation '" + name + "' has an empty frame");
    if (static_cast<int>(frame.size()) > chart->dim())
        throw DomainError("foliation '" + name + "' has more frame fields than dimensions");
    for (const auto& X : frame) require_same_chart(*chart, *X.chart());
    Foliation F;
    F.chart = std::move(chart);
    F.name = std::move(name);
    F.rank = static_cast<int>(frame.size());
    F.frame = std::move(frame);
    return F;
}

VerificationReport check_symplectic(const TwoForm& w, const VerifyOptions& opt) {
    const auto& chart = *w.chart();
    const int m = chart.dim();
    if (m % 2 != 0)
        throw DomainError("symplectic check needs an even-dimensional chart, '" + chart.name +
                          "' has dim " + std::to_string(m));
    auto pts = sample_box(chart, opt.samples, opt.seed);
    std::vector<double> closed(pts.size(), 0.0), det(pts.size(), 0.0);
    parallel_for(static_cast<int>(pts.size()), [&](int s) {
        auto W = w.matrix(pts[s], 1);
        double worst = 0.0;
        for (int i = 0; i < m; ++i)
            for (int j = i + 1; j < m; ++j)
                for (int k = j + 1; k < m; ++k) {
                    double d = W[static_cast<std::size_t>(j) * m + k].partial(i).value() -
                               W[static_cast<std::size_t>(i) * m + k].partial(j).value() +
                               W[static_cast<std::size_t>(i) * m + j].partial(k).value();
                    worst = std::max(worst, std::abs(d));
                }
        closed[s] = worst;
        Eigen::MatrixXd M(m, m);
        for (int i = 0; i < m; ++i)
            for (int j = 0; j < m; ++j) M(i, j) = W[static_cast<std::size_t>(i) * m + j].value();
        det[s] = std::abs(M.determinant());
    });
    Extreme ec(false), ed(true);
    for (std::size_t s = 0; s < pts.size(); ++s) {
        see_max(ec, closed[s], static_cast<int>(s));
        see_min(ed, det[s], static_cast<int>(s));
    }
    VerificationReport rep;
    rep.title = "symplectic";
    rep.seed = opt.seed;
    rep.add(CheckResult::upper("symplectic/closed", ec.value, opt.tol_closed, opt.samples,
                               point_of(pts, ec)));
    rep.add(CheckResult::lower("symplectic/nondegenerate", ed.value, opt.tol_det, opt.samples,
                               point_of(pts, ed)));
    return rep;
}

VerificationReport check_involutive(const Foliation& F, const VerifyOptions& opt) {
    const auto& chart = *F.chart;
    const int m = chart.dim();
    const int k = F.rank;
    auto pts = sample_box(chart, opt.samples, opt.seed);

    std::vector<std::pair<int, int>> pairs;
    for (int a = 0; a < k; ++a)
        for (int b = a + 1; b < k; ++b) pairs.emplace_back(a, b);
    std::vector<VectorField> brackets;
    brackets.reserve(pairs.size());
    for (auto [a, b] : pairs) brackets.push_back(lie_bracket(F.frame[a], F.frame[b]));

    std::vector<double> indep(pts.size()), resid(pts.size(), 0.0);
    parallel_for(static_cast<int>(pts.size()), [&](int s) {
        Eigen::MatrixXd A = frame_values(F.frame, pts[s]);
        indep[s] = smallest_singular_value(A);
        auto qr = A.colPivHouseholderQr();
        double worst = 0.0;
        for (std::size_t t = 0; t < pairs.size(); ++t) {
            auto bv = brackets[t].values(pts[s]);
            Eigen::VectorXd b(m);
            for (int i = 0; i < m; ++i) b(i) = bv[i];
            Eigen::VectorXd x = qr.solve(b);
            worst = std::max(worst, (A * x - b).norm());
        }
        resid[s] = worst;
    });
    Extreme ei(true), er(false);
    for (std::size_t s = 0; s < pts.size(); ++s) {
        see_min(ei, indep[s], static_cast<int>(s));
        see_max(er, resid[s], static_cast<int>(s));
    }
    VerificationReport rep;
    rep.title = "foliation " + F.name;
    rep.seed = opt.seed;
    rep.add(CheckResult::lower("foliation/" + F.name + "/independent", ei.value,
                               opt.tol_transversal, opt.samples, point_of(pts, ei)));
    rep.add(CheckResult::upper("foliation/" + F.name + "/involutive", er.value,
                               opt.tol_involutive, opt.samples, point_of(pts, er)));
    return rep;
}

VerificationReport check_lagrangian(const TwoForm& w, const Foliation& F,
                                    const VerifyOptions& opt) {
    require_same_chart(*w.chart(), *F.chart);
    const auto& chart = *F.chart;
    const int m = chart.dim();
    if (2 * F.rank != m)
        throw DomainError("Lagrangian check needs rank dim/2; foliation '" + F.name +
                          "' has rank " + std::to_string(F.rank) + " on dim " +
                          std::to_string(m));
    auto pts = sample_box(chart, opt.samples, opt.seed);
    std::vector<double> resid(pts.size(), 0.0);
    parallel_for(static_cast<int>(pts.size()), [&](int s) {
        auto W = w.values(pts[s]);
        double worst = 0.0;
        for (int a = 0; a < F.rank; ++a) {
            auto X = F.frame[a].values(pts[s]);
            for (int b = a + 1; b < F.rank; ++b) {
                auto Y = F.frame[b].values(pts[s]);
                double v = 0.0;
                for (int i = 0; i < m; ++i)
                    for (int j = 0; j < m; ++j)
                        v += W[static_cast<std::size_t>(i) * m + j] * X[i] * Y[j];
                worst = std::max(worst, std::abs(v));
            }
        }
        resid[s] = worst;
    });
    Extreme er(false);
    for (std::size_t s = 0; s < pts.size(); ++s) see_max(er, resid[s], static_cast<int>(s));
    VerificationReport rep;
    rep.title = "lagrangian " + F.name;
    rep.seed = opt.seed;
    rep.add(CheckResult::upper("lagrangian/" + F.name, er.value, opt.tol_lagrangian, opt.samples,
                               point_of(pts, er)));
    return rep;
}

VerificationReport check_transversal(const Foliation& F1, const Foliation& F2,
                                     const VerifyOptions& opt) {
    require_same_chart(*F1.chart, *F2.chart);
    const auto& chart = *F1.chart;
    if (F1.rank + F2.rank != chart.dim())
        throw DomainError("transversality needs ranks summing to dim; got " +
                          std::to_string(F1.rank) + "+" + std::to_string(F2.rank) + " on dim " +
                          std::to_string(chart.dim()));
    auto pts = sample_box(chart, opt.samples, opt.seed);
    std::vector<double> sig(pts.size());
    parallel_for(static_cast<int>(pts.size()), [&](int s) {
        Eigen::MatrixXd A(chart.dim(), chart.dim());
        A << frame_values(F1.frame, pts[s]), frame_values(F2.frame, pts[s]);
        sig[s] = smallest_singular_value(A);
    });
    Extreme es(true);
    for (std::size_t s = 0; s < pts.size(); ++s) see_min(es, sig[s], static_cast<int>(s));
    VerificationReport rep;
    rep.title = "transversal";
    rep.seed = opt.seed;
    rep.add(CheckResult::lower("transversal", es.value, opt.tol_transversal, opt.samples,
                               point_of(pts, es)));
    return rep;
}

VerificationReport verify_structure(const BiLagrangianStructure& S, const VerifyOptions& opt) {
    VerificationReport rep;
    rep.title = S.name;
    rep.seed = opt.seed;
    rep.merge(check_symplectic(S.omega, opt));
    rep.merge(check_involutive(S.f1, opt));
    rep.merge(check_involutive(S.f2, opt));
    rep.merge(check_lagrangian(S.omega, S.f1, opt));
    rep.merge(check_lagrangian(S.omega, S.f2, opt));
    rep.merge(check_transversal(S.f1, S.f2, opt));
    return rep;
}

// ------------------------------------------------------------------- Hess

namespace {

struct HessWork {
    const BiLagrangianStructure S;
    int m, n;

    explicit HessWork(const BiLagrangianStructure& s)
        : S(s), m(s.chart->dim()), n(s.chart->dim() / 2) {
        if (S.f1.rank != n || S.f2.rank != n)
            throw DomainError("Hess construction needs two rank-dim/2 foliations");
    }

    // Christoffels of the connection at (p, order).
    std::vector<Jet> operator()(std::span<const double> p, int order) const {
        const int k1 = order + 1;

        // joint frame, f1 members first
        std::vector<std::vector<Jet>> E;
        E.reserve(m);
        for (const auto& X : S.f1.frame) E.push_back(X.jets(p, k1));
        for (const auto& X : S.f2.frame) E.push_back(X.jets(p, k1));

        {
            Eigen::MatrixXd Fr(m, m);
            for (int a = 0; a < m; ++a)
                for (int i = 0; i < m; ++i) Fr(i, a) = E[a][i].value();
            double sig = smallest_singular_value(Fr);
            if (sig < 1e-8)
                throw CheckError("joint frame degenerates at " + format_point(p) +
                                 " (sigma_min=" + std::to_string(sig) + ")");
        }

        auto W = S.omega.matrix(p, k1);
        auto wpair = [&](const std::vector<Jet>& X, const std::vector<Jet>& Y, int ord) {
            Jet acc = Jet::constant(0.0, m, ord);
            for (int i = 0; i < m; ++i)
                for (int j = 0; j < m; ++j)
                    acc += W[static_cast<std::size_t>(i) * m + j].truncated(ord) *
                           X[i].truncated(ord) * Y[j].truncated(ord);
            return acc;
        };

        // cross brackets [E_a, E_b] for a, b in opposite foliations
        auto bracket = [&](int a, int b) {
            std::vector<Jet> out;
            out.reserve(m);
            for (int j = 0; j < m; ++j) {
                Jet acc = Jet::constant(0.0, m, order);
                for (int i = 0; i < m; ++i)
                    acc += E[a][i] * E[b][j].partial(i) - E[b][i] * E[a][j].partial(i);
                out.push_back(acc);
            }
            return out;
        };
        std::vector<std::vector<Jet>> Br(static_cast<std::size_t>(m) * m);
        for (int a = 0; a < m; ++a)
            for (int b = 0; b < m; ++b)
                if ((a < n) != (b < n)) Br[static_cast<std::size_t>(a) * m + b] = bracket(a, b);

        // omega pairings across the foliations, kept at k1 for the
        // directional-derivative term of the defining equation
        std::vector<Jet> P(static_cast<std::size_t>(m) * m);
        for (int b = 0; b < m; ++b)
            for (int c = 0; c < m; ++c)
                if ((b < n) != (c < n)) P[static_cast<std::size_t>(b) * m + c] = wpair(E[b], E[c], k1);

        // covariant derivatives of frame pairs
        std::vector<std::vector<Jet>> covd(static_cast<std::size_t>(m) * m);

        // same-foliation pairs via the omega solve
        for (int fol = 0; fol < 2; ++fol) {
            const int base = fol == 0 ? 0 : n;  // frame offset of this foliation
            const int opp = fol == 0 ? n : 0;   // offset of the pairing frame
            std::vector<Jet> M(static_cast<std::size_t>(n) * n);
            for (int c = 0; c < n; ++c)
                for (int d = 0; d < n; ++d)
                    M[static_cast<std::size_t>(c) * n + d] =
                        P[static_cast<std::size_t>(base + d) * m + (opp + c)].truncated(order);
            for (int a = 0; a < n; ++a) {
                std::vector<Jet> rhs(static_cast<std::size_t>(n) * n);
                for (int c = 0; c < n; ++c)
                    for (int b = 0; b < n; ++b) {
                        Jet dir = Jet::constant(0.0, m, order);
                        const Jet& f = P[static_cast<std::size_t>(base + b) * m + (opp + c)];
                        for (int i = 0; i < m; ++i) dir += E[base + a][i] * f.partial(i);
                        const auto& br = Br[static_cast<std::size_t>(base + a) * m + (opp + c)];
                        Jet corr = Jet::constant(0.0, m, order);
                        for (int i = 0; i < m; ++i)
                            for (int j = 0; j < m; ++j)
                                corr += W[static_cast<std::size_t>(i) * m + j].truncated(order) *
                                        E[base + b][i].truncated(order) * br[j];
                        rhs[static_cast<std::size_t>(c) * n + b] = dir - corr;
                    }
                auto mu = solve_linear(M, rhs, n, n);
                for (int b = 0; b < n; ++b) {
                    std::vector<Jet> v(m, Jet::constant(0.0, m, order));
                    for (int d = 0; d < n; ++d)
                        for (int i = 0; i < m; ++i)
                            v[i] += mu[static_cast<std::size_t>(d) * n + b] *
                                    E[base + d][i].truncated(order);
                    covd[static_cast<std::size_t>(base + a) * m + (base + b)] = std::move(v);
                }
            }
        }

        // frame matrix as jets (k1 for the Christoffel change of frame)
        std::vector<Jet> FrJ(static_cast<std::size_t>(m) * m);
        for (int i = 0; i < m; ++i)
            for (int a = 0; a < m; ++a) FrJ[static_cast<std::size_t>(i) * m + a] = E[a][i];

        // cross pairs: project the bracket on the target foliation. One batched
        // solve: columns are the cross brackets.
        {
            std::vector<std::pair<int, int>> cross;
            for (int a = 0; a < m; ++a)
                for (int b = 0; b < m; ++b)
                    if ((a < n) != (b < n)) cross.emplace_back(a, b);
            const int nc = static_cast<int>(cross.size());
            std::vector<Jet> A(FrJ.size());
            for (std::size_t t = 0; t < FrJ.size(); ++t) A[t] = FrJ[t].truncated(order);
            std::vector<Jet> B(static_cast<std::size_t>(m) * nc, Jet::constant(0.0, m, order));
            for (int t = 0; t < nc; ++t) {
                const auto& br = Br[static_cast<std::size_t>(cross[t].first) * m + cross[t].second];
                for (int i = 0; i < m; ++i) B[static_cast<std::size_t>(i) * nc + t] = br[i];
            }
            auto coef = solve_linear(A, B, m, nc);
            for (int t = 0; t < nc; ++t) {
                auto [a, b] = cross[t];
                const int keep_lo = b < n ? 0 : n;
                const int keep_hi = b < n ? n : m;
                std::vector<Jet> v(m, Jet::constant(0.0, m, order));
                for (int d = keep_lo; d < keep_hi; ++d)
                    for (int i = 0; i < m; ++i)
                        v[i] += coef[static_cast<std::size_t>(d) * nc + t] *
                                E[d][i].truncated(order);
                covd[static_cast<std::size_t>(a) * m + b] = std::move(v);
            }
        }

        // inverse frame at k1: columns express the coordinate fields in the frame
        std::vector<Jet> I(static_cast<std::size_t>(m) * m, Jet::constant(0.0, m, k1));
        for (int i = 0; i < m; ++i)
            I[static_cast<std::size_t>(i) * m + i] = Jet::constant(1.0, m, k1);
        auto C = solve_linear(FrJ, I, m, m); // C[a*m+j] = c^a_j

        // nabla_{d_i} d_j = c^a_i ( c^b_j nabla_{E_a} E_b + (E_a . c^b_j) E_b )
        std::vector<Jet> G(static_cast<std::size_t>(m) * m * m);
        for (int a = 0; a < m; ++a) {
            // directional derivatives E_a . c^b_j
            std::vector<Jet> dc(static_cast<std::size_t>(m) * m);
            for (int b = 0; b < m; ++b)
                for (int j = 0; j < m; ++j) {
                    Jet acc = Jet::constant(0.0, m, order);
                    for (int i = 0; i < m; ++i)
                        acc += E[a][i] * C[static_cast<std::size_t>(b) * m + j].partial(i);
                    dc[static_cast<std::size_t>(b) * m + j] = std::move(acc);
                }
            for (int j = 0; j < m; ++j) {
                std::vector<Jet> inner(m, Jet::constant(0.0, m, order));
                for (int b = 0; b < m; ++b) {
                    const Jet cbj = C[static_cast<std::size_t>(b) * m + j].truncated(order);
                    const auto& cv = covd[static_cast<std::size_t>(a) * m + b];
                    const Jet& dbj = dc[static_cast<std::size_t>(b) * m + j];
                    for (int k = 0; k < m; ++k)
                        inner[k] += cbj * cv[k] + dbj * E[b][k].truncated(order);
                }
                for (int i = 0; i < m; ++i) {
                    // accumulate over a into Gamma^k_{ij}
                    const Jet cai = C[static_cast<std::size_t>(a) * m + i].truncated(order);
                    for (int k = 0; k < m; ++k) {
                        std::size_t idx = (static_cast<std::size_t>(k) * m + i) * m + j;
                        if (a == 0) G[idx] = cai * inner[k];
                        else G[idx] += cai * inner[k];
                    }
                }
            }
        }
        return G;
    }
};

} // namespace

Connection hess_connection(const BiLagrangianStructure& S) {
    HessWork work(S);
    return Connection::from_fn(
        S.chart,
        [work](std::span<const double> p, int order) {
            if (order + 2 > kMaxJetOrder)
                throw DomainError("Hess connection queried at jet order " +
                                  std::to_string(order) +
                                  "; inputs would exceed the supported maximum");
            try {
                return work(p, order);
            } catch (const CheckError&) {
                throw;
            } catch (const DomainError& e) {
                throw CheckError(std::string("Hess construction failed at ") + format_point(p) +
                                 ": " + e.what());
            }
        },
        /*memoize=*/true);
}

VerificationReport check_hess_defining(const BiLagrangianStructure& S, const Connection& nabla,
                                       const VerifyOptions& opt) {
    require_same_chart(*S.chart, *nabla.chart());
    const int m = S.chart->dim();
    const int n = m / 2;
    auto pts = sample_box(*S.chart, opt.samples, opt.seed);

    std::vector<double> tors(pts.size(), 0.0), par(pts.size(), 0.0), pres1(pts.size(), 0.0),
        pres2(pts.size(), 0.0);

    parallel_for(static_cast<int>(pts.size()), [&](int s) {
        const auto& p = pts[s];
        auto G = nabla.christoffels(p, 0);
        std::vector<std::vector<Jet>> E;
        E.reserve(m);
        for (const auto& X : S.f1.frame) E.push_back(X.jets(p, 1));
        for (const auto& X : S.f2.frame) E.push_back(X.jets(p, 1));
        auto W = S.omega.matrix(p, 1);

        auto gamma = [&](int k, int i, int j) {
            return G[(static_cast<std::size_t>(k) * m + i) * m + j].value();
        };

        // frame covariant derivatives as plain numbers
        std::vector<double> D(static_cast<std::size_t>(m) * m * m);
        for (int a = 0; a < m; ++a)
            for (int b = 0; b < m; ++b)
                for (int k = 0; k < m; ++k) {
                    double acc = 0.0;
                    for (int i = 0; i < m; ++i) {
                        acc += E[a][i].value() * E[b][k].partial(i).value();
                        for (int j = 0; j < m; ++j)
                            acc += gamma(k, i, j) * E[a][i].value() * E[b][j].value();
                    }
                    D[(static_cast<std::size_t>(a) * m + b) * m + k] = acc;
                }
        auto covd = [&](int a, int b, int k) {
            return D[(static_cast<std::size_t>(a) * m + b) * m + k];
        };

        // torsion over frame pairs
        double wt = 0.0;
        for (int a = 0; a < m; ++a)
            for (int b = a + 1; b < m; ++b)
                for (int k = 0; k < m; ++k) {
                    double br = 0.0;
                    for (int i = 0; i < m; ++i)
                        br += E[a][i].value() * E[b][k].partial(i).value() -
                              E[b][i].value() * E[a][k].partial(i).value();
                    wt = std::max(wt, std::abs(covd(a, b, k) - covd(b, a, k) - br));
                }
        tors[s] = wt;

        // omega pairings as first-order jets for the directional term
        std::vector<Jet> P(static_cast<std::size_t>(m) * m);
        for (int b = 0; b < m; ++b)
            for (int c = 0; c < m; ++c) {
                Jet acc = Jet::constant(0.0, m, 1);
                for (int i = 0; i < m; ++i)
                    for (int j = 0; j < m; ++j)
                        acc += W[static_cast<std::size_t>(i) * m + j] * E[b][i] * E[c][j];
                P[static_cast<std::size_t>(b) * m + c] = std::move(acc);
            }
        auto wval = [&](int i, int j) { return W[static_cast<std::size_t>(i) * m + j].value(); };

        double wp = 0.0;
        for (int a = 0; a < m; ++a)
            for (int b = 0; b < m; ++b)
                for (int c = 0; c < m; ++c) {
                    double dir = 0.0;
                    for (int i = 0; i < m; ++i)
                        dir += E[a][i].value() *
                               P[static_cast<std::size_t>(b) * m + c].partial(i).value();
                    double t1 = 0.0, t2 = 0.0;
                    for (int i = 0; i < m; ++i)
                        for (int j = 0; j < m; ++j) {
                            t1 += wval(i, j) * covd(a, b, i) * E[c][j].value();
                            t2 += wval(i, j) * E[b][i].value() * covd(a, c, j);
                        }
                    wp = std::max(wp, std::abs(dir - t1 - t2));
                }
        par[s] = wp;

        // preservation: decompose nabla_{E_a} E_b in the joint frame and
        // measure the part in the wrong foliation
        Eigen::MatrixXd Fr(m, m);
        for (int a = 0; a < m; ++a)
            for (int i = 0; i < m; ++i) Fr(i, a) = E[a][i].value();
        auto lu = Fr.partialPivLu();
        double w1 = 0.0, w2 = 0.0;
        for (int a = 0; a < m; ++a)
            for (int b = 0; b < m; ++b) {
                Eigen::VectorXd rhs(m);
                for (int k = 0; k < m; ++k) rhs(k) = covd(a, b, k);
                Eigen::VectorXd c = lu.solve(rhs);
                double off = 0.0;
                if (b < n)
                    for (int d = n; d < m; ++d) off = std::max(off, std::abs(c(d)));
                else
                    for (int d = 0; d < n; ++d) off = std::max(off, std::abs(c(d)));
                (b < n ? w1 : w2) = std::max(b < n ? w1 : w2, off);
            }
        pres1[s] = w1;
        pres2[s] = w2;
    });

    Extreme et(false), ep(false), e1(false), e2(false);
    for (std::size_t s = 0; s < pts.size(); ++s) {
        see_max(et, tors[s], static_cast<int>(s));
        see_max(ep, par[s], static_cast<int>(s));
        see_max(e1, pres1[s], static_cast<int>(s));
        see_max(e2, pres2[s], static_cast<int>(s));
    }
    VerificationReport rep;
    rep.title = "hess " + S.name;
    rep.seed = opt.seed;
    rep.add(CheckResult::upper("hess/torsion", et.value, opt.tol_hess, opt.samples,
                               point_of(pts, et)));
    rep.add(CheckResult::upper("hess/parallel-omega", ep.value, opt.tol_hess, opt.samples,
                               point_of(pts, ep)));
    rep.add(CheckResult::upper("hess/preserves-" + S.f1.name, e1.value, opt.tol_hess, opt.samples,
                               point_of(pts, e1)));
    rep.add(CheckResult::upper("hess/preserves-" + S.f2.name, e2.value, opt.tol_hess, opt.samples,
                               point_of(pts, e2)));
    return rep;
}

VerificationReport check_affine(const BiLagrangianStructure& S, const Connection& nabla,
                                const VerifyOptions& opt) {
    require_same_chart(*S.chart, *nabla.chart());
    const int m = S.chart->dim();
    auto pts = sample_box(*S.chart, opt.samples, opt.seed);
    std::vector<double> resid(pts.size(), 0.0);
    parallel_for(static_cast<int>(pts.size()), [&](int s) {
        const auto& p = pts[s];
        auto R = curvature_tensor(nabla, p, 0);
        Eigen::MatrixXd Fr = frame_values(S.f1.frame, p);
        Eigen::MatrixXd Fr2 = frame_values(S.f2.frame, p);
        Eigen::MatrixXd F(m, m);
        F << Fr, Fr2;
        // contract R with all frame triples; l runs over output components
        double worst = 0.0;
        for (int a = 0; a < m; ++a)
            for (int b = 0; b < m; ++b)
                for (int c = 0; c < m; ++c)
                    for (int l = 0; l < m; ++l) {
                        double acc = 0.0;
                        for (int k = 0; k < m; ++k)
                            for (int i = 0; i < m; ++i)
                                for (int j = 0; j < m; ++j)
                                    acc += R[((static_cast<std::size_t>(l) * m + k) * m + i) * m +
                                             j]
                                               .value() *
                                           F(k, c) * F(i, a) * F(j, b);
                        worst = std::max(worst, std::abs(acc));
                    }
        resid[s] = worst;
    });
    Extreme er(false);
    for (std::size_t s = 0; s < pts.size(); ++s) see_max(er, resid[s], static_cast<int>(s));
    VerificationReport rep;
    rep.title = "affine " + S.name;
    rep.seed = opt.seed;
    rep.add(CheckResult::upper("affine/curvature", er.value, opt.tol_affine, opt.samples,
                               point_of(pts, er)));
    return rep;
}

ParaKahlerPair para_kahler(const BiLagrangianStructure& S) {
    const int m = S.chart->dim();
    const int n = m / 2;
    if (S.f1.rank != n || S.f2.rank != n)
        throw DomainError("para-Kahler pair needs two rank-dim/2 foliations");
    auto S_local = S;

    TensorEval Ffn = [S_local, m, n](std::span<const double> p, int order) {
        std::vector<Jet> FrJ(static_cast<std::size_t>(m) * m);
        for (int a = 0; a < m; ++a) {
            auto col = (a < n ? S_local.f1.frame[a] : S_local.f2.frame[a - n]).jets(p, order);
            for (int i = 0; i < m; ++i) FrJ[static_cast<std::size_t>(i) * m + a] = col[i];
        }
        std::vector<Jet> I(static_cast<std::size_t>(m) * m, Jet::constant(0.0, m, order));
        for (int i = 0; i < m; ++i)
            I[static_cast<std::size_t>(i) * m + i] = Jet::constant(1.0, m, order);
        auto inv = solve_linear(FrJ, I, m, m);
        std::vector<Jet> F(static_cast<std::size_t>(m) * m, Jet::constant(0.0, m, order));
        for (int i = 0; i < m; ++i)
            for (int j = 0; j < m; ++j) {
                Jet acc = Jet::constant(0.0, m, order);
                for (int a = 0; a < m; ++a) {
                    double sgn = a < n ? 1.0 : -1.0;
                    acc += FrJ[static_cast<std::size_t>(i) * m + a] * sgn *
                           inv[static_cast<std::size_t>(a) * m + j];
                }
                F[static_cast<std::size_t>(i) * m + j] = std::move(acc);
            }
        return F;
    };

    auto omega = S.omega;
    TensorEval Gfn = [Ffn, omega, m](std::span<const double> p, int order) {
        auto F = Ffn(p, order);
        auto W = omega.matrix(p, order);
        std::vector<Jet> G(static_cast<std::size_t>(m) * m, Jet::constant(0.0, m, order));
        for (int i = 0; i < m; ++i)
            for (int j = 0; j < m; ++j) {
                Jet acc = Jet::constant(0.0, m, order);
                for (int k = 0; k < m; ++k)
                    acc += W[static_cast<std::size_t>(k) * m + j] *
                           F[static_cast<std::size_t>(k) * m + i];
                G[static_cast<std::size_t>(i) * m + j] = std::move(acc);
            }
        return G;
    };

    ParaKahlerPair pk;
    pk.chart = S.chart;
    pk.F = std::move(Ffn);
    pk.G = std::move(Gfn);
    return pk;
}

VerificationReport check_para_kahler(const BiLagrangianStructure& S, const ParaKahlerPair& pk,
                                     const VerifyOptions& opt) {
    const int m = S.chart->dim();
    const int n = m / 2;
    auto pts = sample_box(*S.chart, opt.samples, opt.seed);
    std::vector<double> eig(pts.size(), 0.0), sym(pts.size(), 0.0), anti(pts.size(), 0.0),
        compat(pts.size(), 0.0);
    parallel_for(static_cast<int>(pts.size()), [&](int s) {
        const auto& p = pts[s];
        auto Fj = pk.F(p, 0);
        auto Gj = pk.G(p, 0);
        auto W = S.omega.values(p);
        Eigen::MatrixXd F(m, m), G(m, m), Wm(m, m);
        for (int i = 0; i < m; ++i)
            for (int j = 0; j < m; ++j) {
                F(i, j) = Fj[static_cast<std::size_t>(i) * m + j].value();
                G(i, j) = Gj[static_cast<std::size_t>(i) * m + j].value();
                Wm(i, j) = W[static_cast<std::size_t>(i) * m + j];
            }
        // +1 / -1 on the two frames
        double we = 0.0;
        for (int a = 0; a < m; ++a) {
            auto v = (a < n ? S.f1.frame[a] : S.f2.frame[a - n]).values(p);
            Eigen::VectorXd x(m);
            for (int i = 0; i < m; ++i) x(i) = v[i];
            double sgn = a < n ? 1.0 : -1.0;
            we = std::max(we, (F * x - sgn * x).lpNorm<Eigen::Infinity>());
        }
        eig[s] = we;
        sym[s] = (G - G.transpose()).lpNorm<Eigen::Infinity>();
        // G(FX, FY) = -G(X, Y)  <=>  F^T G F + G = 0 entrywise
        anti[s] = (F.transpose() * G * F + G).lpNorm<Eigen::Infinity>();
        // omega(X, Y) = G(FX, Y)  <=>  W = F^T G
        compat[s] = (F.transpose() * G - Wm).lpNorm<Eigen::Infinity>();
    });
    Extreme ee(false), es(false), ea(false), ec(false);
    for (std::size_t s = 0; s < pts.size(); ++s) {
        see_max(ee, eig[s], static_cast<int>(s));
        see_max(es, sym[s], static_cast<int>(s));
        see_max(ea, anti[s], static_cast<int>(s));
        see_max(ec, compat[s], static_cast<int>(s));
    }
    VerificationReport rep;
    rep.title = "para-kahler " + S.name;
    rep.seed = opt.seed;
    std::string sign_note = "F = +1 on " + S.f1.name + ", -1 on " + S.f2.name;
    rep.add(CheckResult::upper("parakahler/frame-eigen", ee.value, opt.tol_parakahler,
                               opt.samples, point_of(pts, ee), sign_note));
    rep.add(CheckResult::upper("parakahler/symmetric", es.value, opt.tol_parakahler, opt.samples,
                               point_of(pts, es)));
    rep.add(CheckResult::upper("parakahler/anti-invariance", ea.value, opt.tol_parakahler,
                               opt.samples, point_of(pts, ea)));
    rep.add(CheckResult::upper("parakahler/compatible", ec.value, opt.tol_parakahler, opt.samples,
                               point_of(pts, ec)));
    return rep;
}

BiLagrangianStructure pushforward_structure(const Map& phi, const Map& phi_inv,
                                            const BiLagrangianStructure& S) {
    require_same_chart(*phi.src(), *S.chart);
    require_inverse(phi, phi_inv);
    BiLagrangianStructure out;
    out.chart = phi.dst();
    out.name = S.name + "->" + phi.dst()->name;
    out.omega = pullback_form(phi_inv, S.omega);
    auto push = [&](const Foliation& F) {
        std::vector<VectorField> frame;
        frame.reserve(F.frame.size());
        for (const auto& X : F.frame) frame.push_back(pushforward_vf(phi, phi_inv, X));
        return make_foliation(out.chart, F.name, std::move(frame));
    };
    out.f1 = push(S.f1);
    out.f2 = push(S.f2);
    return out;
}

} // namespace bilag
