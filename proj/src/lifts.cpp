#include "bilag/lifts.hpp"

#include <cmath>
#include <string>
#include <utility>
#include <vector>

#include "bilag/errors.hpp"
#include "bilag/geom.hpp"

namespace bilag {

namespace {

ChartPtr bundle_chart(const ChartPtr& base, const std::string& chart_prefix,
                      const std::string& fiber_prefix) {
    std::vector<std::string> coords = base->coords;
    std::vector<std::array<double, 2>> box = base->box;
    for (const auto& c : base->coords) {
        coords.push_back(fiber_prefix + c);
        box.push_back({-1.0, 1.0});
    }
    return make_chart(chart_prefix + base->name, std::move(coords), std::move(box));
}

template <class Field>
int base_dim_of(const Field& obj, const ChartPtr& tm) {
    const int m = obj.chart()->dim();
    if (tm->dim() != 2 * m)
        throw DomainError("bundle chart '" + tm->name + "' has dim " +
                          std::to_string(tm->dim()) + ", expected " + std::to_string(2 * m));
    return m;
}

// identity embedding of a base jet into the doubled variable set
Jet up(const Jet& a, int m) {
    std::vector<int> map(m);
    for (int i = 0; i < m; ++i) map[i] = i;
    return embed(a, 2 * m, map);
}

void check_budget(int order, const char* what) {
    if (order + 1 > kMaxJetOrder)
        throw DomainError(std::string(what) + " queried at jet order " + std::to_string(order) +
                          "; the base object would be needed one order deeper than supported");
}

} // namespace

ChartPtr tangent_chart(const ChartPtr& base) { return bundle_chart(base, "T_", "v_"); }
ChartPtr cotangent_chart(const ChartPtr& base) { return bundle_chart(base, "Tstar_", "xi_"); }

ScalarField vlift_fn(const ScalarField& f, ChartPtr tm) {
    const int m = f.chart()->dim();
    if (tm->dim() != 2 * m) throw DomainError("bundle chart dimension mismatch in vertical lift");
    if (f.expr()) {
        // base expressions mention base coordinates only, which lead the
        // bundle chart, so they compile there unchanged
        return ScalarField::from_expr(std::move(tm), f.expr());
    }
    return ScalarField::from_fn(std::move(tm), [f, m](std::span<const double> p, int order) {
        return up(f.jet(p.subspan(0, m), order), m);
    });
}

ScalarField clift_fn(const ScalarField& f, ChartPtr tm) {
    const int m = f.chart()->dim();
    if (tm->dim() != 2 * m) throw DomainError("bundle chart dimension mismatch in complete lift");
    return ScalarField::from_fn(std::move(tm), [f, m](std::span<const double> p, int order) {
        check_budget(order, "complete lift");
        Jet fj = f.jet(p.subspan(0, m), order + 1);
        Jet acc = Jet::constant(0.0, 2 * m, order);
        for (int i = 0; i < m; ++i)
            acc += Jet::variable(p[m + i], m + i, 2 * m, order) * up(fj.partial(i), m);
        return acc;
    });
}

VectorField vlift_vf(const VectorField& X, ChartPtr tm) {
    const int m = base_dim_of(X, tm);
    if (!X.exprs().empty()) {
        std::vector<ExprPtr> comps(2 * m, parse("0"));
        for (int i = 0; i < m; ++i) comps[m + i] = X.exprs()[i];
        return VectorField::from_exprs(std::move(tm), std::move(comps));
    }
    return VectorField::from_fn(std::move(tm), [X, m](std::span<const double> p, int order) {
        auto xj = X.jets(p.subspan(0, m), order);
        std::vector<Jet> out(2 * m, Jet::constant(0.0, 2 * m, order));
        for (int i = 0; i < m; ++i) out[m + i] = up(xj[i], m);
        return out;
    });
}

VectorField clift_vf(const VectorField& X, ChartPtr tm) {
    const int m = base_dim_of(X, tm);
    return VectorField::from_fn(std::move(tm), [X, m](std::span<const double> p, int order) {
        check_budget(order, "complete lift");
        auto xj = X.jets(p.subspan(0, m), order + 1);
        std::vector<Jet> out(2 * m, Jet::constant(0.0, 2 * m, order));
        for (int i = 0; i < m; ++i) {
            out[i] = up(xj[i].truncated(order), m);
            Jet acc = Jet::constant(0.0, 2 * m, order);
            for (int j = 0; j < m; ++j)
                acc += Jet::variable(p[m + j], m + j, 2 * m, order) * up(xj[i].partial(j), m);
            out[m + i] = std::move(acc);
        }
        return out;
    });
}

OneForm vlift_form(const OneForm& a, ChartPtr tm) {
    const int m = base_dim_of(a, tm);
    if (!a.exprs().empty()) {
        // base components fill the base slots; vertical slots vanish, so the
        // lift annihilates vertical fields and pairs X^c through the base
        std::vector<ExprPtr> comps(2 * m, parse("0"));
        for (int i = 0; i < m; ++i) comps[i] = a.exprs()[i];
        return OneForm::from_exprs(std::move(tm), std::move(comps));
    }
    return OneForm::from_fn(std::move(tm), [a, m](std::span<const double> p, int order) {
        auto aj = a.jets(p.subspan(0, m), order);
        std::vector<Jet> out(2 * m, Jet::constant(0.0, 2 * m, order));
        for (int i = 0; i < m; ++i) out[i] = up(aj[i], m);
        return out;
    });
}

OneForm clift_form(const OneForm& a, ChartPtr tm) {
    const int m = base_dim_of(a, tm);
    return OneForm::from_fn(std::move(tm), [a, m](std::span<const double> p, int order) {
        check_budget(order, "complete lift");
        auto aj = a.jets(p.subspan(0, m), order + 1);
        std::vector<Jet> out(2 * m);
        for (int i = 0; i < m; ++i) {
            Jet acc = Jet::constant(0.0, 2 * m, order);
            for (int k = 0; k < m; ++k)
                acc += Jet::variable(p[m + k], m + k, 2 * m, order) * up(aj[i].partial(k), m);
            out[i] = std::move(acc);
            out[m + i] = up(aj[i].truncated(order), m);
        }
        return out;
    });
}

TwoForm clift_form(const TwoForm& w, ChartPtr tm) {
    const int m = w.chart()->dim();
    if (tm->dim() != 2 * m) throw DomainError("bundle chart dimension mismatch in complete lift");
    return TwoForm::from_fn(std::move(tm), [w, m](std::span<const double> p, int order) {
        check_budget(order, "complete lift");
        auto W = w.matrix(p.subspan(0, m), order + 1);
        const int n2 = 2 * m;
        std::vector<Jet> out(static_cast<std::size_t>(n2) * n2, Jet::constant(0.0, n2, order));
        for (int i = 0; i < m; ++i)
            for (int j = 0; j < m; ++j) {
                const Jet& wij = W[static_cast<std::size_t>(i) * m + j];
                Jet acc = Jet::constant(0.0, n2, order);
                for (int k = 0; k < m; ++k)
                    acc += Jet::variable(p[m + k], m + k, n2, order) * up(wij.partial(k), m);
                out[static_cast<std::size_t>(i) * n2 + j] = std::move(acc);
                Jet flat = up(wij.truncated(order), m);
                out[static_cast<std::size_t>(i) * n2 + (m + j)] = flat;
                out[static_cast<std::size_t>(m + i) * n2 + j] = std::move(flat);
            }
        return out;
    });
}

Connection clift_connection(const Connection& nabla, ChartPtr tm) {
    const int m = nabla.chart()->dim();
    if (tm->dim() != 2 * m) throw DomainError("bundle chart dimension mismatch in complete lift");
    return Connection::from_fn(
        std::move(tm),
        [nabla, m](std::span<const double> p, int order) {
            check_budget(order, "complete lift");
            auto G = nabla.christoffels(p.subspan(0, m), order + 1);
            const int n2 = 2 * m;
            std::vector<Jet> out(static_cast<std::size_t>(n2) * n2 * n2,
                                 Jet::constant(0.0, n2, order));
            auto slot = [n2](int k, int i, int j) {
                return (static_cast<std::size_t>(k) * n2 + i) * n2 + j;
            };
            for (int k = 0; k < m; ++k)
                for (int i = 0; i < m; ++i)
                    for (int j = 0; j < m; ++j) {
                        const Jet& g = G[(static_cast<std::size_t>(k) * m + i) * m + j];
                        Jet flat = up(g.truncated(order), m);
                        out[slot(k, i, j)] = flat;
                        out[slot(m + k, i, m + j)] = flat;
                        out[slot(m + k, m + i, j)] = std::move(flat);
                        Jet acc = Jet::constant(0.0, n2, order);
                        for (int l = 0; l < m; ++l)
                            acc += Jet::variable(p[m + l], m + l, n2, order) *
                                   up(g.partial(l), m);
                        out[slot(m + k, i, j)] = std::move(acc);
                    }
            return out;
        },
        /*memoize=*/true);
}

Foliation clift_foliation(const Foliation& F, ChartPtr tm) {
    std::vector<VectorField> frame;
    frame.reserve(2 * F.frame.size());
    for (const auto& X : F.frame) frame.push_back(clift_vf(X, tm));
    for (const auto& X : F.frame) frame.push_back(vlift_vf(X, tm));
    return make_foliation(tm, F.name, std::move(frame));
}

OneForm tautological_form(ChartPtr ctm) {
    const int n2 = ctm->dim();
    if (n2 % 2 != 0) throw DomainError("cotangent chart must have even dimension");
    const int m = n2 / 2;
    std::vector<ExprPtr> comps(n2, parse("0"));
    for (int i = 0; i < m; ++i) comps[i] = parse(ctm->coords[m + i]);
    return OneForm::from_exprs(std::move(ctm), std::move(comps));
}

TwoForm canonical_symplectic(ChartPtr ctm) {
    const int n2 = ctm->dim();
    if (n2 % 2 != 0) throw DomainError("cotangent chart must have even dimension");
    const int m = n2 / 2;
    std::vector<std::tuple<int, int, ExprPtr>> upper;
    for (int i = 0; i < m; ++i) upper.emplace_back(i, m + i, parse("-1"));
    return TwoForm::from_entries(std::move(ctm), std::move(upper));
}

TwoForm mixed_form(const TwoForm& base_omega, ChartPtr ctm) {
    const auto& base = *base_omega.chart();
    const int m = base.dim();
    if (ctm->dim() != 2 * m) throw DomainError("bundle chart dimension mismatch in mixed form");
    // the base form must be symplectic for the sum to be one
    for (const auto& p : sample_box(base, 25, 7)) {
        auto W = base_omega.matrix(p, 1);
        double closed = 0.0;
        for (int i = 0; i < m; ++i)
            for (int j = i + 1; j < m; ++j)
                for (int k = j + 1; k < m; ++k)
                    closed = std::max(closed,
                                      std::abs(W[static_cast<std::size_t>(j) * m + k]
                                                   .partial(i)
                                                   .value() -
                                               W[static_cast<std::size_t>(i) * m + k]
                                                   .partial(j)
                                                   .value() +
                                               W[static_cast<std::size_t>(i) * m + j]
                                                   .partial(k)
                                                   .value()));
        // nondegeneracy through the jet solver: singular pencils throw
        std::vector<Jet> A(static_cast<std::size_t>(m) * m);
        std::vector<Jet> I(static_cast<std::size_t>(m) * m, Jet::constant(0.0, m, 0));
        for (int i = 0; i < m; ++i) {
            I[static_cast<std::size_t>(i) * m + i] = Jet::constant(1.0, m, 0);
            for (int j = 0; j < m; ++j)
                A[static_cast<std::size_t>(i) * m + j] =
                    W[static_cast<std::size_t>(i) * m + j].truncated(0);
        }
        bool singular = false;
        try {
            solve_linear(A, I, m, m);
        } catch (const DomainError&) {
            singular = true;
        }
        if (closed > 1e-8 || singular)
            throw DomainError("mixed lift needs a symplectic base form; it fails at " +
                              format_point(p));
    }

    if (!base_omega.entries().empty()) {
        auto upper = base_omega.entries();
        for (int i = 0; i < m; ++i) upper.emplace_back(i, m + i, parse("-1"));
        return TwoForm::from_entries(std::move(ctm), std::move(upper));
    }
    auto w = base_omega;
    return TwoForm::from_fn(std::move(ctm), [w, m](std::span<const double> p, int order) {
        auto W = w.matrix(p.subspan(0, m), order);
        const int n2 = 2 * m;
        std::vector<Jet> out(static_cast<std::size_t>(n2) * n2, Jet::constant(0.0, n2, order));
        for (int i = 0; i < m; ++i) {
            for (int j = 0; j < m; ++j)
                out[static_cast<std::size_t>(i) * n2 + j] =
                    up(W[static_cast<std::size_t>(i) * m + j], m);
            out[static_cast<std::size_t>(i) * n2 + (m + i)] = Jet::constant(-1.0, n2, order);
            out[static_cast<std::size_t>(m + i) * n2 + i] = Jet::constant(1.0, n2, order);
        }
        return out;
    });
}

Foliation conormal_foliation(const Foliation& F, ChartPtr ctm) {
    const int m = F.chart->dim();
    if (ctm->dim() != 2 * m)
        throw DomainError("bundle chart dimension mismatch in conormal foliation");
    // the frame must consist of constant multiples of coordinate fields
    auto pts = sample_box(*F.chart, 8, 13);
    std::vector<bool> spanned(m, false);
    for (const auto& X : F.frame) {
        auto ref = X.values(pts[0]);
        int nonzero = -1;
        for (int i = 0; i < m; ++i)
            if (std::abs(ref[i]) > 1e-12) {
                if (nonzero >= 0)
                    throw DomainError("conormal foliation of '" + F.name +
                                      "' requires an adapted coordinate frame");
                nonzero = i;
            }
        if (nonzero < 0 || spanned[nonzero])
            throw DomainError("conormal foliation of '" + F.name +
                              "' requires an adapted coordinate frame");
        for (std::size_t s = 1; s < pts.size(); ++s) {
            auto v = X.values(pts[s]);
            for (int i = 0; i < m; ++i)
                if (std::abs(v[i] - ref[i]) > 1e-12)
                    throw DomainError("conormal foliation of '" + F.name +
                                      "' requires an adapted coordinate frame");
        }
        spanned[nonzero] = true;
    }
    std::vector<VectorField> frame;
    for (int i = 0; i < m; ++i)
        if (spanned[i]) frame.push_back(VectorField::coordinate(ctm, i));
    for (int i = 0; i < m; ++i)
        if (!spanned[i]) frame.push_back(VectorField::coordinate(ctm, m + i));
    return make_foliation(std::move(ctm), F.name + "_conormal", std::move(frame));
}

BiLagrangianStructure tangent_structure(const BiLagrangianStructure& S) {
    auto tm = tangent_chart(S.chart);
    BiLagrangianStructure T;
    T.chart = tm;
    T.name = S.name + "_tangent";
    T.omega = clift_form(S.omega, tm);
    T.f1 = clift_foliation(S.f1, tm);
    T.f2 = clift_foliation(S.f2, tm);
    return T;
}

BiLagrangianStructure cotangent_structure(const BiLagrangianStructure& S, bool mixed) {
    auto ctm = cotangent_chart(S.chart);
    BiLagrangianStructure T;
    T.chart = ctm;
    T.name = S.name + (mixed ? "_cotangent_mixed" : "_cotangent");
    T.omega = mixed ? mixed_form(S.omega, ctm) : canonical_symplectic(ctm);
    T.f1 = conormal_foliation(S.f1, ctm);
    T.f2 = conormal_foliation(S.f2, ctm);
    return T;
}

VerificationReport verify_theorem1(const BiLagrangianStructure& S, const VerifyOptions& opt) {
    VerificationReport rep;
    rep.title = S.name + " prolongations";
    rep.seed = opt.seed;

    // tangent prolongation
    {
        auto T = tangent_structure(S);
        rep.merge(verify_structure(T, opt), "tangent/");
        auto nabla = hess_connection(T);
        rep.merge(check_hess_defining(T, nabla, opt), "tangent/");

        auto lifted = clift_connection(hess_connection(S), T.chart);
        auto pts = sample_box(*T.chart, opt.samples, opt.seed);
        double worst = 0.0;
        std::string at;
        for (const auto& p : pts) {
            auto A = nabla.christoffels(p, 0);
            auto B = lifted.christoffels(p, 0);
            double local = 0.0;
            for (std::size_t t = 0; t < A.size(); ++t)
                local = std::max(local, std::abs(A[t].value() - B[t].value()));
            if (local > worst) {
                worst = local;
                at = format_point(p);
            }
        }
        rep.add(CheckResult::upper("tangent/hess-matches-lift", worst, opt.tol_hess, opt.samples,
                                   at, "connection of the lift vs lift of the connection"));
    }

    // cotangent prolongation with the canonical form
    {
        auto C = cotangent_structure(S, false);
        rep.merge(verify_structure(C, opt), "cotangent-dtheta/");
        auto nabla = hess_connection(C);
        rep.merge(check_hess_defining(C, nabla, opt), "cotangent-dtheta/");
        auto pts = sample_box(*C.chart, opt.samples, opt.seed);
        double worst = 0.0;
        std::string at;
        for (const auto& p : pts) {
            auto G = nabla.christoffels(p, 0);
            double local = 0.0;
            for (const auto& g : G) local = std::max(local, std::abs(g.value()));
            if (local > worst) {
                worst = local;
                at = format_point(p);
            }
        }
        rep.add(CheckResult::upper("cotangent-dtheta/flat", worst, opt.tol_hess, opt.samples, at,
                                   "christoffels vanish in conormal coordinates"));
        rep.merge(check_affine(C, nabla, opt), "cotangent-dtheta/");
    }

    // cotangent prolongation with the mixed form
    {
        auto C = cotangent_structure(S, true);
        rep.merge(verify_structure(C, opt), "cotangent-mixed/");
        auto nabla = hess_connection(C);
        rep.merge(check_hess_defining(C, nabla, opt), "cotangent-mixed/");
    }
    return rep;
}

} // namespace bilag
