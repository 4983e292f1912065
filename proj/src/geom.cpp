#include "bilag/geom.hpp"

#include <cmath>

#include "bilag/errors.hpp"

namespace bilag {

namespace {

// Derived fields differentiate their inputs, so a query at `order` needs the
// inputs one order higher. The fixed jet ceiling bounds how deep derived
// objects can stack; the shipped constructions stay well inside it.
int inner_order(int order) {
    if (order + 1 > kMaxJetOrder)
        throw DomainError("derived field would need jet order " + std::to_string(order + 1) +
                          ", above the supported maximum");
    return order + 1;
}

} // namespace

Jet contract2(std::span<const Jet> w, std::span<const Jet> X, std::span<const Jet> Y) {
    const int m = static_cast<int>(X.size());
    Jet acc = Jet::constant(0.0, X[0].dim(), X[0].order());
    for (int i = 0; i < m; ++i)
        for (int j = 0; j < m; ++j) acc += w[static_cast<std::size_t>(i) * m + j] * X[i] * Y[j];
    return acc;
}

Jet directional(std::span<const Jet> X, const Jet& f) {
    Jet acc = Jet::constant(0.0, f.dim(), f.order() - 1);
    for (std::size_t i = 0; i < X.size(); ++i) acc += X[i] * f.partial(static_cast<int>(i));
    return acc;
}

VectorField lie_bracket(const VectorField& X, const VectorField& Y) {
    require_same_chart(*X.chart(), *Y.chart());
    auto chart = X.chart();
    const int m = chart->dim();
    return VectorField::from_fn(chart, [X, Y, m](std::span<const double> p, int order) {
        const int k1 = inner_order(order);
        auto Xj = X.jets(p, k1);
        auto Yj = Y.jets(p, k1);
        std::vector<Jet> out;
        out.reserve(m);
        for (int j = 0; j < m; ++j) {
            Jet acc = Jet::constant(0.0, m, order);
            for (int i = 0; i < m; ++i)
                acc += Xj[i] * Yj[j].partial(i) - Yj[i] * Xj[j].partial(i);
            out.push_back(acc);
        }
        return out;
    });
}

std::vector<double> lie_bracket(const VectorField& X, const VectorField& Y,
                                std::span<const double> p) {
    return lie_bracket(X, Y).values(p);
}

TwoForm exterior_derivative(const OneForm& a) {
    auto chart = a.chart();
    const int m = chart->dim();
    return TwoForm::from_fn(chart, [a, m](std::span<const double> p, int order) {
        const int k1 = inner_order(order);
        auto aj = a.jets(p, k1);
        std::vector<Jet> out(static_cast<std::size_t>(m) * m, Jet::constant(0.0, m, order));
        for (int i = 0; i < m; ++i)
            for (int j = i + 1; j < m; ++j) {
                Jet v = aj[j].partial(i) - aj[i].partial(j);
                out[static_cast<std::size_t>(i) * m + j] = v;
                out[static_cast<std::size_t>(j) * m + i] = -v;
            }
        return out;
    });
}

VectorField covariant_derivative(const Connection& nabla, const VectorField& X,
                                 const VectorField& Y) {
    require_same_chart(*nabla.chart(), *X.chart());
    require_same_chart(*nabla.chart(), *Y.chart());
    auto chart = nabla.chart();
    const int m = chart->dim();
    return VectorField::from_fn(chart, [nabla, X, Y, m](std::span<const double> p, int order) {
        const int k1 = inner_order(order);
        auto Xj = X.jets(p, order);
        auto Yj = Y.jets(p, k1);
        auto G = nabla.christoffels(p, order);
        std::vector<Jet> out;
        out.reserve(m);
        for (int k = 0; k < m; ++k) {
            Jet acc = Jet::constant(0.0, m, order);
            for (int i = 0; i < m; ++i) {
                acc += Xj[i] * Yj[k].partial(i);
                for (int j = 0; j < m; ++j)
                    acc += G[(static_cast<std::size_t>(k) * m + i) * m + j] * Xj[i] *
                           Yj[j].truncated(order);
            }
            out.push_back(acc);
        }
        return out;
    });
}

VectorField torsion_field(const Connection& nabla, const VectorField& X, const VectorField& Y) {
    auto a = covariant_derivative(nabla, X, Y);
    auto b = covariant_derivative(nabla, Y, X);
    auto c = lie_bracket(X, Y);
    auto chart = nabla.chart();
    const int m = chart->dim();
    return VectorField::from_fn(chart, [a, b, c, m](std::span<const double> p, int order) {
        auto aj = a.jets(p, order);
        auto bj = b.jets(p, order);
        auto cj = c.jets(p, order);
        std::vector<Jet> out;
        out.reserve(m);
        for (int k = 0; k < m; ++k) out.push_back(aj[k] - bj[k] - cj[k]);
        return out;
    });
}

std::vector<double> torsion(const Connection& nabla, const VectorField& X, const VectorField& Y,
                            std::span<const double> p) {
    return torsion_field(nabla, X, Y).values(p);
}

std::vector<Jet> curvature_tensor(const Connection& nabla, std::span<const double> p, int order) {
    const int m = nabla.chart()->dim();
    const int k1 = inner_order(order);
    auto G = nabla.christoffels(p, k1);
    auto at = [m, &G](int k, int i, int j) -> const Jet& {
        return G[(static_cast<std::size_t>(k) * m + i) * m + j];
    };
    std::vector<Jet> R(static_cast<std::size_t>(m) * m * m * m, Jet::constant(0.0, m, order));
    for (int l = 0; l < m; ++l)
        for (int k = 0; k < m; ++k)
            for (int i = 0; i < m; ++i)
                for (int j = i + 1; j < m; ++j) {
                    Jet v = at(l, j, k).partial(i) - at(l, i, k).partial(j);
                    for (int mm = 0; mm < m; ++mm)
                        v += at(l, i, mm).truncated(order) * at(mm, j, k).truncated(order) -
                             at(l, j, mm).truncated(order) * at(mm, i, k).truncated(order);
                    R[((static_cast<std::size_t>(l) * m + k) * m + i) * m + j] = v;
                    R[((static_cast<std::size_t>(l) * m + k) * m + j) * m + i] = -v;
                }
    return R;
}

std::vector<double> curvature(const Connection& nabla, const VectorField& X, const VectorField& Y,
                              const VectorField& Z, std::span<const double> p) {
    require_same_chart(*nabla.chart(), *X.chart());
    require_same_chart(*nabla.chart(), *Y.chart());
    require_same_chart(*nabla.chart(), *Z.chart());
    const int m = nabla.chart()->dim();
    auto R = curvature_tensor(nabla, p, 0);
    auto Xv = X.values(p);
    auto Yv = Y.values(p);
    auto Zv = Z.values(p);
    std::vector<double> out(m, 0.0);
    for (int l = 0; l < m; ++l) {
        double acc = 0.0;
        for (int k = 0; k < m; ++k)
            for (int i = 0; i < m; ++i)
                for (int j = 0; j < m; ++j)
                    acc += R[((static_cast<std::size_t>(l) * m + k) * m + i) * m + j].value() *
                           Zv[k] * Xv[i] * Yv[j];
        out[l] = acc;
    }
    return out;
}

VectorField pushforward_vf(const Map& phi, const Map& phi_inv, const VectorField& X) {
    require_same_chart(*phi.src(), *X.chart());
    require_inverse(phi, phi_inv);
    auto chart = phi.dst();
    const int ms = phi.src()->dim();
    const int md = chart->dim();
    return VectorField::from_fn(chart, [phi, phi_inv, X, ms, md](std::span<const double> p,
                                                                 int order) {
        const int k1 = inner_order(order);
        auto qj = phi_inv.jets(p, order); // source-point jets as functions of p
        std::vector<double> q0(ms);
        for (int i = 0; i < ms; ++i) q0[i] = qj[i].value();

        auto Xsrc = X.jets(q0, order);
        auto phij = phi.jets(q0, k1);
        std::vector<Jet> out;
        out.reserve(md);
        for (int b = 0; b < md; ++b) {
            Jet acc = Jet::constant(0.0, md, order);
            for (int a = 0; a < ms; ++a) {
                Jet dphi = compose(phij[b].partial(a), qj);
                Jet xa = compose(Xsrc[a], qj);
                acc += dphi * xa;
            }
            out.push_back(acc);
        }
        return out;
    });
}

TwoForm pullback_form(const Map& psi, const TwoForm& w) {
    require_same_chart(*psi.dst(), *w.chart());
    auto chart = psi.src();
    const int ms = chart->dim();
    const int md = psi.dst()->dim();
    return TwoForm::from_fn(chart, [psi, w, ms, md](std::span<const double> p, int order) {
        const int k1 = inner_order(order);
        auto psij = psi.jets(p, k1);
        std::vector<double> q0(md);
        for (int a = 0; a < md; ++a) q0[a] = psij[a].value();
        auto wj = w.matrix(q0, order);

        std::vector<Jet> wcomp(wj.size());
        std::vector<Jet> psik;
        psik.reserve(md);
        for (int a = 0; a < md; ++a) psik.push_back(psij[a].truncated(order));
        for (std::size_t t = 0; t < wj.size(); ++t) wcomp[t] = compose(wj[t], psik);

        std::vector<Jet> d(static_cast<std::size_t>(md) * ms); // d[a*ms+i] = d_i psi^a
        for (int a = 0; a < md; ++a)
            for (int i = 0; i < ms; ++i)
                d[static_cast<std::size_t>(a) * ms + i] = psij[a].partial(i);

        std::vector<Jet> out(static_cast<std::size_t>(ms) * ms, Jet::constant(0.0, ms, order));
        for (int i = 0; i < ms; ++i)
            for (int j = i + 1; j < ms; ++j) {
                Jet v = Jet::constant(0.0, ms, order);
                for (int a = 0; a < md; ++a)
                    for (int b = 0; b < md; ++b) {
                        const Jet& wab = wcomp[static_cast<std::size_t>(a) * md + b];
                        v += wab * d[static_cast<std::size_t>(a) * ms + i] *
                             d[static_cast<std::size_t>(b) * ms + j];
                    }
                out[static_cast<std::size_t>(i) * ms + j] = v;
                out[static_cast<std::size_t>(j) * ms + i] = -v;
            }
        return out;
    });
}

VectorField vf_add(const VectorField& X, const VectorField& Y) {
    require_same_chart(*X.chart(), *Y.chart());
    const int m = X.chart()->dim();
    return VectorField::from_fn(X.chart(), [X, Y, m](std::span<const double> p, int order) {
        auto a = X.jets(p, order);
        auto b = Y.jets(p, order);
        for (int i = 0; i < m; ++i) a[i] += b[i];
        return a;
    });
}

VectorField vf_scale(const ScalarField& f, const VectorField& X) {
    require_same_chart(*f.chart(), *X.chart());
    return VectorField::from_fn(X.chart(), [f, X](std::span<const double> p, int order) {
        auto xs = X.jets(p, order);
        Jet fj = f.jet(p, order);
        for (auto& x : xs) x = fj * x;
        return xs;
    });
}

VectorField vf_scale(double c, const VectorField& X) {
    return VectorField::from_fn(X.chart(), [c, X](std::span<const double> p, int order) {
        auto xs = X.jets(p, order);
        for (auto& x : xs) x *= c;
        return xs;
    });
}

TwoForm form_add(const TwoForm& a, const TwoForm& b) {
    require_same_chart(*a.chart(), *b.chart());
    return TwoForm::from_fn(a.chart(), [a, b](std::span<const double> p, int order) {
        auto x = a.matrix(p, order);
        auto y = b.matrix(p, order);
        for (std::size_t t = 0; t < x.size(); ++t) x[t] += y[t];
        return x;
    });
}

} // namespace bilag
