#include "bilag/fields.hpp"

#include <cmath>

#include "bilag/errors.hpp"

namespace bilag {

namespace {

std::vector<Jet> seed_point(std::span<const double> p, int order) {
    const int m = static_cast<int>(p.size());
    std::vector<Jet> seeds;
    seeds.reserve(p.size());
    for (int i = 0; i < m; ++i) seeds.push_back(Jet::variable(p[i], i, m, order));
    return seeds;
}

void check_point(const Chart& c, std::span<const double> p) {
    if (static_cast<int>(p.size()) != c.dim())
        throw DomainError("point dimension " + std::to_string(p.size()) +
                          " does not match chart '" + c.name + "'");
}

void check_order(int order) {
    if (order < 0 || order > kMaxJetOrder)
        throw DomainError("jet order " + std::to_string(order) + " outside [0, " +
                          std::to_string(kMaxJetOrder) + "]");
}

std::vector<CompiledExpr> compile_all(const Chart& chart, const std::vector<ExprPtr>& es) {
    std::vector<CompiledExpr> out;
    out.reserve(es.size());
    for (const auto& e : es) {
        if (!e) throw DomainError("null component expression on chart '" + chart.name + "'");
        out.emplace_back(e, std::span<const std::string>(chart.coords));
    }
    return out;
}

ExprPtr literal_expr(double v) {
    auto e = std::make_shared<Expr>();
    e->kind = ExprKind::Literal;
    e->literal = v;
    return e;
}

} // namespace

// ---------------------------------------------------------------- ScalarField

ScalarField ScalarField::from_expr(ChartPtr chart, ExprPtr e) {
    ScalarField f;
    f.chart_ = std::move(chart);
    f.expr_ = std::move(e);
    f.comp_ = std::make_shared<CompiledExpr>(f.expr_,
                                             std::span<const std::string>(f.chart_->coords));
    auto comp = f.comp_;
    f.fn_ = [comp](std::span<const double> p, int order) { return comp->jet(p, order); };
    return f;
}

ScalarField ScalarField::from_fn(ChartPtr chart,
                                 std::function<Jet(std::span<const double>, int)> fn) {
    ScalarField f;
    f.chart_ = std::move(chart);
    f.fn_ = std::move(fn);
    return f;
}

ScalarField ScalarField::constant(ChartPtr chart, double v) {
    return from_expr(std::move(chart), literal_expr(v));
}

Jet ScalarField::jet(std::span<const double> p, int order) const {
    check_point(*chart_, p);
    check_order(order);
    return fn_(p, order);
}

double ScalarField::operator()(std::span<const double> p) const {
    check_point(*chart_, p);
    if (comp_) return (*comp_)(p);
    return fn_(p, 0).value();
}

// ---------------------------------------------------------------- VectorField

VectorField VectorField::from_exprs(ChartPtr chart, std::vector<ExprPtr> comps) {
    if (static_cast<int>(comps.size()) != chart->dim())
        throw DomainError("vector field on '" + chart->name + "' needs " +
                          std::to_string(chart->dim()) + " components, got " +
                          std::to_string(comps.size()));
    VectorField X;
    X.chart_ = chart;
    X.exprs_ = std::move(comps);
    auto compiled = std::make_shared<std::vector<CompiledExpr>>(compile_all(*chart, X.exprs_));
    X.fn_ = [compiled](std::span<const double> p, int order) {
        auto seeds = seed_point(p, order);
        std::vector<Jet> out;
        out.reserve(compiled->size());
        for (const auto& c : *compiled) out.push_back(c.jet(seeds));
        return out;
    };
    return X;
}

VectorField VectorField::from_fn(ChartPtr chart, TensorEval fn) {
    VectorField X;
    X.chart_ = std::move(chart);
    X.fn_ = std::move(fn);
    return X;
}

VectorField VectorField::coordinate(ChartPtr chart, int i) {
    std::vector<ExprPtr> comps;
    for (int j = 0; j < chart->dim(); ++j) comps.push_back(literal_expr(j == i ? 1.0 : 0.0));
    return from_exprs(std::move(chart), std::move(comps));
}

VectorField VectorField::zero(ChartPtr chart) {
    std::vector<ExprPtr> comps;
    for (int j = 0; j < chart->dim(); ++j) comps.push_back(literal_expr(0.0));
    return from_exprs(std::move(chart), std::move(comps));
}

std::vector<Jet> VectorField::jets(std::span<const double> p, int order) const {
    check_point(*chart_, p);
    check_order(order);
    auto out = fn_(p, order);
    if (static_cast<int>(out.size()) != chart_->dim())
        throw DomainError("vector field produced wrong component count on '" + chart_->name + "'");
    return out;
}

std::vector<double> VectorField::values(std::span<const double> p) const {
    auto js = jets(p, 0);
    std::vector<double> v(js.size());
    for (std::size_t i = 0; i < js.size(); ++i) v[i] = js[i].value();
    return v;
}

// ------------------------------------------------------------------- OneForm

OneForm OneForm::from_exprs(ChartPtr chart, std::vector<ExprPtr> comps) {
    if (static_cast<int>(comps.size()) != chart->dim())
        throw DomainError("one-form on '" + chart->name + "' needs " +
                          std::to_string(chart->dim()) + " components");
    OneForm a;
    a.chart_ = chart;
    a.exprs_ = std::move(comps);
    auto compiled = std::make_shared<std::vector<CompiledExpr>>(compile_all(*chart, a.exprs_));
    a.fn_ = [compiled](std::span<const double> p, int order) {
        auto seeds = seed_point(p, order);
        std::vector<Jet> out;
        out.reserve(compiled->size());
        for (const auto& c : *compiled) out.push_back(c.jet(seeds));
        return out;
    };
    return a;
}

OneForm OneForm::from_fn(ChartPtr chart, TensorEval fn) {
    OneForm a;
    a.chart_ = std::move(chart);
    a.fn_ = std::move(fn);
    return a;
}

OneForm OneForm::coordinate(ChartPtr chart, int i) {
    std::vector<ExprPtr> comps;
    for (int j = 0; j < chart->dim(); ++j) comps.push_back(literal_expr(j == i ? 1.0 : 0.0));
    return from_exprs(std::move(chart), std::move(comps));
}

std::vector<Jet> OneForm::jets(std::span<const double> p, int order) const {
    check_point(*chart_, p);
    check_order(order);
    auto out = fn_(p, order);
    if (static_cast<int>(out.size()) != chart_->dim())
        throw DomainError("one-form produced wrong component count on '" + chart_->name + "'");
    return out;
}

// ------------------------------------------------------------------- TwoForm

TwoForm TwoForm::from_entries(ChartPtr chart,
                              std::vector<std::tuple<int, int, ExprPtr>> upper) {
    const int m = chart->dim();
    for (auto& [i, j, e] : upper) {
        if (i < 0 || j < 0 || i >= m || j >= m)
            throw DomainError("two-form entry index out of range on '" + chart->name + "'");
        if (i >= j)
            throw DomainError("two-form entries must be strictly upper (i < j) on '" +
                              chart->name + "'");
        if (!e) throw DomainError("null two-form entry on '" + chart->name + "'");
    }
    TwoForm w;
    w.chart_ = chart;
    w.upper_ = std::move(upper);
    struct Entry {
        int i, j;
        CompiledExpr c;
    };
    auto compiled = std::make_shared<std::vector<Entry>>();
    for (const auto& [i, j, e] : w.upper_)
        compiled->push_back({i, j, CompiledExpr(e, std::span<const std::string>(chart->coords))});
    w.fn_ = [compiled, m](std::span<const double> p, int order) {
        auto seeds = seed_point(p, order);
        std::vector<Jet> out(static_cast<std::size_t>(m) * m,
                             Jet::constant(0.0, m, order));
        for (const auto& ent : *compiled) {
            Jet v = ent.c.jet(seeds);
            out[static_cast<std::size_t>(ent.i) * m + ent.j] = v;
            out[static_cast<std::size_t>(ent.j) * m + ent.i] = -v;
        }
        return out;
    };
    return w;
}

TwoForm TwoForm::from_fn(ChartPtr chart, TensorEval fn) {
    TwoForm w;
    w.chart_ = std::move(chart);
    w.fn_ = std::move(fn);
    return w;
}

std::vector<Jet> TwoForm::matrix(std::span<const double> p, int order) const {
    check_point(*chart_, p);
    check_order(order);
    auto out = fn_(p, order);
    const int m = chart_->dim();
    if (static_cast<int>(out.size()) != m * m)
        throw DomainError("two-form produced wrong component count on '" + chart_->name + "'");
    return out;
}

std::vector<double> TwoForm::values(std::span<const double> p) const {
    auto js = matrix(p, 0);
    std::vector<double> v(js.size());
    for (std::size_t i = 0; i < js.size(); ++i) v[i] = js[i].value();
    return v;
}

// ---------------------------------------------------------------- Connection

Connection Connection::from_exprs(ChartPtr chart, std::vector<ExprPtr> gamma) {
    const int m = chart->dim();
    if (static_cast<int>(gamma.size()) != m * m * m)
        throw DomainError("connection on '" + chart->name + "' needs " +
                          std::to_string(m * m * m) + " Christoffel expressions");
    Connection n;
    n.chart_ = chart;
    n.exprs_ = std::move(gamma);
    auto compiled = std::make_shared<std::vector<CompiledExpr>>(compile_all(*chart, n.exprs_));
    n.fn_ = [compiled](std::span<const double> p, int order) {
        auto seeds = seed_point(p, order);
        std::vector<Jet> out;
        out.reserve(compiled->size());
        for (const auto& c : *compiled) out.push_back(c.jet(seeds));
        return out;
    };
    return n;
}

Connection Connection::from_fn(ChartPtr chart, TensorEval fn, bool memoize) {
    Connection n;
    n.chart_ = std::move(chart);
    n.fn_ = std::move(fn);
    if (memoize) n.cache_ = std::make_shared<Cache>();
    return n;
}

Connection Connection::zero(ChartPtr chart) {
    const int m = chart->dim();
    std::vector<ExprPtr> gamma(static_cast<std::size_t>(m) * m * m);
    for (auto& g : gamma) g = literal_expr(0.0);
    return from_exprs(std::move(chart), std::move(gamma));
}

std::vector<Jet> Connection::christoffels(std::span<const double> p, int order) const {
    check_point(*chart_, p);
    check_order(order);
    if (!cache_) return fn_(p, order);
    std::pair<std::vector<double>, int> key(std::vector<double>(p.begin(), p.end()), order);
    {
        std::lock_guard lock(cache_->mu);
        auto it = cache_->entries.find(key);
        if (it != cache_->entries.end()) return it->second;
    }
    auto val = fn_(p, order);
    std::lock_guard lock(cache_->mu);
    return cache_->entries.emplace(std::move(key), std::move(val)).first->second;
}

// ----------------------------------------------------------------------- Map

Map::Map(ChartPtr src, ChartPtr dst, std::vector<ExprPtr> comps)
    : src_(std::move(src)), dst_(std::move(dst)), comps_(std::move(comps)) {
    if (static_cast<int>(comps_.size()) != dst_->dim())
        throw DomainError("map into '" + dst_->name + "' needs " + std::to_string(dst_->dim()) +
                          " components");
    compiled_ = compile_all(*src_, comps_);
}

Map Map::identity(ChartPtr chart) {
    std::vector<ExprPtr> comps;
    for (const auto& c : chart->coords) {
        auto e = std::make_shared<Expr>();
        e->kind = ExprKind::Variable;
        e->name = c;
        comps.push_back(std::move(e));
    }
    return Map(chart, chart, std::move(comps));
}

std::vector<double> Map::operator()(std::span<const double> p) const {
    check_point(*src_, p);
    std::vector<double> out;
    out.reserve(compiled_.size());
    for (const auto& c : compiled_) out.push_back(c(p));
    return out;
}

std::vector<Jet> Map::jets(std::span<const double> p, int order) const {
    check_point(*src_, p);
    check_order(order);
    auto seeds = seed_point(p, order);
    std::vector<Jet> out;
    out.reserve(compiled_.size());
    for (const auto& c : compiled_) out.push_back(c.jet(seeds));
    return out;
}

double inverse_residual(const Map& phi, const Map& phi_inv, int samples, std::uint64_t seed) {
    if (!phi.valid() || !phi_inv.valid()) throw DomainError("invalid map pair");
    if (!same_chart(*phi.dst(), *phi_inv.src()) || !same_chart(*phi.src(), *phi_inv.dst()))
        throw DomainError("inverse pair charts do not line up: '" + phi.src()->name + "'->'" +
                          phi.dst()->name + "' vs '" + phi_inv.src()->name + "'->'" +
                          phi_inv.dst()->name + "'");
    double worst = 0.0;
    for (const auto& p : sample_box(*phi_inv.src(), samples, seed)) {
        auto back = phi(phi_inv(p));
        for (std::size_t i = 0; i < p.size(); ++i)
            worst = std::max(worst, std::abs(back[i] - p[i]));
    }
    for (const auto& p : sample_box(*phi.src(), samples, seed + 1)) {
        auto back = phi_inv(phi(p));
        for (std::size_t i = 0; i < p.size(); ++i)
            worst = std::max(worst, std::abs(back[i] - p[i]));
    }
    return worst;
}

void require_inverse(const Map& phi, const Map& phi_inv, double tol, int samples,
                     std::uint64_t seed) {
    double r = inverse_residual(phi, phi_inv, samples, seed);
    if (!(r <= tol))
        throw DomainError("maps '" + phi.src()->name + "'->'" + phi.dst()->name +
                          "' fail the inverse check: residual " + std::to_string(r) +
                          " exceeds " + std::to_string(tol));
}

} // namespace bilag
