#pragma once

#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <span>
#include <tuple>
#include <utility>
#include <vector>

#include "bilag/chart.hpp"
#include "bilag/expr.hpp"
#include "bilag/jet.hpp"

namespace bilag {

// Tensor fields are stored either as coordinate expressions or as closures
// that produce the full component array as jets at a query point. Derived
// objects (exterior derivatives, lifts, pulled-back forms, the Hess
// connection) are closures; differentiation happens through jet arithmetic
// at the query point, never by rewriting expressions.
using TensorEval = std::function<std::vector<Jet>(std::span<const double>, int)>;

class ScalarField {
public:
    ScalarField() = default;
    static ScalarField from_expr(ChartPtr chart, ExprPtr e);
    static ScalarField from_fn(ChartPtr chart, std::function<Jet(std::span<const double>, int)> fn);
    static ScalarField constant(ChartPtr chart, double v);

    const ChartPtr& chart() const { return chart_; }
    Jet jet(std::span<const double> p, int order) const;
    double operator()(std::span<const double> p) const;
    const ExprPtr& expr() const { return expr_; }
    bool valid() const { return chart_ != nullptr; }

private:
    ChartPtr chart_;
    std::function<Jet(std::span<const double>, int)> fn_;
    ExprPtr expr_;
    std::shared_ptr<const CompiledExpr> comp_;
};

class VectorField {
public:
    VectorField() = default;
    static VectorField from_exprs(ChartPtr chart, std::vector<ExprPtr> comps);
    static VectorField from_fn(ChartPtr chart, TensorEval fn);
    static VectorField coordinate(ChartPtr chart, int i); // d/dx_i
    static VectorField zero(ChartPtr chart);

    const ChartPtr& chart() const { return chart_; }
    // all m components as jets of the requested order
    std::vector<Jet> jets(std::span<const double> p, int order) const;
    std::vector<double> values(std::span<const double> p) const;
    const std::vector<ExprPtr>& exprs() const { return exprs_; }
    bool valid() const { return chart_ != nullptr; }

private:
    ChartPtr chart_;
    TensorEval fn_;
    std::vector<ExprPtr> exprs_;
};

class OneForm {
public:
    OneForm() = default;
    static OneForm from_exprs(ChartPtr chart, std::vector<ExprPtr> comps);
    static OneForm from_fn(ChartPtr chart, TensorEval fn);
    static OneForm coordinate(ChartPtr chart, int i); // dx_i

    const ChartPtr& chart() const { return chart_; }
    std::vector<Jet> jets(std::span<const double> p, int order) const;
    const std::vector<ExprPtr>& exprs() const { return exprs_; }
    bool valid() const { return chart_ != nullptr; }

private:
    ChartPtr chart_;
    TensorEval fn_;
    std::vector<ExprPtr> exprs_;
};

class TwoForm {
public:
    TwoForm() = default;
    // entries (i, j, expr) with i < j; the matrix is completed antisymmetrically
    static TwoForm from_entries(ChartPtr chart, std::vector<std::tuple<int, int, ExprPtr>> upper);
    static TwoForm from_fn(ChartPtr chart, TensorEval fn);

    const ChartPtr& chart() const { return chart_; }
    // full m*m component matrix, row-major
    std::vector<Jet> matrix(std::span<const double> p, int order) const;
    std::vector<double> values(std::span<const double> p) const;
    const std::vector<std::tuple<int, int, ExprPtr>>& entries() const { return upper_; }
    bool valid() const { return chart_ != nullptr; }

private:
    ChartPtr chart_;
    TensorEval fn_;
    std::vector<std::tuple<int, int, ExprPtr>> upper_;
};

// Linear connection through its Christoffel symbols, nabla_{d_i} d_j =
// Gamma^k_{ij} d_k; component array is flattened as (k*m + i)*m + j.
// Derived connections are expensive closures, so evaluations are memoized
// per (point, order).
class Connection {
public:
    Connection() = default;
    static Connection from_exprs(ChartPtr chart, std::vector<ExprPtr> gamma); // m^3 entries
    static Connection from_fn(ChartPtr chart, TensorEval fn, bool memoize = true);
    static Connection zero(ChartPtr chart);

    const ChartPtr& chart() const { return chart_; }
    std::vector<Jet> christoffels(std::span<const double> p, int order) const;
    const std::vector<ExprPtr>& exprs() const { return exprs_; }
    bool valid() const { return chart_ != nullptr; }

private:
    struct Cache {
        std::mutex mu;
        std::map<std::pair<std::vector<double>, int>, std::vector<Jet>> entries;
    };
    ChartPtr chart_;
    TensorEval fn_;
    std::vector<ExprPtr> exprs_;
    std::shared_ptr<Cache> cache_;
};

// Expression map between charts. Inverses are supplied, never computed;
// consumers verify the pair before trusting it.
class Map {
public:
    Map() = default;
    Map(ChartPtr src, ChartPtr dst, std::vector<ExprPtr> comps);

    const ChartPtr& src() const { return src_; }
    const ChartPtr& dst() const { return dst_; }
    std::vector<double> operator()(std::span<const double> p) const;
    std::vector<Jet> jets(std::span<const double> p, int order) const;
    const std::vector<ExprPtr>& exprs() const { return comps_; }
    bool valid() const { return src_ != nullptr; }

    static Map identity(ChartPtr chart);

private:
    ChartPtr src_, dst_;
    std::vector<ExprPtr> comps_;
    std::vector<CompiledExpr> compiled_;
};

// max |phi(phi_inv(p)) - p| over a deterministic sample of phi_inv's domain
// box, plus the symmetric direction.
double inverse_residual(const Map& phi, const Map& phi_inv, int samples, std::uint64_t seed);
// Throws DomainError describing the failure when the residual exceeds tol.
void require_inverse(const Map& phi, const Map& phi_inv, double tol = 1e-8, int samples = 100,
                     std::uint64_t seed = 1);

} // namespace bilag
