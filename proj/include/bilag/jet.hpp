#pragma once

#include <cstdint>
#include <span>
#include <unordered_map>
#include <vector>

#include "bilag/errors.hpp"

namespace bilag {

// Hard limits for truncated Taylor arithmetic. Order 4 is enough for every
// stacked derivative this toolkit computes (curvature of a connection derived
// from first derivatives of a 2-form tops out at order 3 queries).
inline constexpr int kMaxJetOrder = 4;
inline constexpr int kMaxJetDim   = 16;

// Shared bookkeeping for all jets of a given (dim, order): the graded-lex
// enumeration of multi-indices with total degree <= order, the truncated
// convolution table, and index shifts. Instances are interned and immutable.
class JetLayout {
public:
    static const JetLayout& get(int dim, int order);

    int dim() const { return dim_; }
    int order() const { return order_; }
    int size() const { return static_cast<int>(degree_.size()); }

    std::span<const std::uint8_t> exponents(int k) const {
        return {exps_.data() + static_cast<std::size_t>(k) * dim_, static_cast<std::size_t>(dim_)};
    }
    int degree(int k) const { return degree_[k]; }

    // Index of a multi-index, or -1 if its degree exceeds the order.
    int index_of(std::span<const std::uint8_t> alpha) const;

    // Index of alpha + e_var (-1 past the order) and alpha - e_var (-1 if alpha_var == 0).
    int raise(int k, int var) const { return shift_up_[static_cast<std::size_t>(k) * dim_ + var]; }
    int lower(int k, int var) const { return shift_dn_[static_cast<std::size_t>(k) * dim_ + var]; }

    struct MulEntry {
        std::int32_t a, b, target;
    };
    std::span<const MulEntry> mul_table() const { return {mul_.data(), mul_.size()}; }

private:
    JetLayout(int dim, int order);

    int dim_, order_;
    std::vector<std::uint8_t> exps_;   // size() * dim
    std::vector<std::uint8_t> degree_; // size()
    std::vector<std::int32_t> shift_up_, shift_dn_;
    std::vector<MulEntry> mul_;
    std::unordered_map<std::uint64_t, std::int32_t> index_; // packed exponents -> slot
};

// Truncated multivariate Taylor expansion of a scalar at a point. The
// coefficient of multi-index alpha is (1/alpha!) d^alpha f. Value semantics,
// immutable layouts, exact truncated-Taylor algebra.
class Jet {
public:
    Jet() : layout_(&JetLayout::get(1, 0)), c_(1, 0.0) {}
    static Jet constant(double v, int dim, int order);
    // Seeded coordinate jet: value v, unit first derivative in slot `var`.
    static Jet variable(double v, int var, int dim, int order);

    int dim() const { return layout_->dim(); }
    int order() const { return layout_->order(); }
    int size() const { return layout_->size(); }
    const JetLayout& layout() const { return *layout_; }

    double value() const { return c_[0]; }
    double coeff(int k) const { return c_[k]; }
    double coeff(std::span<const std::uint8_t> alpha) const;
    double& coeff_ref(int k) { return c_[k]; }
    std::span<const double> coeffs() const { return {c_.data(), c_.size()}; }

    // First derivative w.r.t. coordinate `var`: drops one order.
    Jet partial(int var) const;
    Jet truncated(int order) const;

    Jet operator-() const;
    Jet& operator+=(const Jet& rhs);
    Jet& operator-=(const Jet& rhs);
    Jet& operator+=(double rhs) { c_[0] += rhs; return *this; }
    Jet& operator-=(double rhs) { c_[0] -= rhs; return *this; }
    Jet& operator*=(double rhs);

    friend Jet operator+(Jet a, const Jet& b) { a += b; return a; }
    friend Jet operator-(Jet a, const Jet& b) { a -= b; return a; }
    friend Jet operator+(Jet a, double b) { a += b; return a; }
    friend Jet operator+(double a, Jet b) { b += a; return b; }
    friend Jet operator-(Jet a, double b) { a -= b; return a; }
    friend Jet operator-(double a, const Jet& b);
    friend Jet operator*(const Jet& a, const Jet& b);
    friend Jet operator*(Jet a, double b) { a *= b; return a; }
    friend Jet operator*(double a, Jet b) { b *= a; return b; }
    friend Jet operator/(const Jet& a, const Jet& b);
    friend Jet operator/(Jet a, double b);
    friend Jet operator/(double a, const Jet& b);

    friend Jet sin(const Jet& x);
    friend Jet cos(const Jet& x);
    friend Jet tan(const Jet& x);
    friend Jet exp(const Jet& x);
    friend Jet log(const Jet& x);
    friend Jet sqrt(const Jet& x);
    friend Jet abs(const Jet& x);
    // Integer exponents work for any base; fractional ones require base > 0.
    friend Jet pow(const Jet& base, double expo);
    friend Jet pow(const Jet& base, const Jet& expo);

    // Evaluates the polynomial sum c[k] * (x - x0)^k in truncated arithmetic.
    friend Jet compose_series(const Jet& x, std::span<const double> c);

private:
    Jet(const JetLayout* layout) : layout_(layout), c_(layout->size(), 0.0) {}
    static const JetLayout* common_layout(const Jet& a, const Jet& b);

    const JetLayout* layout_;
    std::vector<double> c_;
};

// Re-indexes a jet into a larger variable space: old variable i becomes
// variable var_map[i] of a dim-`new_dim` jet. Used to place base-chart jets
// inside bundle-chart jets.
Jet embed(const Jet& a, int new_dim, std::span<const int> var_map);

// Coordinate jets for a point: slot i seeded as variable i.
std::vector<Jet> seed_jets(std::span<const double> p, int order);

// Taylor expansion of f(g_1, ..., g_m) where `f` is a jet in m variables
// expanded at (g_i.value()) and each g_i is a jet in the target space.
Jet compose(const Jet& f, std::span<const Jet> g);

// Gaussian elimination with partial pivoting on constant terms, in jet
// arithmetic. `a` is n x n row-major, `b` holds one or more right-hand-side
// columns stacked row-major (n rows, nrhs columns). Throws DomainError on a
// structurally singular pivot.
std::vector<Jet> solve_linear(std::vector<Jet> a, std::vector<Jet> b, int n, int nrhs = 1);

} // namespace bilag
