#include "bilag/jet.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <map>
#include <mutex>
#include <unordered_map>

namespace bilag {

namespace {

std::uint64_t pack_alpha(std::span<const std::uint8_t> alpha) {
    std::uint64_t key = 0;
    for (std::uint8_t e : alpha) key = (key << 4) | (e & 0xF);
    return key;
}

std::map<std::pair<int, int>, const JetLayout*>& registry() {
    static std::map<std::pair<int, int>, const JetLayout*> r;
    return r;
}
std::mutex& registry_mutex() {
    static std::mutex m;
    return m;
}

} // namespace

const JetLayout& JetLayout::get(int dim, int order) {
    if (dim < 1 || dim > kMaxJetDim) throw DomainError("jet dimension out of range");
    if (order < 0 || order > kMaxJetOrder) throw DomainError("jet order out of range");
    std::lock_guard<std::mutex> lock(registry_mutex());
    auto& reg = registry();
    auto it = reg.find({dim, order});
    if (it != reg.end()) return *it->second;
    auto* layout = new JetLayout(dim, order); // interned for process lifetime
    reg.emplace(std::pair{dim, order}, layout);
    return *layout;
}

JetLayout::JetLayout(int dim, int order) : dim_(dim), order_(order) {
    // Graded lexicographic enumeration of multi-indices with |alpha| <= order.
    std::vector<std::uint8_t> alpha(static_cast<std::size_t>(dim), 0);
    auto emit = [&](int deg) {
        exps_.insert(exps_.end(), alpha.begin(), alpha.end());
        degree_.push_back(static_cast<std::uint8_t>(deg));
    };
    auto gen = [&](auto&& self, int slot, int remaining, int deg) -> void {
        if (slot == dim - 1) {
            alpha[slot] = static_cast<std::uint8_t>(remaining);
            emit(deg);
            return;
        }
        for (int e = remaining; e >= 0; --e) {
            alpha[slot] = static_cast<std::uint8_t>(e);
            self(self, slot + 1, remaining - e, deg);
        }
    };
    for (int deg = 0; deg <= order; ++deg) gen(gen, 0, deg, deg);

    const int n = size();
    for (int k = 0; k < n; ++k) index_.emplace(pack_alpha(exponents(k)), k);

    shift_up_.assign(static_cast<std::size_t>(n) * dim, -1);
    shift_dn_.assign(static_cast<std::size_t>(n) * dim, -1);
    std::vector<std::uint8_t> tmp(static_cast<std::size_t>(dim));
    for (int k = 0; k < n; ++k) {
        auto a = exponents(k);
        for (int v = 0; v < dim; ++v) {
            std::copy(a.begin(), a.end(), tmp.begin());
            tmp[v] += 1;
            auto it = index_.find(pack_alpha(tmp));
            if (it != index_.end()) shift_up_[static_cast<std::size_t>(k) * dim + v] = it->second;
            if (a[v] > 0) {
                std::copy(a.begin(), a.end(), tmp.begin());
                tmp[v] -= 1;
                shift_dn_[static_cast<std::size_t>(k) * dim + v] = index_.at(pack_alpha(tmp));
            }
        }
    }

    for (int ka = 0; ka < n; ++ka) {
        for (int kb = 0; kb < n; ++kb) {
            if (degree_[ka] + degree_[kb] > order) continue;
            auto a = exponents(ka);
            auto b = exponents(kb);
            for (int v = 0; v < dim; ++v) tmp[v] = static_cast<std::uint8_t>(a[v] + b[v]);
            mul_.push_back({ka, kb, index_.at(pack_alpha(tmp))});
        }
    }
}

int JetLayout::index_of(std::span<const std::uint8_t> alpha) const {
    int deg = 0;
    for (std::uint8_t e : alpha) deg += e;
    if (deg > order_) return -1;
    auto it = index_.find(pack_alpha(alpha));
    return it == index_.end() ? -1 : it->second;
}

Jet Jet::constant(double v, int dim, int order) {
    Jet j(&JetLayout::get(dim, order));
    j.c_[0] = v;
    return j;
}

Jet Jet::variable(double v, int var, int dim, int order) {
    if (var < 0 || var >= dim) throw DomainError("jet variable slot out of range");
    Jet j(&JetLayout::get(dim, order));
    j.c_[0] = v;
    if (order >= 1) j.c_[1 + var] = 1.0; // degree-1 block follows the constant slot
    return j;
}

double Jet::coeff(std::span<const std::uint8_t> alpha) const {
    int k = layout_->index_of(alpha);
    return k < 0 ? 0.0 : c_[k];
}

Jet Jet::partial(int var) const {
    if (order() < 1) throw DomainError("cannot differentiate an order-0 jet");
    Jet out(&JetLayout::get(dim(), order() - 1));
    const auto& lo = out.layout();
    const int n = lo.size();
    for (int k = 0; k < n; ++k) {
        // d/dx_v maps coefficient of alpha+e_v down to alpha, scaled by alpha_v+1.
        auto a = lo.exponents(k);
        int src = layout_->index_of(a); // same multi-index in the source layout
        int up = layout_->raise(src, var);
        if (up >= 0) out.c_[k] = c_[up] * (a[var] + 1);
    }
    return out;
}

Jet Jet::truncated(int order) const {
    if (order >= this->order()) return *this;
    Jet out(&JetLayout::get(dim(), order));
    std::copy(c_.begin(), c_.begin() + out.size(), out.c_.begin());
    return out;
}

const JetLayout* Jet::common_layout(const Jet& a, const Jet& b) {
    if (a.dim() != b.dim()) throw DomainError("jet dimension mismatch");
    return &JetLayout::get(a.dim(), std::min(a.order(), b.order()));
}

Jet Jet::operator-() const {
    Jet out = *this;
    for (double& v : out.c_) v = -v;
    return out;
}

Jet& Jet::operator+=(const Jet& rhs) {
    const JetLayout* lo = common_layout(*this, rhs);
    if (lo != layout_) *this = truncated(lo->order());
    for (int k = 0; k < size(); ++k) c_[k] += rhs.c_[k];
    return *this;
}

Jet& Jet::operator-=(const Jet& rhs) {
    const JetLayout* lo = common_layout(*this, rhs);
    if (lo != layout_) *this = truncated(lo->order());
    for (int k = 0; k < size(); ++k) c_[k] -= rhs.c_[k];
    return *this;
}

Jet& Jet::operator*=(double rhs) {
    for (double& v : c_) v *= rhs;
    return *this;
}

Jet operator-(double a, const Jet& b) {
    Jet out = -b;
    out.c_[0] += a;
    return out;
}

Jet operator*(const Jet& a, const Jet& b) {
    const JetLayout* lo = Jet::common_layout(a, b);
    Jet out(lo);
    if (a.layout_ == lo && b.layout_ == lo) {
        for (const auto& e : lo->mul_table()) out.c_[e.target] += a.c_[e.a] * b.c_[e.b];
        return out;
    }
    Jet at = a.truncated(lo->order());
    Jet bt = b.truncated(lo->order());
    for (const auto& e : lo->mul_table()) out.c_[e.target] += at.c_[e.a] * bt.c_[e.b];
    return out;
}

Jet compose_series(const Jet& x, std::span<const double> c) {
    // x = x0 + w with w nilpotent; returns sum c[k] * w^k.
    Jet w = x;
    w.c_[0] = 0.0;
    Jet acc = Jet::constant(c[0], x.dim(), x.order());
    Jet wp = w;
    const int n = std::min<int>(static_cast<int>(c.size()) - 1, x.order());
    for (int k = 1; k <= n; ++k) {
        acc += wp * c[k];
        if (k < n) wp = wp * w;
    }
    return acc;
}

Jet operator/(const Jet& a, const Jet& b) {
    const double b0 = b.value();
    if (b0 == 0.0) throw DomainError("division by zero");
    std::vector<double> c(static_cast<std::size_t>(b.order()) + 1);
    double p = 1.0 / b0;
    for (int k = 0; k <= b.order(); ++k) {
        c[k] = (k % 2 == 0 ? p : -p);
        p /= b0;
    }
    return a * compose_series(b, c);
}

Jet operator/(Jet a, double b) {
    if (b == 0.0) throw DomainError("division by zero");
    a *= 1.0 / b;
    return a;
}

Jet operator/(double a, const Jet& b) {
    return Jet::constant(a, b.dim(), b.order()) / b;
}

Jet sin(const Jet& x) {
    const double s = std::sin(x.value()), c = std::cos(x.value());
    const double tab[5] = {s, c, -s / 2.0, -c / 6.0, s / 24.0};
    return compose_series(x, {tab, static_cast<std::size_t>(x.order()) + 1});
}

Jet cos(const Jet& x) {
    const double s = std::sin(x.value()), c = std::cos(x.value());
    const double tab[5] = {c, -s, -c / 2.0, s / 6.0, c / 24.0};
    return compose_series(x, {tab, static_cast<std::size_t>(x.order()) + 1});
}

Jet tan(const Jet& x) {
    // Coefficients from the recurrence a_{k+1} = (1 + T^2)_k / (k+1).
    const int n = x.order();
    std::vector<double> a(static_cast<std::size_t>(n) + 1);
    a[0] = std::tan(x.value());
    for (int k = 0; k < n; ++k) {
        double sq = 0.0;
        for (int i = 0; i <= k; ++i) sq += a[i] * a[k - i];
        a[k + 1] = ((k == 0 ? 1.0 : 0.0) + sq) / (k + 1);
    }
    return compose_series(x, a);
}

Jet exp(const Jet& x) {
    const double e = std::exp(x.value());
    const double tab[5] = {e, e, e / 2.0, e / 6.0, e / 24.0};
    return compose_series(x, {tab, static_cast<std::size_t>(x.order()) + 1});
}

Jet log(const Jet& x) {
    const double x0 = x.value();
    if (!(x0 > 0.0)) throw DomainError("log of a non-positive value");
    const int n = x.order();
    std::vector<double> c(static_cast<std::size_t>(n) + 1);
    c[0] = std::log(x0);
    double p = 1.0 / x0;
    for (int k = 1; k <= n; ++k) {
        c[k] = (k % 2 == 1 ? p : -p) / k;
        p /= x0;
    }
    return compose_series(x, c);
}

Jet sqrt(const Jet& x) {
    const double x0 = x.value();
    if (x0 < 0.0) throw DomainError("sqrt of a negative value");
    if (x0 == 0.0 && x.order() >= 1) throw DomainError("sqrt is not differentiable at zero");
    const int n = x.order();
    std::vector<double> c(static_cast<std::size_t>(n) + 1);
    c[0] = std::sqrt(x0);
    // Binomial series for (x0 + w)^(1/2).
    double coef = 1.0;
    for (int k = 1; k <= n; ++k) {
        coef *= (0.5 - (k - 1)) / k;
        c[k] = coef * std::pow(x0, 0.5 - k);
    }
    return compose_series(x, c);
}

Jet abs(const Jet& x) {
    const double x0 = x.value();
    if (x0 == 0.0 && x.order() >= 1) throw DomainError("abs is not differentiable at zero");
    return x0 >= 0.0 ? x : -x;
}

Jet pow(const Jet& base, double expo) {
    const double b0 = base.value();
    const double r = std::round(expo);
    if (r == expo && std::abs(expo) <= 64.0) {
        // Integer exponent: repeated multiplication, valid for any base.
        long n = static_cast<long>(r);
        if (n == 0) return Jet::constant(1.0, base.dim(), base.order());
        bool inv = n < 0;
        n = std::labs(n);
        Jet acc = Jet::constant(1.0, base.dim(), base.order());
        Jet p = base;
        while (n > 0) {
            if (n & 1) acc = acc * p;
            n >>= 1;
            if (n > 0) p = p * p;
        }
        if (inv) return 1.0 / acc; // throws on zero base
        return acc;
    }
    if (!(b0 > 0.0)) throw DomainError("fractional power of a non-positive base");
    const int n = base.order();
    std::vector<double> c(static_cast<std::size_t>(n) + 1);
    double coef = 1.0;
    c[0] = std::pow(b0, expo);
    for (int k = 1; k <= n; ++k) {
        coef *= (expo - (k - 1)) / k;
        c[k] = coef * std::pow(b0, expo - k);
    }
    return compose_series(base, c);
}

Jet pow(const Jet& base, const Jet& expo) {
    // Constant exponents (the common case) take the specialised path so that
    // integer powers of negative bases keep working.
    bool constant_expo = true;
    for (int k = 1; k < expo.size(); ++k) {
        if (expo.coeff(k) != 0.0) { constant_expo = false; break; }
    }
    if (constant_expo) return pow(base, expo.value());
    if (!(base.value() > 0.0)) throw DomainError("fractional power of a non-positive base");
    return exp(expo * log(base));
}

Jet embed(const Jet& a, int new_dim, std::span<const int> var_map) {
    if (static_cast<int>(var_map.size()) != a.dim()) throw DomainError("embed: variable map size mismatch");
    Jet out = Jet::constant(0.0, new_dim, a.order());
    const auto& src = a.layout();
    const auto& dst = out.layout();
    std::vector<std::uint8_t> alpha(static_cast<std::size_t>(new_dim), 0);
    for (int k = 0; k < a.size(); ++k) {
        if (a.coeff(k) == 0.0) continue;
        std::fill(alpha.begin(), alpha.end(), 0);
        auto e = src.exponents(k);
        for (int v = 0; v < a.dim(); ++v) alpha[var_map[v]] = e[v];
        out.coeff_ref(dst.index_of(alpha)) = a.coeff(k);
    }
    return out;
}

std::vector<Jet> seed_jets(std::span<const double> p, int order) {
    const int m = static_cast<int>(p.size());
    std::vector<Jet> seeds;
    seeds.reserve(p.size());
    for (int i = 0; i < m; ++i) seeds.push_back(Jet::variable(p[i], i, m, order));
    return seeds;
}

Jet compose(const Jet& f, std::span<const Jet> g) {
    if (static_cast<int>(g.size()) != f.dim()) throw DomainError("compose: arity mismatch");
    const int dim = g.empty() ? 1 : g[0].dim();
    int order = f.order();
    for (const Jet& gi : g) order = std::min(order, gi.order());

    // Powers of the nilpotent parts w_i = g_i - g_i(0).
    std::vector<std::vector<Jet>> pw(g.size());
    for (std::size_t i = 0; i < g.size(); ++i) {
        Jet w = g[i].truncated(order);
        w -= w.value();
        pw[i].push_back(Jet::constant(1.0, dim, order));
        for (int e = 1; e <= order; ++e) pw[i].push_back(pw[i][e - 1] * w);
    }

    Jet acc = Jet::constant(0.0, dim, order);
    for (int k = 0; k < f.size(); ++k) {
        const double fk = f.coeff(k);
        if (fk == 0.0) continue;
        auto alpha = f.layout().exponents(k);
        Jet term = Jet::constant(fk, dim, order);
        for (int v = 0; v < f.dim(); ++v) {
            if (alpha[v] > 0) term = term * pw[v][alpha[v]];
        }
        acc += term;
    }
    return acc;
}

std::vector<Jet> solve_linear(std::vector<Jet> a, std::vector<Jet> b, int n, int nrhs) {
    auto A = [&](int i, int j) -> Jet& { return a[static_cast<std::size_t>(i) * n + j]; };
    auto B = [&](int i, int j) -> Jet& { return b[static_cast<std::size_t>(i) * nrhs + j]; };
    for (int col = 0; col < n; ++col) {
        int piv = col;
        for (int r = col + 1; r < n; ++r) {
            if (std::abs(A(r, col).value()) > std::abs(A(piv, col).value())) piv = r;
        }
        if (std::abs(A(piv, col).value()) < 1e-13) throw DomainError("singular linear system");
        if (piv != col) {
            for (int j = col; j < n; ++j) std::swap(A(col, j), A(piv, j));
            for (int j = 0; j < nrhs; ++j) std::swap(B(col, j), B(piv, j));
        }
        for (int r = col + 1; r < n; ++r) {
            if (A(r, col).value() == 0.0) {
                bool zero = true;
                for (int k = 0; k < A(r, col).size(); ++k) {
                    if (A(r, col).coeff(k) != 0.0) { zero = false; break; }
                }
                if (zero) continue;
            }
            Jet factor = A(r, col) / A(col, col);
            for (int j = col + 1; j < n; ++j) A(r, j) -= factor * A(col, j);
            for (int j = 0; j < nrhs; ++j) B(r, j) -= factor * B(col, j);
        }
    }
    for (int col = n - 1; col >= 0; --col) {
        for (int j = 0; j < nrhs; ++j) {
            Jet sum = B(col, j);
            for (int k = col + 1; k < n; ++k) sum -= A(col, k) * B(k, j);
            B(col, j) = sum / A(col, col);
        }
    }
    return b;
}

} // namespace bilag
