#include "bilag/chart.hpp"

#include <cmath>
#include <random>
#include <sstream>
#include <unordered_set>

#include "bilag/errors.hpp"

namespace bilag {

int Chart::coord_index(std::string_view c) const {
    for (int i = 0; i < dim(); ++i)
        if (coords[i] == c) return i;
    return -1;
}

ChartPtr make_chart(std::string name, std::vector<std::string> coords,
                    std::vector<std::array<double, 2>> box) {
    if (coords.empty()) throw DomainError("chart '" + name + "' has no coordinates");
    std::unordered_set<std::string> seen;
    for (const auto& c : coords) {
        if (c.empty()) throw DomainError("chart '" + name + "' has an empty coordinate name");
        if (!seen.insert(c).second)
            throw DomainError("chart '" + name + "' repeats coordinate '" + c + "'");
    }
    if (box.empty()) box.assign(coords.size(), {-1.0, 1.0});
    if (box.size() != coords.size())
        throw DomainError("chart '" + name + "' box entries do not match its coordinates");
    for (std::size_t i = 0; i < box.size(); ++i)
        if (!(box[i][0] < box[i][1]))
            throw DomainError("chart '" + name + "' box for '" + coords[i] + "' is empty");
    auto c = std::make_shared<Chart>();
    c->name = std::move(name);
    c->coords = std::move(coords);
    c->box = std::move(box);
    return c;
}

bool same_chart(const Chart& a, const Chart& b) {
    return a.name == b.name && a.coords == b.coords;
}

void require_same_chart(const Chart& a, const Chart& b) {
    if (!same_chart(a, b))
        throw DomainError("chart mismatch: '" + a.name + "' vs '" + b.name + "'");
}

std::vector<std::vector<double>> sample_box(const Chart& c, int count, std::uint64_t seed) {
    if (count < 1) throw DomainError("sample count must be positive");
    const int m = c.dim();
    static const int primes[] = {2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53};
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> U(0.0, 1.0);
    std::vector<double> offset(m), alpha(m);
    for (int i = 0; i < m; ++i) {
        offset[i] = U(rng);
        double s = std::sqrt(static_cast<double>(primes[i % 16]));
        alpha[i] = s - std::floor(s);
    }
    std::vector<std::vector<double>> pts(count, std::vector<double>(m));
    for (int n = 0; n < count; ++n)
        for (int i = 0; i < m; ++i) {
            double u = offset[i] + (n + 1) * alpha[i];
            u -= std::floor(u);
            pts[n][i] = c.box[i][0] + u * (c.box[i][1] - c.box[i][0]);
        }
    return pts;
}

std::string format_point(std::span<const double> p) {
    std::ostringstream os;
    os << "(";
    for (std::size_t i = 0; i < p.size(); ++i) {
        if (i) os << ", ";
        os << p[i];
    }
    os << ")";
    return os.str();
}

} // namespace bilag
