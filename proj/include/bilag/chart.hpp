#pragma once

#include <array>
#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace bilag {

// A named coordinate patch. The box bounds the region where structures are
// sampled and verified; nothing is claimed outside it.
struct Chart {
    std::string name;
    std::vector<std::string> coords;
    std::vector<std::array<double, 2>> box; // one [lo, hi] per coordinate

    int dim() const { return static_cast<int>(coords.size()); }
    int coord_index(std::string_view c) const;
};

using ChartPtr = std::shared_ptr<const Chart>;

// Validates names/box and defaults the box to [-1,1]^m when omitted.
ChartPtr make_chart(std::string name, std::vector<std::string> coords,
                    std::vector<std::array<double, 2>> box = {});

bool same_chart(const Chart& a, const Chart& b);
// Throws DomainError naming both charts on mismatch.
void require_same_chart(const Chart& a, const Chart& b);

// Deterministic low-discrepancy point set in the chart box: a Kronecker
// sequence (irrational rotations by sqrt-prime fractions) with a seeded
// offset, so reports are reproducible from the seed alone.
std::vector<std::vector<double>> sample_box(const Chart& c, int count, std::uint64_t seed);

std::string format_point(std::span<const double> p);

} // namespace bilag
