#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace bilag {

// One verified property: a worst residual against a tolerance. `lower_bound`
// flips the sense for quantities that must stay large (determinants,
// singular values).
struct CheckResult {
    std::string name;
    double residual = 0.0;
    double tolerance = 0.0;
    bool lower_bound = false;
    bool pass = false;
    int samples = 0;
    std::string worst_point;
    std::string note;

    static CheckResult upper(std::string name, double residual, double tol, int samples,
                             std::string worst_point = "", std::string note = "");
    static CheckResult lower(std::string name, double residual, double tol, int samples,
                             std::string worst_point = "", std::string note = "");
};

struct VerificationReport {
    std::string title;
    std::uint64_t seed = 0;
    std::vector<CheckResult> checks;

    bool pass() const;
    void add(CheckResult r) { checks.push_back(std::move(r)); }
    void merge(const VerificationReport& other, const std::string& prefix = "");
    const CheckResult* find(const std::string& name) const;
    std::string summary() const; // one line per check, for logs and tests
};

} // namespace bilag
