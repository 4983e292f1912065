#include "bilag/report.hpp"

#include <sstream>

namespace bilag {

CheckResult CheckResult::upper(std::string name, double residual, double tol, int samples,
                               std::string worst_point, std::string note) {
    CheckResult r;
    r.name = std::move(name);
    r.residual = residual;
    r.tolerance = tol;
    r.lower_bound = false;
    r.pass = residual <= tol;
    r.samples = samples;
    r.worst_point = std::move(worst_point);
    r.note = std::move(note);
    return r;
}

CheckResult CheckResult::lower(std::string name, double residual, double tol, int samples,
                               std::string worst_point, std::string note) {
    CheckResult r;
    r.name = std::move(name);
    r.residual = residual;
    r.tolerance = tol;
    r.lower_bound = true;
    r.pass = residual >= tol;
    r.samples = samples;
    r.worst_point = std::move(worst_point);
    r.note = std::move(note);
    return r;
}

bool VerificationReport::pass() const {
    for (const auto& c : checks)
        if (!c.pass) return false;
    return true;
}

void VerificationReport::merge(const VerificationReport& other, const std::string& prefix) {
    for (auto c : other.checks) {
        if (!prefix.empty()) c.name = prefix + c.name;
        checks.push_back(std::move(c));
    }
}

const CheckResult* VerificationReport::find(const std::string& name) const {
    for (const auto& c : checks)
        if (c.name == name) return &c;
    return nullptr;
}

std::string VerificationReport::summary() const {
    std::ostringstream os;
    for (const auto& c : checks) {
        os << (c.pass ? "pass" : "FAIL") << "  " << c.name << "  residual=" << c.residual
           << (c.lower_bound ? " >= " : " <= ") << c.tolerance;
        if (!c.worst_point.empty()) os << "  at " << c.worst_point;
        if (!c.note.empty()) os << "  (" << c.note << ")";
        os << "\n";
    }
    return os.str();
}

} // namespace bilag
