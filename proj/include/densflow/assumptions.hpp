#pragma once

#include <string>
#include <utility>
#include <vector>

namespace densflow {

/// One audited structural condition: the empirical constant observed on a
/// sample grid, the cap it is compared with, and the sampled range.
struct AssumptionCheck {
    std::string name;
    double constant = 0.0;
    double cap = 0.0;
    bool pass = false;
    double range_lo = 0.0;
    double range_hi = 0.0;
    std::string note;
};

/// A check that has not been evaluated yet.
inline AssumptionCheck open_check(std::string name, double constant, double cap) {
    AssumptionCheck c;
    c.name = std::move(name);
    c.constant = constant;
    c.cap = cap;
    return c;
}

struct AssumptionReport {
    std::vector<AssumptionCheck> checks;

    bool all_pass() const {
        for (const auto& c : checks) {
            if (!c.pass) {
                return false;
            }
        }
        return true;
    }

    /// Throws std::out_of_range when no check carries that name.
    const AssumptionCheck& at(const std::string& name) const;
};

} // namespace densflow
