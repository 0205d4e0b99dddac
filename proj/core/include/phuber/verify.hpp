#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace phuber {

struct SuiteReport {
    std::string suite;
    bool passed = true;
    std::vector<std::string> details;
};

/// Runs the runtime-checkable invariant suites (quadrature consistency,
/// distribution constraints, basis-change bounds, convexity of the NLL in
/// position, solver optimality probes) and reports one entry per suite.
std::vector<SuiteReport> run_verify_suites(std::uint64_t seed = 0);

}  // namespace phuber
