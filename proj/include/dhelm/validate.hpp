#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace dhelm {

/// Outcome of one acceptance criterion of the library: a hard pass/fail
/// verdict plus the measured quantities that justify it.
struct CriterionResult {
    int index = 0;
    std::string title;
    bool passed = false;
    std::string detail; ///< measured numbers, tolerances, configurations
    double seconds = 0.0;
};

/// Runs the full acceptance suite in order, streaming one line per criterion
/// ("PASS"/"FAIL", title, timing, measurements) to `progress` as each
/// finishes. Deterministic; total runtime a few minutes.
std::vector<CriterionResult> run_acceptance(std::ostream& progress);

bool all_passed(const std::vector<CriterionResult>& results);

} // namespace dhelm
