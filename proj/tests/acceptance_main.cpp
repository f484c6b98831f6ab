// Acceptance gate: runs every criterion of the library in order and prints
// one pass/fail line each; the exit code is the overall verdict.

#include <iostream>

#include "dhelm/validate.hpp"

int main() {
    const std::vector<dhelm::CriterionResult> results = dhelm::run_acceptance(std::cout);
    const bool ok = dhelm::all_passed(results);
    std::cout << (ok ? "all criteria passed" : "ACCEPTANCE FAILED") << std::endl;
    return ok ? 0 : 1;
}
