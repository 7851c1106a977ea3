#pragma once

#include <string>
#include <vector>

namespace bsdekit {

namespace acceptance {

// One verification criterion: a measured quantity, its contractual bound,
// and the wall-clock time the check took.
struct CriterionResult {
    int id = 0;
    std::string label;
    bool pass = false;
    double value = 0.0;   // measured quantity (worst case over the check)
    double bound = 0.0;   // bound it must satisfy
    double runtime_s = 0.0;
    std::string detail;   // human-readable summary of what was measured
};

// Runs the full verification suite in order, printing one PASS/FAIL line per
// criterion as it completes.  When out_dir is non-empty, a machine-readable
// acceptance.json is written there.  A criterion that throws is reported as
// a failure with the exception text; the suite always runs to the end.
std::vector<CriterionResult> run_all(const std::string& out_dir);

bool all_pass(const std::vector<CriterionResult>& results);

} // namespace acceptance

} // namespace bsdekit
