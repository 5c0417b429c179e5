#pragma once

#include <string>
#include <vector>

namespace qbme {

struct CriterionResult {
    int id = 0;
    std::string name;
    bool pass = false;
    std::string detail;
    double seconds = 0;
};

/// Run the acceptance criteria (all of them when `only` is empty, otherwise
/// the listed ids).  Deterministic under `seed`.
std::vector<CriterionResult> run_selftest(int threads, uint64_t seed = 1,
                                          const std::vector<int>& only = {});

bool all_passed(const std::vector<CriterionResult>& results);

}  // namespace qbme
