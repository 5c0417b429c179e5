// Acceptance gate: one pass/fail line per criterion.
#include <cstdio>
#include <cstdlib>
#include <string>
#include <thread>
#include <vector>

#include "qbme/selftest.hpp"

int main(int argc, char** argv) {
    unsigned hw = std::thread::hardware_concurrency();
    int threads = hw ? int(hw) : 1;
    uint64_t seed = 1;
    std::vector<int> only;
    for (int i = 1; i < argc; ++i) {
        std::string a = argv[i];
        if (a == "--threads" && i + 1 < argc) threads = std::atoi(argv[++i]);
        else if (a == "--seed" && i + 1 < argc) seed = std::strtoull(argv[++i], nullptr, 10);
        else if (a == "--only" && i + 1 < argc) only.push_back(std::atoi(argv[++i]));
    }

    auto results = qbme::run_selftest(threads, seed, only);
    for (const auto& r : results) {
        std::printf("[%s] criterion %2d %-30s (%6.1fs)  %s\n", r.pass ? "PASS" : "FAIL",
                    r.id, r.name.c_str(), r.seconds, r.detail.c_str());
        std::fflush(stdout);
    }
    return qbme::all_passed(results) ? 0 : 4;
}
