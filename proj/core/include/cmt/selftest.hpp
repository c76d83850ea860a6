#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "cmt/numkit.hpp"

namespace cmt {

struct SuiteResult {
    std::string name;
    int checks = 0;
    int failures = 0;
    std::vector<std::string> messages;
};

struct SelftestOptions {
    std::string suite;  // empty: run everything
    std::uint64_t seed = 20250807;
    Tolerances tols;
};

/// Runs the invariant suites (numkit, detline, bicomplex, torsion, models,
/// deform).  Messages carry a reproduction line for the first failing seed.
std::vector<SuiteResult> run_selftest(const SelftestOptions& opts);

}  // namespace cmt
