#pragma once

// Binds the three engines: every check becomes a report entry, failures included.

#include <json.hpp>

#include <cstdint>
#include <string>
#include <vector>

namespace qdeloc::harness {

struct CrosscheckParams {
    int d = 2;
    int N = 8;
    int q = 2;
    int depth = 5;
    std::uint64_t realizations = 20000;
    std::uint64_t seed = 7;
    double eps = 1e-15;
    /// Feed the walk oracle d/(d^2+2) instead of K_d (negative control).
    bool corrupt_k = false;
    /// Include the deep q = 1 exact-vs-oracle comparison (t = 5N).
    bool include_q1 = true;
    int threads = 0;
};

struct CheckEntry {
    std::string name;
    bool pass = false;
    /// Worst observed discrepancy, in the units of the tolerance.
    double value = 0.0;
    double tolerance = 0.0;
    std::string detail;
};

struct CrosscheckReport {
    CrosscheckParams params;
    std::vector<CheckEntry> entries;
    bool all_pass() const;
    const CheckEntry *find(const std::string &name) const;
    nlohmann::json to_json() const;
};

CrosscheckReport crosscheck(const CrosscheckParams &params);

} // namespace qdeloc::harness
