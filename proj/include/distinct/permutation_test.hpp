#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "distinct/kernel.hpp"
#include "distinct/point_set.hpp"

namespace distinct {

enum class GramMode { automatic, precompute, on_the_fly };

std::string to_string(GramMode mode);

struct TestConfig {
    std::size_t permutations = 500;  // R
    double alpha = 0.05;
    std::uint64_t seed = 0;
    GramMode gram_mode = GramMode::automatic;
    std::size_t gram_budget_bytes = default_gram_budget_bytes();
    // Enumerate every permutation when (m+n)! <= 10000.
    bool exhaustive_small = true;
    // Upper bound on R * (m + n).
    double max_permutation_work = 1e12;
    // Execution only; never changes results.
    unsigned workers = 1;

    // Throws InvalidArgument for R == 0 or alpha outside (0, 1).
    void validate() const;
    // Non-fatal issues, e.g. 1/(R+1) > alpha so the test can never reject.
    [[nodiscard]] std::vector<std::string> warnings() const;
};

struct TestResult {
    double observed = 0.0;        // MMD^2_u on the original split
    double p_value = 1.0;         // (1 + #{stat >= observed}) / (R + 1)
    double critical_value = 0.0;  // (1 - alpha)-quantile of permutation_stats
    bool reject = false;          // p_value < alpha
    std::vector<double> permutation_stats;
    std::size_t exceed_count = 0;
    TestConfig config;
    std::optional<double> sigma_used;
    std::size_t m = 0;
    std::size_t n = 0;
    bool exhaustive = false;
    bool gram_precomputed = false;
    // Set when observed > critical_value disagrees with the p-value decision
    // (only possible through ties at the quantile).
    bool quantile_disagrees = false;

    [[nodiscard]] std::size_t permutations_used() const noexcept { return permutation_stats.size(); }
};

// Empirical quantile with linear interpolation between order statistics:
// position h = (N - 1) * level, value = v[floor h] + (h - floor h)(v[floor h + 1] - v[floor h]).
double quantile(std::span<const double> values, double level);

// Right-tailed permutation test of H0: P = Q using MMD^2_u. Data-dependent
// bandwidths are resolved once on the pooled sample X u Y.
TestResult permutation_test(const PointSet& x, const PointSet& y, const KernelSpec& spec, const TestConfig& cfg);

// Same test on an existing Gram matrix; the first m rows are X.
TestResult permutation_test(const KernelMatrix& gram, const TestConfig& cfg);

}  // namespace distinct
