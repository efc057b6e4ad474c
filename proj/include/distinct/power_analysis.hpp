#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "distinct/embedding_store.hpp"
#include "distinct/kernel.hpp"
#include "distinct/permutation_test.hpp"

namespace distinct {

// Empirical power: fraction of Monte-Carlo experiments rejecting H0 at each
// sample size n (n draws per group).
struct PowerCurve {
    std::string group_a;
    std::string group_b;
    std::vector<std::size_t> sample_sizes;
    std::vector<double> rates;
    std::vector<std::size_t> rejections;
    std::size_t trials = 0;
    double alpha = 0.0;
    std::uint64_t seed = 0;
    std::string setting;  // ablation setting name; empty for a plain curve
};

struct TrialSample {
    PointSet x;
    PointSet y;
};

// Seed for trial `trial` at sample size n of pair (a, b). Shared by every
// consumer that wants paired trials (ablations reuse it per setting).
std::uint64_t trial_seed(std::uint64_t base, const std::string& a, const std::string& b, std::size_t n,
                         std::size_t trial);

// n points from each group; for a == b, 2n distinct points split into two
// disjoint halves (negative control).
TrialSample draw_trial_sample(const GroupedDataset& ds, const std::string& a, const std::string& b,
                              std::size_t n, std::uint64_t seed);

// Test applied to one trial's samples; cfg.seed is already trial-specific.
using TrialTest = std::function<TestResult(const PointSet& x, const PointSet& y, const TestConfig& cfg)>;

// For every n: `trials` independent fresh-subsample permutation tests. The
// bandwidth is re-derived from each trial's own pooled sample.
PowerCurve rejection_rate_curve(const GroupedDataset& ds, const std::string& a, const std::string& b,
                                const std::vector<std::size_t>& sizes, std::size_t trials, const KernelSpec& spec,
                                const TestConfig& cfg);

// Same loop with a caller-supplied test (used by ablations).
PowerCurve rejection_rate_curve_with(const GroupedDataset& ds, const std::string& a, const std::string& b,
                                     const std::vector<std::size_t>& sizes, std::size_t trials,
                                     const TestConfig& cfg, const TrialTest& test);

// Smallest n whose rate reaches `target`, if any.
std::optional<std::size_t> threshold_sample_size(const PowerCurve& curve, double target);

struct MmdMatrix {
    std::vector<std::string> labels;
    std::vector<std::vector<double>> values;
    std::vector<std::vector<double>> p_values;
    std::vector<std::vector<bool>> significant;
    std::vector<std::vector<std::size_t>> sample_sizes;  // per-group n used in each cell
    double alpha = 0.0;
    std::size_t cap = 0;
    std::string diagonal_mode = "split_half";
};

// Pairwise MMD^2_u with permutation p-values over all groups. Off-diagonal
// cells use up to `cap` items per group; diagonal cells test disjoint
// split-halves of one group (each half capped at `cap`).
MmdMatrix mmd_matrix(const GroupedDataset& ds, std::size_t cap, const KernelSpec& spec, const TestConfig& cfg);

struct BootstrapCi {
    double point = 0.0;
    double lower = 0.0;
    double upper = 0.0;
    double level = 0.95;
    std::size_t iterations = 0;
    double replicate_median = 0.0;
    std::string method = "percentile (independent per-group resampling)";
};

// MMD^2_u recomputed on `iterations` resamples with replacement, X and Y
// resampled independently at their own sizes. Bandwidth is fixed from the
// original pooled sample.
std::vector<double> bootstrap_replicates(const PointSet& x, const PointSet& y, const KernelSpec& spec,
                                         std::size_t iterations, std::uint64_t seed, unsigned workers = 1);

// Percentile interval [q((1-level)/2), q(1-(1-level)/2)] of `replicates`.
BootstrapCi percentile_interval(double point, const std::vector<double>& replicates, double level);

BootstrapCi bootstrap_ci(const PointSet& x, const PointSet& y, const KernelSpec& spec, std::size_t iterations,
                         double level, std::uint64_t seed, unsigned workers = 1);

}  // namespace distinct
