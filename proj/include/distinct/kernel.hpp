#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "distinct/point_set.hpp"

namespace distinct {

enum class KernelFamily { rbf, linear };
enum class BandwidthRule { median_heuristic, fixed, scaled_median };

// Kernel family plus how its bandwidth is chosen. `sigma` is only meaningful
// for rbf; it is filled in by resolve_bandwidth() for the median-based rules.
struct KernelSpec {
    KernelFamily family = KernelFamily::rbf;
    BandwidthRule rule = BandwidthRule::median_heuristic;
    double sigma = 0.0;
    double multiplier = 1.0;  // scaled_median only

    static KernelSpec rbf_median() { return {}; }
    static KernelSpec rbf_fixed(double s) { return {KernelFamily::rbf, BandwidthRule::fixed, s, 1.0}; }
    static KernelSpec rbf_scaled(double m) { return {KernelFamily::rbf, BandwidthRule::scaled_median, 0.0, m}; }
    static KernelSpec linear() { return {KernelFamily::linear, BandwidthRule::fixed, 0.0, 1.0}; }

    // True when kernel_value can be evaluated without looking at data.
    [[nodiscard]] bool resolved() const noexcept { return family == KernelFamily::linear || sigma > 0.0; }

    // Throws InvalidArgument on a bad combination.
    void validate() const;

    // e.g. "rbf(median)", "rbf(fixed:0.5)", "rbf(scaled:2)", "linear"
    [[nodiscard]] std::string describe() const;

    friend bool operator==(const KernelSpec&, const KernelSpec&) = default;
};

std::string to_string(KernelFamily f);
std::string to_string(BandwidthRule r);

// What to do when every pairwise distance is zero.
enum class DegenerateSigma { error, smallest_positive };

double squared_distance(std::span<const double> a, std::span<const double> b);

// Median over all unordered pairwise Euclidean distances (even count: mean of
// the two middle values). Throws DegenerateBandwidth when the median is zero
// unless `fallback` allows substituting the smallest positive distance.
double median_heuristic_sigma(const PointSet& pooled, DegenerateSigma fallback = DegenerateSigma::error);

// Returns a copy of `spec` with sigma set for rbf median-based rules, using
// `pooled` as the bandwidth sample. Fixed rules pass through after validation.
KernelSpec resolve_bandwidth(const KernelSpec& spec, const PointSet& pooled,
                             DegenerateSigma fallback = DegenerateSigma::error);

// rbf: exp(-|x-y|^2 / (2 sigma^2)); linear: <x, y>. Spec must be resolved.
double kernel_value(const KernelSpec& spec, std::span<const double> x, std::span<const double> y);

// Precomputed symmetric Gram matrix over a pooled sample whose first m rows
// are one group and last n rows the other.
class KernelMatrix {
public:
    KernelMatrix() = default;
    KernelMatrix(std::vector<double> values, std::size_t m, std::size_t n, KernelSpec spec);

    [[nodiscard]] std::size_t size() const noexcept { return m_ + n_; }
    [[nodiscard]] std::size_t m() const noexcept { return m_; }
    [[nodiscard]] std::size_t n() const noexcept { return n_; }
    [[nodiscard]] const KernelSpec& spec() const noexcept { return spec_; }
    [[nodiscard]] double operator()(std::size_t i, std::size_t j) const noexcept { return values_[i * size() + j]; }
    [[nodiscard]] const std::vector<double>& values() const noexcept { return values_; }

private:
    std::vector<double> values_;
    std::size_t m_ = 0;
    std::size_t n_ = 0;
    KernelSpec spec_;
};

// Bytes needed to hold a Gram matrix over `points` items.
std::size_t gram_bytes(std::size_t points);

// Memory cap for Gram precompute: DISTINCT_GRAM_BUDGET_MB, default 1024 MB.
std::size_t default_gram_budget_bytes();

// Full Gram matrix, or nullopt when it would exceed `budget_bytes`; the caller
// then evaluates kernels on the fly. Spec must be resolved. Rows are computed
// independently, so the result is the same for any worker count.
std::optional<KernelMatrix> precompute_gram(const KernelSpec& spec, const PointSet& pooled, std::size_t m,
                                            std::size_t n, std::size_t budget_bytes = default_gram_budget_bytes(),
                                            unsigned workers = 1);

}  // namespace distinct
