#pragma once

#include <algorithm>
#include <cstddef>
#include <span>

#include "distinct/kernel.hpp"
#include "distinct/point_set.hpp"

namespace distinct {

// Unbiased squared MMD. `value` may be negative in finite samples and is
// returned unclamped; clamping is a presentation concern.
struct MmdEstimate {
    double value = 0.0;
    std::size_t m = 0;
    std::size_t n = 0;
    KernelSpec spec;  // resolved (sigma filled in for rbf)
};

namespace detail {

// U-statistic over index lists into a pooled sample; kernel_at(i, j) returns
// k(z_i, z_j). Within-group sums skip the diagonal (by position), the cross
// term covers all pairs. Summation order is fixed: row-major over the lists.
template <typename KernelAt>
double unbiased_mmd(KernelAt&& kernel_at, std::span<const std::size_t> ix, std::span<const std::size_t> iy) {
    const std::size_t m = ix.size();
    const std::size_t n = iy.size();
    double sxx = 0.0;
    for (std::size_t a = 0; a < m; ++a)
        for (std::size_t b = a + 1; b < m; ++b) sxx += kernel_at(ix[a], ix[b]);
    double syy = 0.0;
    for (std::size_t a = 0; a < n; ++a)
        for (std::size_t b = a + 1; b < n; ++b) syy += kernel_at(iy[a], iy[b]);
    double sxy = 0.0;
    for (std::size_t a = 0; a < m; ++a)
        for (std::size_t b = 0; b < n; ++b) sxy += kernel_at(ix[a], iy[b]);
    const double md = static_cast<double>(m);
    const double nd = static_cast<double>(n);
    return 2.0 * sxx / (md * (md - 1.0)) + 2.0 * syy / (nd * (nd - 1.0)) - 2.0 * sxy / (md * nd);
}

// Orders the two lists canonically so that swapping the arguments yields a
// bit-identical result.
inline bool canonical_swap(std::span<const std::size_t> ix, std::span<const std::size_t> iy) {
    return std::lexicographical_compare(iy.begin(), iy.end(), ix.begin(), ix.end());
}

}  // namespace detail

// Eq.-style three-term estimator on raw vectors. Bandwidth rules that depend on
// data are resolved on the pooled sample X u Y.
MmdEstimate mmd_squared_unbiased(const PointSet& x, const PointSet& y, const KernelSpec& spec);

// Same estimator indexing into a precomputed Gram matrix. idx_x and idx_y must
// be disjoint, each of size >= 2. Repeated indices inside one list are
// treated positionally (bootstrap replicates rely on this).
MmdEstimate mmd_from_gram(const KernelMatrix& gram, std::span<const std::size_t> idx_x,
                          std::span<const std::size_t> idx_y);

// Estimator over index lists into `pooled`, evaluating kernels on demand.
double mmd_on_the_fly(const KernelSpec& resolved, const PointSet& pooled, std::span<const std::size_t> idx_x,
                      std::span<const std::size_t> idx_y);

// Clamp used when rendering estimates for display.
inline double clamp_for_display(double v) { return v < 0.0 ? 0.0 : v; }

}  // namespace distinct
