#include "distinct/mmd.hpp"

#include <numeric>
#include <vector>

#include "distinct/error.hpp"

namespace distinct {

namespace {

void check_sizes(std::size_t m, std::size_t n) {
    if (m < 2 || n < 2) throw InvalidArgument("unbiased MMD needs at least 2 samples per group");
}

void check_disjoint(std::span<const std::size_t> ix, std::span<const std::size_t> iy, std::size_t limit) {
    std::vector<char> in_x(limit, 0);
    for (std::size_t i : ix) {
        if (i >= limit) throw InvalidArgument("index out of range for kernel matrix");
        in_x[i] = 1;
    }
    for (std::size_t j : iy) {
        if (j >= limit) throw InvalidArgument("index out of range for kernel matrix");
        if (in_x[j]) throw InvalidArgument("index lists overlap");
    }
}

// True when `a` sorts after `b` in the canonical pooled order.
bool points_after(const PointSet& a, const PointSet& b) {
    if (a.size() != b.size()) return a.size() > b.size();
    return std::lexicographical_compare(b.data().begin(), b.data().end(), a.data().begin(), a.data().end());
}

}  // namespace

double mmd_on_the_fly(const KernelSpec& resolved, const PointSet& pooled, std::span<const std::size_t> ix,
                      std::span<const std::size_t> iy) {
    check_sizes(ix.size(), iy.size());
    if (!resolved.resolved()) throw InvalidArgument("kernel bandwidth must be resolved");
    if (detail::canonical_swap(ix, iy)) std::swap(ix, iy);
    return detail::unbiased_mmd(
        [&](std::size_t i, std::size_t j) { return kernel_value(resolved, pooled[i], pooled[j]); }, ix, iy);
}

MmdEstimate mmd_squared_unbiased(const PointSet& x, const PointSet& y, const KernelSpec& spec) {
    check_sizes(x.size(), y.size());
    if (x.dim() != y.dim()) throw InvalidArgument("dimension mismatch between samples");
    const bool swap = points_after(x, y);
    const PointSet& first = swap ? y : x;
    const PointSet& second = swap ? x : y;
    const PointSet pooled = PointSet::concat(first, second);
    const KernelSpec resolved = resolve_bandwidth(spec, pooled);

    std::vector<std::size_t> ia(first.size());
    std::vector<std::size_t> ib(second.size());
    std::iota(ia.begin(), ia.end(), std::size_t{0});
    std::iota(ib.begin(), ib.end(), first.size());
    const double value = detail::unbiased_mmd(
        [&](std::size_t i, std::size_t j) { return kernel_value(resolved, pooled[i], pooled[j]); },
        std::span<const std::size_t>(ia), std::span<const std::size_t>(ib));
    return {value, x.size(), y.size(), resolved};
}

MmdEstimate mmd_from_gram(const KernelMatrix& gram, std::span<const std::size_t> idx_x,
                          std::span<const std::size_t> idx_y) {
    check_sizes(idx_x.size(), idx_y.size());
    check_disjoint(idx_x, idx_y, gram.size());
    const std::size_t m = idx_x.size();
    const std::size_t n = idx_y.size();
    if (detail::canonical_swap(idx_x, idx_y)) std::swap(idx_x, idx_y);
    const double value =
        detail::unbiased_mmd([&](std::size_t i, std::size_t j) { return gram(i, j); }, idx_x, idx_y);
    return {value, m, n, gram.spec()};
}

}  // namespace distinct
