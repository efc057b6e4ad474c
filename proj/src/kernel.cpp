#include "distinct/kernel.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <limits>
#include <sstream>

#include "distinct/error.hpp"
#include "distinct/rng.hpp"

namespace distinct {

std::string to_string(KernelFamily f) { return f == KernelFamily::rbf ? "rbf" : "linear"; }

std::string to_string(BandwidthRule r) {
    switch (r) {
        case BandwidthRule::median_heuristic: return "median";
        case BandwidthRule::fixed: return "fixed";
        case BandwidthRule::scaled_median: return "scaled";
    }
    return "unknown";
}

void KernelSpec::validate() const {
    if (family == KernelFamily::linear) return;
    if (rule == BandwidthRule::fixed && !(sigma > 0.0 && std::isfinite(sigma)))
        throw InvalidArgument("rbf kernel with a fixed bandwidth needs sigma > 0");
    if (rule == BandwidthRule::scaled_median && !(multiplier > 0.0 && std::isfinite(multiplier)))
        throw InvalidArgument("scaled median multiplier must be a finite positive number");
}

std::string KernelSpec::describe() const {
    if (family == KernelFamily::linear) return "linear";
    std::ostringstream ss;
    ss.precision(17);
    switch (rule) {
        case BandwidthRule::median_heuristic: ss << "rbf(median)"; break;
        case BandwidthRule::fixed: ss << "rbf(fixed:" << sigma << ")"; break;
        case BandwidthRule::scaled_median: ss << "rbf(scaled:" << multiplier << ")"; break;
    }
    return ss.str();
}

double squared_distance(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size()) throw InvalidArgument("dimension mismatch");
    double s = 0.0;
    for (std::size_t k = 0; k < a.size(); ++k) {
        const double d = a[k] - b[k];
        s += d * d;
    }
    return s;
}

double median_heuristic_sigma(const PointSet& pooled, DegenerateSigma fallback) {
    const std::size_t n = pooled.size();
    if (n < 2) throw InvalidArgument("median heuristic needs at least 2 points");
    std::vector<double> dist;
    dist.reserve(n * (n - 1) / 2);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j) dist.push_back(std::sqrt(squared_distance(pooled[i], pooled[j])));

    const std::size_t count = dist.size();
    const std::size_t hi = count / 2;
    std::nth_element(dist.begin(), dist.begin() + static_cast<std::ptrdiff_t>(hi), dist.end());
    double median = dist[hi];
    if (count % 2 == 0) {
        const double lo = *std::max_element(dist.begin(), dist.begin() + static_cast<std::ptrdiff_t>(hi));
        median = 0.5 * (lo + median);
    }
    if (median > 0.0) return median;

    if (fallback == DegenerateSigma::smallest_positive) {
        double smallest = std::numeric_limits<double>::infinity();
        for (double d : dist)
            if (d > 0.0) smallest = std::min(smallest, d);
        if (std::isfinite(smallest)) return smallest;
    }
    throw DegenerateBandwidth("median pairwise distance is zero; cannot derive an rbf bandwidth");
}

KernelSpec resolve_bandwidth(const KernelSpec& spec, const PointSet& pooled, DegenerateSigma fallback) {
    spec.validate();
    KernelSpec out = spec;
    if (spec.family == KernelFamily::rbf) {
        if (spec.rule == BandwidthRule::median_heuristic)
            out.sigma = median_heuristic_sigma(pooled, fallback);
        else if (spec.rule == BandwidthRule::scaled_median)
            out.sigma = spec.multiplier * median_heuristic_sigma(pooled, fallback);
    }
    return out;
}

double kernel_value(const KernelSpec& spec, std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size()) throw InvalidArgument("dimension mismatch");
    if (spec.family == KernelFamily::linear) {
        double s = 0.0;
        for (std::size_t k = 0; k < x.size(); ++k) s += x[k] * y[k];
        return s;
    }
    if (!(spec.sigma > 0.0)) throw InvalidArgument("rbf kernel evaluated without a positive bandwidth");
    return std::exp(-squared_distance(x, y) / (2.0 * spec.sigma * spec.sigma));
}

KernelMatrix::KernelMatrix(std::vector<double> values, std::size_t m, std::size_t n, KernelSpec spec)
    : values_(std::move(values)), m_(m), n_(n), spec_(spec) {
    if (values_.size() != (m + n) * (m + n)) throw InvalidArgument("kernel matrix shape mismatch");
}

std::size_t gram_bytes(std::size_t points) { return points * points * sizeof(double); }

std::size_t default_gram_budget_bytes() {
    constexpr std::size_t kDefaultMb = 1024;
    std::size_t mb = kDefaultMb;
    if (const char* env = std::getenv("DISTINCT_GRAM_BUDGET_MB")) {
        char* end = nullptr;
        const unsigned long long v = std::strtoull(env, &end, 10);
        if (end != env && *end == '\0') mb = static_cast<std::size_t>(v);
    }
    return mb * 1024 * 1024;
}

std::optional<KernelMatrix> precompute_gram(const KernelSpec& spec, const PointSet& pooled, std::size_t m,
                                            std::size_t n, std::size_t budget_bytes, unsigned workers) {
    const std::size_t total = m + n;
    if (pooled.size() != total) throw InvalidArgument("pooled sample size differs from m + n");
    if (!spec.resolved()) throw InvalidArgument("kernel bandwidth must be resolved before Gram precompute");
    if (gram_bytes(total) > budget_bytes) return std::nullopt;

    std::vector<double> values(total * total);
    // Each row writes its upper-triangle entries and their mirrors; no two rows
    // touch the same cell.
    parallel_for(total, workers, [&](std::size_t i) {
        for (std::size_t j = i; j < total; ++j) {
            const double v = kernel_value(spec, pooled[i], pooled[j]);
            values[i * total + j] = v;
            values[j * total + i] = v;
        }
    });
    return KernelMatrix(std::move(values), m, n, spec);
}

}  // namespace distinct
