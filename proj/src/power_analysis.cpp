#include "distinct/power_analysis.hpp"

#include <algorithm>

#include "distinct/error.hpp"
#include "distinct/mmd.hpp"
#include "distinct/rng.hpp"

namespace distinct {

std::uint64_t trial_seed(std::uint64_t base, const std::string& a, const std::string& b, std::size_t n,
                         std::size_t trial) {
    return derive_seed(base, "power-trial", {hash_label(a), hash_label(b), n, trial});
}

TrialSample draw_trial_sample(const GroupedDataset& ds, const std::string& a, const std::string& b,
                              std::size_t n, std::uint64_t seed) {
    if (a == b) {
        const auto& members = ds.group(a);
        if (2 * n > members.size())
            throw InvalidArgument("group '" + a + "' exhausted: negative control needs 2n = " +
                                  std::to_string(2 * n) + " items, has " + std::to_string(members.size()));
        Rng rng(derive_seed(seed, "subsample", {}));
        auto drawn = sample_without_replacement(members, 2 * n, rng);
        std::vector<std::size_t> first(drawn.begin(), drawn.begin() + static_cast<std::ptrdiff_t>(n));
        std::vector<std::size_t> second(drawn.begin() + static_cast<std::ptrdiff_t>(n), drawn.end());
        return {ds.points(first), ds.points(second)};
    }
    auto ia = subsample(ds, a, n, derive_seed(seed, "subsample", {0}));
    auto ib = subsample(ds, b, n, derive_seed(seed, "subsample", {1}));
    return {ds.points(ia), ds.points(ib)};
}

PowerCurve rejection_rate_curve_with(const GroupedDataset& ds, const std::string& a, const std::string& b,
                                     const std::vector<std::size_t>& sizes, std::size_t trials,
                                     const TestConfig& cfg, const TrialTest& test) {
    cfg.validate();
    if (trials == 0) throw InvalidArgument("trial count must be positive");
    for (std::size_t n : sizes) {
        if (n < 2) throw InvalidArgument("every sample size must be at least 2");
        const std::size_t need = a == b ? 2 * n : n;
        if (need > ds.group(a).size() || n > ds.group(b).size())
            throw InvalidArgument("group exhausted at n = " + std::to_string(n));
    }

    PowerCurve curve;
    curve.group_a = a;
    curve.group_b = b;
    curve.sample_sizes = sizes;
    curve.trials = trials;
    curve.alpha = cfg.alpha;
    curve.seed = cfg.seed;

    std::vector<char> rejected(sizes.size() * trials, 0);
    parallel_for(rejected.size(), cfg.workers, [&](std::size_t item) {
        const std::size_t si = item / trials;
        const std::size_t t = item % trials;
        const std::uint64_t seed = trial_seed(cfg.seed, a, b, sizes[si], t);
        const TrialSample sample = draw_trial_sample(ds, a, b, sizes[si], seed);
        TestConfig inner = cfg;
        inner.seed = derive_seed(seed, "test", {});
        inner.workers = 1;
        rejected[item] = test(sample.x, sample.y, inner).reject ? 1 : 0;
    });

    for (std::size_t si = 0; si < sizes.size(); ++si) {
        const auto begin = rejected.begin() + static_cast<std::ptrdiff_t>(si * trials);
        const auto hits = static_cast<std::size_t>(std::count(begin, begin + static_cast<std::ptrdiff_t>(trials), 1));
        curve.rejections.push_back(hits);
        curve.rates.push_back(static_cast<double>(hits) / static_cast<double>(trials));
    }
    return curve;
}

PowerCurve rejection_rate_curve(const GroupedDataset& ds, const std::string& a, const std::string& b,
                                const std::vector<std::size_t>& sizes, std::size_t trials, const KernelSpec& spec,
                                const TestConfig& cfg) {
    spec.validate();
    return rejection_rate_curve_with(ds, a, b, sizes, trials, cfg,
                                     [&spec](const PointSet& x, const PointSet& y, const TestConfig& c) {
                                         return permutation_test(x, y, spec, c);
                                     });
}

std::optional<std::size_t> threshold_sample_size(const PowerCurve& curve, double target) {
    if (!(target > 0.0 && target < 1.0)) throw InvalidArgument("target power must lie in (0, 1)");
    std::optional<std::size_t> best;
    for (std::size_t i = 0; i < curve.sample_sizes.size() && i < curve.rates.size(); ++i)
        if (curve.rates[i] >= target && (!best || curve.sample_sizes[i] < *best)) best = curve.sample_sizes[i];
    return best;
}

MmdMatrix mmd_matrix(const GroupedDataset& ds, std::size_t cap, const KernelSpec& spec, const TestConfig& cfg) {
    if (cap < 2) throw InvalidArgument("matrix sample cap must be at least 2");
    cfg.validate();
    spec.validate();
    const auto labels = ds.labels();
    for (const auto& g : labels)
        if (ds.group(g).size() < 4)
            throw InvalidArgument("group '" + g + "' has fewer than 4 items; split-half control impossible");

    const std::size_t k = labels.size();
    MmdMatrix out;
    out.labels = labels;
    out.alpha = cfg.alpha;
    out.cap = cap;
    out.values.assign(k, std::vector<double>(k, 0.0));
    out.p_values.assign(k, std::vector<double>(k, 1.0));
    out.significant.assign(k, std::vector<bool>(k, false));
    out.sample_sizes.assign(k, std::vector<std::size_t>(k, 0));

    std::vector<std::pair<std::size_t, std::size_t>> cells;
    for (std::size_t i = 0; i < k; ++i)
        for (std::size_t j = i; j < k; ++j) cells.emplace_back(i, j);
    std::vector<TestResult> results(cells.size());

    parallel_for(cells.size(), cfg.workers, [&](std::size_t c) {
        const auto [i, j] = cells[c];
        const std::uint64_t cell_seed =
            derive_seed(cfg.seed, "matrix-cell", {hash_label(labels[i]), hash_label(labels[j])});
        std::vector<std::size_t> ix;
        std::vector<std::size_t> iy;
        if (i == j) {
            auto halves = split_half(ds, labels[i], derive_seed(cell_seed, "split", {}));
            ix = std::move(halves.first);
            iy = std::move(halves.second);
            Rng rng(derive_seed(cell_seed, "cap", {}));
            if (ix.size() > cap) ix = sample_without_replacement(ix, cap, rng);
            if (iy.size() > cap) iy = sample_without_replacement(iy, cap, rng);
        } else {
            const auto& ga = ds.group(labels[i]);
            const auto& gb = ds.group(labels[j]);
            ix = subsample(ds, labels[i], std::min(cap, ga.size()), derive_seed(cell_seed, "cap", {0}));
            iy = subsample(ds, labels[j], std::min(cap, gb.size()), derive_seed(cell_seed, "cap", {1}));
        }
        TestConfig inner = cfg;
        inner.seed = derive_seed(cell_seed, "test", {});
        inner.workers = 1;
        results[c] = permutation_test(ds.points(ix), ds.points(iy), spec, inner);
    });

    for (std::size_t c = 0; c < cells.size(); ++c) {
        const auto [i, j] = cells[c];
        const auto& r = results[c];
        for (auto [a, b] : {std::pair{i, j}, std::pair{j, i}}) {
            out.values[a][b] = r.observed;
            out.p_values[a][b] = r.p_value;
            out.significant[a][b] = r.reject;
            out.sample_sizes[a][b] = std::min(r.m, r.n);
        }
    }
    return out;
}

std::vector<double> bootstrap_replicates(const PointSet& x, const PointSet& y, const KernelSpec& spec,
                                         std::size_t iterations, std::uint64_t seed, unsigned workers) {
    if (x.size() < 2 || y.size() < 2) throw InvalidArgument("bootstrap needs at least 2 samples per group");
    if (iterations < 100) throw InvalidArgument("bootstrap needs at least 100 iterations");
    const std::size_t m = x.size();
    const std::size_t n = y.size();
    const PointSet pooled = PointSet::concat(x, y);
    const KernelSpec resolved = resolve_bandwidth(spec, pooled);
    const auto gram = precompute_gram(resolved, pooled, m, n, default_gram_budget_bytes(), workers);

    std::vector<double> reps(iterations);
    parallel_for(iterations, workers, [&](std::size_t b) {
        Rng rng(derive_seed(seed, "bootstrap", {b}));
        std::vector<std::size_t> ix(m);
        std::vector<std::size_t> iy(n);
        for (auto& i : ix) i = static_cast<std::size_t>(rng.below(m));
        for (auto& j : iy) j = m + static_cast<std::size_t>(rng.below(n));
        if (gram)
            reps[b] = detail::unbiased_mmd([&](std::size_t i, std::size_t j) { return (*gram)(i, j); },
                                           std::span<const std::size_t>(ix), std::span<const std::size_t>(iy));
        else
            reps[b] = mmd_on_the_fly(resolved, pooled, ix, iy);
    });
    return reps;
}

BootstrapCi percentile_interval(double point, const std::vector<double>& replicates, double level) {
    if (!(level > 0.0 && level < 1.0)) throw InvalidArgument("confidence level must lie in (0, 1)");
    BootstrapCi ci;
    ci.point = point;
    ci.level = level;
    ci.iterations = replicates.size();
    const double tail = (1.0 - level) / 2.0;
    ci.lower = quantile(replicates, tail);
    ci.upper = quantile(replicates, 1.0 - tail);
    ci.replicate_median = quantile(replicates, 0.5);
    return ci;
}

BootstrapCi bootstrap_ci(const PointSet& x, const PointSet& y, const KernelSpec& spec, std::size_t iterations,
                         double level, std::uint64_t seed, unsigned workers) {
    const double point = mmd_squared_unbiased(x, y, spec).value;
    return percentile_interval(point, bootstrap_replicates(x, y, spec, iterations, seed, workers), level);
}

}  // namespace distinct
