#include <doctest.h>

#include <cmath>
#include <set>

#include "distinct/error.hpp"
#include "distinct/permutation_test.hpp"
#include "distinct/power_analysis.hpp"
#include "test_util.hpp"

using namespace distinct;

namespace {

TestConfig config(std::size_t r, double alpha, std::uint64_t seed) {
    TestConfig cfg;
    cfg.permutations = r;
    cfg.alpha = alpha;
    cfg.seed = seed;
    return cfg;
}

GroupedDataset two_groups(std::size_t n, std::size_t dim, double shift, std::uint64_t seed) {
    Rng rng(seed);
    return GroupedDataset(testutil::make_table(
        {{"a", testutil::gaussian(n, dim, rng)}, {"b", testutil::gaussian(n, dim, rng, shift)}}));
}

PowerCurve curve_of(std::vector<std::size_t> sizes, std::vector<double> rates) {
    PowerCurve c;
    c.sample_sizes = std::move(sizes);
    c.rates = std::move(rates);
    return c;
}

}  // namespace

TEST_CASE("threshold sample size") {
    CHECK(threshold_sample_size(curve_of({5, 10, 20, 40}, {0.2, 0.5, 0.85, 0.97}), 0.8) == 20u);
    CHECK_FALSE(threshold_sample_size(curve_of({5, 10, 20}, {0.1, 0.2, 0.3}), 0.8).has_value());
    CHECK(threshold_sample_size(curve_of({5, 10}, {0.8, 0.9}), 0.8) == 5u);
}

TEST_CASE("a group tested against itself rejects near alpha") {
    const auto ds = two_groups(200, 3, 0.0, 61);
    const auto curve = rejection_rate_curve(ds, "a", "a", {5, 10, 20}, 500, KernelSpec::rbf_median(), config(199, 0.01, 9));
    CHECK(curve.trials == 500);
    for (double r : curve.rates) CHECK(r <= 0.03);
}

TEST_CASE("two-dimensional mean shift of 5 has power at n = 6") {
    const auto ds = two_groups(300, 2, 5.0, 67);
    const auto curve = rejection_rate_curve(ds, "a", "b", {6}, 500, KernelSpec::rbf_median(), config(500, 0.01, 3));
    CHECK(curve.rates[0] >= 0.90);
    CHECK(curve.rejections[0] == static_cast<std::size_t>(std::lround(curve.rates[0] * 500)));
}

TEST_CASE("power grows with n under a fixed alternative") {
    const auto ds = two_groups(200, 4, 0.8, 71);
    int ok = 0;
    for (std::uint64_t s = 0; s < 20; ++s) {
        const auto c = rejection_rate_curve(ds, "a", "b", {4, 12}, 40, KernelSpec::rbf_median(), config(99, 0.05, s));
        if (c.rates[1] >= c.rates[0] - 0.05) ++ok;
    }
    CHECK(ok == 20);
}

TEST_CASE("trial samples") {
    const auto ds = two_groups(30, 2, 1.0, 73);
    SUBCASE("same group draws disjoint halves") {
        const auto s = draw_trial_sample(ds, "a", "a", 15, 5);
        CHECK(s.x.size() == 15);
        CHECK(s.y.size() == 15);
        std::set<std::vector<double>> seen;
        for (std::size_t i = 0; i < 15; ++i) {
            seen.insert(std::vector<double>(s.x[i].begin(), s.x[i].end()));
            seen.insert(std::vector<double>(s.y[i].begin(), s.y[i].end()));
        }
        CHECK(seen.size() == 30);
    }
    SUBCASE("group exhausted") {
        CHECK_THROWS_AS((void)draw_trial_sample(ds, "a", "a", 16, 5), InvalidArgument);
        CHECK_THROWS_AS((void)draw_trial_sample(ds, "a", "b", 31, 5), InvalidArgument);
        CHECK_THROWS_AS(
            (void)rejection_rate_curve(ds, "a", "b", {40}, 5, KernelSpec::rbf_median(), config(19, 0.05, 1)),
            InvalidArgument);
    }
    SUBCASE("seeds are keyed by pair, size and trial") {
        CHECK(trial_seed(1, "a", "b", 5, 0) == trial_seed(1, "a", "b", 5, 0));
        CHECK(trial_seed(1, "a", "b", 5, 0) != trial_seed(1, "a", "b", 5, 1));
        CHECK(trial_seed(1, "a", "b", 5, 0) != trial_seed(1, "a", "b", 6, 0));
        CHECK(trial_seed(1, "a", "b", 5, 0) != trial_seed(1, "b", "a", 5, 0));
    }
}

TEST_CASE("power curves do not depend on worker count") {
    const auto ds = two_groups(60, 3, 0.5, 79);
    auto cfg = config(49, 0.05, 12);
    const auto one = rejection_rate_curve(ds, "a", "b", {5, 10, 20}, 30, KernelSpec::rbf_median(), cfg);
    cfg.workers = 6;
    const auto six = rejection_rate_curve(ds, "a", "b", {5, 10, 20}, 30, KernelSpec::rbf_median(), cfg);
    CHECK(one.rejections == six.rejections);
}

TEST_CASE("mmd matrix") {
    SUBCASE("single group") {
        Rng rng(83);
        const GroupedDataset ds(testutil::make_table({{"only", testutil::gaussian(40, 3, rng)}}));
        const auto m = mmd_matrix(ds, 100, KernelSpec::rbf_median(), config(199, 0.01, 4));
        REQUIRE(m.labels.size() == 1);
        CHECK_FALSE(m.significant[0][0]);
        CHECK(m.sample_sizes[0][0] == 20);
    }
    SUBCASE("separated groups") {
        const auto ds = two_groups(40, 3, 5.0, 89);
        const auto m = mmd_matrix(ds, 30, KernelSpec::rbf_median(), config(199, 0.01, 4));
        CHECK(m.labels == std::vector<std::string>{"a", "b"});
        CHECK(m.significant[0][1]);
        CHECK_FALSE(m.significant[0][0]);
        CHECK_FALSE(m.significant[1][1]);
        CHECK(m.values[0][1] == m.values[1][0]);
        CHECK(m.p_values[0][1] == m.p_values[1][0]);
        CHECK(m.sample_sizes[0][1] == 30);
        for (std::size_t i = 0; i < 2; ++i)
            for (std::size_t j = 0; j < 2; ++j) CHECK(m.significant[i][j] == (m.p_values[i][j] < m.alpha));
    }
    SUBCASE("invalid arguments") {
        const auto ds = two_groups(40, 3, 5.0, 89);
        CHECK_THROWS_AS((void)mmd_matrix(ds, 1, KernelSpec::rbf_median(), config(19, 0.05, 1)), InvalidArgument);
        Rng rng(1);
        const GroupedDataset tiny(testutil::make_table({{"t", testutil::gaussian(3, 2, rng)}}));
        CHECK_THROWS_AS((void)mmd_matrix(tiny, 10, KernelSpec::rbf_median(), config(19, 0.05, 1)), InvalidArgument);
    }
}

TEST_CASE("bootstrap confidence interval") {
    SUBCASE("identical constant samples") {
        const PointSet c{{1, 1}, {1, 1}, {1, 1}, {1, 1}, {1, 1}};
        const auto ci = bootstrap_ci(c, c, KernelSpec::rbf_fixed(1.0), 200, 0.95, 3);
        CHECK(ci.lower == 0.0);
        CHECK(ci.upper == 0.0);
        CHECK(ci.point == 0.0);
    }
    SUBCASE("interval narrows with sample size") {
        Rng rng(97);
        double small = 0.0, large = 0.0;
        for (std::uint64_t s = 0; s < 20; ++s) {
            const auto x20 = testutil::gaussian(20, 2, rng), y20 = testutil::gaussian(20, 2, rng, 1.0);
            const auto x200 = testutil::gaussian(200, 2, rng), y200 = testutil::gaussian(200, 2, rng, 1.0);
            const auto a = bootstrap_ci(x20, y20, KernelSpec::rbf_median(), 200, 0.95, s);
            const auto b = bootstrap_ci(x200, y200, KernelSpec::rbf_median(), 200, 0.95, s);
            small += a.upper - a.lower;
            large += b.upper - b.lower;
        }
        CHECK(large < small);
    }
    SUBCASE("nested levels and determinism") {
        Rng rng(101);
        const auto x = testutil::gaussian(30, 3, rng), y = testutil::gaussian(30, 3, rng, 0.5);
        const auto reps = bootstrap_replicates(x, y, KernelSpec::rbf_median(), 300, 8);
        const auto c90 = percentile_interval(0.0, reps, 0.90);
        const auto c95 = percentile_interval(0.0, reps, 0.95);
        CHECK(c95.lower <= c90.lower);
        CHECK(c90.upper <= c95.upper);
        CHECK(bootstrap_replicates(x, y, KernelSpec::rbf_median(), 300, 8, 4) == reps);
        CHECK(c95.lower == doctest::Approx(quantile(reps, 0.025)).epsilon(1e-15));
    }
    SUBCASE("iteration floor") {
        const PointSet c{{1.0}, {2.0}, {3.0}};
        CHECK_THROWS_AS((void)bootstrap_ci(c, c, KernelSpec::linear(), 99, 0.95, 1), InvalidArgument);
        CHECK_THROWS_AS((void)bootstrap_ci(c, c, KernelSpec::linear(), 100, 1.0, 1), InvalidArgument);
    }
}
