#include <doctest.h>

#include <cmath>
#include <cstring>

#include "distinct/error.hpp"
#include "distinct/mmd.hpp"
#include "test_util.hpp"

using namespace distinct;

namespace {

bool same_bits(double a, double b) { return std::memcmp(&a, &b, sizeof(double)) == 0; }

PointSet pooled_of(const PointSet& x, const PointSet& y) { return PointSet::concat(x, y); }

std::vector<std::size_t> iota_from(std::size_t start, std::size_t count) {
    std::vector<std::size_t> v(count);
    for (std::size_t i = 0; i < count; ++i) v[i] = start + i;
    return v;
}

// Sum-of-vectors identity for the linear kernel, independent of pairwise loops.
double linear_closed_form(const PointSet& x, const PointSet& y) {
    const std::size_t d = x.dim();
    std::vector<double> sx(d, 0.0), sy(d, 0.0);
    double nx = 0.0, ny = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i)
        for (std::size_t k = 0; k < d; ++k) {
            sx[k] += x[i][k];
            nx += x[i][k] * x[i][k];
        }
    for (std::size_t i = 0; i < y.size(); ++i)
        for (std::size_t k = 0; k < d; ++k) {
            sy[k] += y[i][k];
            ny += y[i][k] * y[i][k];
        }
    double ssx = 0.0, ssy = 0.0, sxy = 0.0;
    for (std::size_t k = 0; k < d; ++k) {
        ssx += sx[k] * sx[k];
        ssy += sy[k] * sy[k];
        sxy += sx[k] * sy[k];
    }
    const double m = static_cast<double>(x.size());
    const double n = static_cast<double>(y.size());
    return (ssx - nx) / (m * (m - 1)) + (ssy - ny) / (n * (n - 1)) - 2.0 * sxy / (m * n);
}

}  // namespace

TEST_CASE("identical two-point samples give exactly zero") {
    const PointSet v{{0.3, -1.2}, {0.3, -1.2}};
    CHECK(mmd_squared_unbiased(v, v, KernelSpec::rbf_fixed(1.0)).value == 0.0);
    CHECK(mmd_squared_unbiased(v, v, KernelSpec::linear()).value == 0.0);
}

TEST_CASE("linear kernel worked example") {
    const PointSet x{{0.0}, {0.0}};
    const PointSet y{{1.0}, {1.0}};
    CHECK(mmd_squared_unbiased(x, y, KernelSpec::linear()).value == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("rbf worked example can be negative") {
    const PointSet x{{0.0}, {2.0}};
    const auto est = mmd_squared_unbiased(x, x, KernelSpec::rbf_fixed(1.0));
    CHECK(est.value == doctest::Approx(std::exp(-2.0) - 1.0).epsilon(1e-12));
    CHECK(est.value < 0.0);
    CHECK(clamp_for_display(est.value) == 0.0);
}

TEST_CASE("estimator agrees with the naive double loop") {
    Rng rng(101);
    for (int t = 0; t < 50; ++t) {
        const std::size_t d = 1 + t % 7;
        const auto x = testutil::gaussian(2 + t % 9, d, rng);
        const auto y = testutil::gaussian(2 + (t * 5) % 11, d, rng, 0.5 * (t % 3));
        const auto rbf = mmd_squared_unbiased(x, y, KernelSpec::rbf_median());
        CHECK(std::abs(rbf.value - testutil::naive_mmd(x, y, testutil::naive_rbf(rbf.spec.sigma))) <= 1e-12);
        const auto lin = mmd_squared_unbiased(x, y, KernelSpec::linear()).value;
        const double oracle = testutil::naive_mmd(x, y, testutil::naive_linear);
        CHECK(std::abs(lin - oracle) <= 1e-10 * std::max(1.0, std::abs(oracle)));
    }
}

TEST_CASE("linear kernel matches the closed form") {
    Rng rng(7);
    for (int t = 0; t < 30; ++t) {
        const auto x = testutil::gaussian(3 + t, 6, rng, 1.0);
        const auto y = testutil::gaussian(4 + t / 2, 6, rng);
        const double oracle = linear_closed_form(x, y);
        CHECK(std::abs(mmd_squared_unbiased(x, y, KernelSpec::linear()).value - oracle) <=
              1e-10 * std::max(1.0, std::abs(oracle)));
    }
}

TEST_CASE("rbf estimate lies in [-2, 2]") {
    Rng rng(9);
    for (int t = 0; t < 100; ++t) {
        const auto x = testutil::gaussian(2 + t % 4, 2, rng, 0.0, 0.01 + t);
        const auto y = testutil::gaussian(2 + t % 3, 2, rng, 3.0 * (t % 2));
        const double v = mmd_squared_unbiased(x, y, KernelSpec::rbf_scaled(0.05 + 0.1 * (t % 7))).value;
        CHECK(v >= -2.0);
        CHECK(v <= 2.0);
    }
}

TEST_CASE("swapping arguments is bit-identical") {
    Rng rng(13);
    for (int t = 0; t < 40; ++t) {
        const auto x = testutil::gaussian(3 + t % 6, 4, rng);
        const auto y = testutil::gaussian(3 + t % 5, 4, rng, 1.0);
        for (const auto& spec : {KernelSpec::rbf_median(), KernelSpec::linear(), KernelSpec::rbf_fixed(0.9)})
            CHECK(same_bits(mmd_squared_unbiased(x, y, spec).value, mmd_squared_unbiased(y, x, spec).value));
        const auto pooled = pooled_of(x, y);
        const auto g = precompute_gram(resolve_bandwidth(KernelSpec::rbf_median(), pooled), pooled, x.size(), y.size());
        REQUIRE(g);
        const auto ix = iota_from(0, x.size());
        const auto iy = iota_from(x.size(), y.size());
        CHECK(same_bits(mmd_from_gram(*g, ix, iy).value, mmd_from_gram(*g, iy, ix).value));
    }
}

TEST_CASE("MMD is invariant under isometries with the median bandwidth") {
    Rng rng(19);
    for (int t = 0; t < 10; ++t) {
        const std::size_t d = 3 + t % 4;
        const auto x = testutil::gaussian(15, d, rng);
        const auto y = testutil::gaussian(12, d, rng, 0.7);
        const auto q = testutil::random_orthogonal(d, rng);
        std::vector<double> shift(d);
        for (auto& s : shift) s = 5.0 * rng.normal();
        const double a = mmd_squared_unbiased(x, y, KernelSpec::rbf_median()).value;
        const double b = mmd_squared_unbiased(testutil::apply_affine(x, q, shift), testutil::apply_affine(y, q, shift),
                                              KernelSpec::rbf_median())
                             .value;
        CHECK(std::abs(a - b) <= 1e-10);
    }
}

TEST_CASE("gram-based estimate") {
    Rng rng(29);
    SUBCASE("four identical points") {
        const PointSet p{{1, 1}, {1, 1}, {1, 1}, {1, 1}};
        const auto g = precompute_gram(KernelSpec::rbf_fixed(1.0), p, 2, 2);
        REQUIRE(g);
        const std::vector<std::size_t> a{0, 1}, b{2, 3};
        CHECK(mmd_from_gram(*g, a, b).value == 0.0);
    }
    SUBCASE("matches the direct computation") {
        const auto x = testutil::gaussian(10, 3, rng);
        const auto y = testutil::gaussian(10, 3, rng, 1.0);
        const auto pooled = pooled_of(x, y);
        const auto spec = resolve_bandwidth(KernelSpec::rbf_median(), pooled);
        const auto g = precompute_gram(spec, pooled, 10, 10);
        REQUIRE(g);
        const auto ix = iota_from(0, 10);
        const auto iy = iota_from(10, 10);
        CHECK(std::abs(mmd_from_gram(*g, ix, iy).value - mmd_squared_unbiased(x, y, spec).value) <= 1e-12);
        CHECK(std::abs(mmd_on_the_fly(spec, pooled, ix, iy) - mmd_from_gram(*g, ix, iy).value) <= 1e-15);
    }
    SUBCASE("index validation") {
        const auto p = testutil::gaussian(6, 2, rng);
        const auto g = precompute_gram(KernelSpec::rbf_fixed(1.0), p, 3, 3);
        REQUIRE(g);
        const std::vector<std::size_t> a{0, 1, 2}, b{2, 3, 4}, far{3, 4, 6}, one{5};
        CHECK_THROWS_AS((void)mmd_from_gram(*g, a, b), InvalidArgument);
        CHECK_THROWS_AS((void)mmd_from_gram(*g, a, far), InvalidArgument);
        CHECK_THROWS_AS((void)mmd_from_gram(*g, a, one), InvalidArgument);
    }
}

TEST_CASE("input validation") {
    const PointSet one{{1.0, 2.0}};
    const PointSet two{{1.0, 2.0}, {3.0, 4.0}};
    const PointSet other_dim{{1.0}, {2.0}};
    CHECK_THROWS_AS((void)mmd_squared_unbiased(one, two, KernelSpec::linear()), InvalidArgument);
    CHECK_THROWS_AS((void)mmd_squared_unbiased(two, other_dim, KernelSpec::linear()), InvalidArgument);
}

TEST_CASE("unbiased under the null (mean within 3 standard errors of zero)") {
    Rng rng(31);
    const int trials = 1000;
    std::vector<double> vals;
    for (int t = 0; t < trials; ++t) {
        const auto x = testutil::gaussian(20, 8, rng);
        const auto y = testutil::gaussian(20, 8, rng);
        vals.push_back(mmd_squared_unbiased(x, y, KernelSpec::rbf_fixed(4.0)).value);
    }
    double mean = 0.0;
    for (double v : vals) mean += v;
    mean /= trials;
    double var = 0.0;
    for (double v : vals) var += (v - mean) * (v - mean);
    const double se = std::sqrt(var / (trials - 1) / trials);
    CHECK(std::abs(mean) <= 3.0 * se);
}
