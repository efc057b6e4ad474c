#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <cstdlib>

#include "distinct/error.hpp"
#include "distinct/kernel.hpp"
#include "test_util.hpp"

using namespace distinct;

namespace {

// Sorted-pairwise-distance median, computed independently of the library.
double oracle_median(const PointSet& p) {
    std::vector<double> d;
    for (std::size_t i = 0; i < p.size(); ++i)
        for (std::size_t j = i + 1; j < p.size(); ++j) {
            double s = 0.0;
            for (std::size_t k = 0; k < p.dim(); ++k) s += (p[i][k] - p[j][k]) * (p[i][k] - p[j][k]);
            d.push_back(std::sqrt(s));
        }
    std::sort(d.begin(), d.end());
    const std::size_t c = d.size();
    return c % 2 ? d[c / 2] : 0.5 * (d[c / 2 - 1] + d[c / 2]);
}

PointSet line(std::initializer_list<double> xs) {
    PointSet p(1);
    for (double x : xs) p.push_back(std::vector<double>{x});
    return p;
}

}  // namespace

TEST_CASE("median heuristic examples") {
    CHECK(median_heuristic_sigma(PointSet{{0, 0}, {3, 4}}) == doctest::Approx(5.0).epsilon(1e-12));
    CHECK(median_heuristic_sigma(line({0, 1, 3})) == doctest::Approx(2.0).epsilon(1e-12));
    // six distances 1,1,2,2,3,4: even count averages the middle pair
    CHECK(median_heuristic_sigma(line({0, 1, 2, 4})) == doctest::Approx(2.0).epsilon(1e-12));
    // 1,2,3,4,6,7
    CHECK(median_heuristic_sigma(line({0, 1, 3, 7})) == doctest::Approx(3.5).epsilon(1e-12));
}

TEST_CASE("median heuristic on constant data") {
    CHECK_THROWS_AS((void)median_heuristic_sigma(PointSet{{0, 0}, {0, 0}, {0, 0}}), DegenerateBandwidth);
    CHECK_THROWS_AS((void)median_heuristic_sigma(line({0})), Error);
    // ten pairs, six zero distances: median zero, smallest positive is 1
    const auto p = line({0, 0, 0, 0, 1});
    CHECK_THROWS_AS((void)median_heuristic_sigma(p), DegenerateBandwidth);
    CHECK(median_heuristic_sigma(p, DegenerateSigma::smallest_positive) == 1.0);
}

TEST_CASE("median heuristic matches the sorted-distance oracle and ignores order") {
    Rng rng(11);
    for (int t = 0; t < 30; ++t) {
        const auto p = testutil::gaussian(5 + t, 1 + t % 6, rng);
        const double sigma = median_heuristic_sigma(p);
        CHECK(sigma == doctest::Approx(oracle_median(p)).epsilon(1e-12));
        std::vector<std::size_t> idx(p.size());
        for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
        shuffle(std::span<std::size_t>(idx), rng);
        CHECK(median_heuristic_sigma(p.select(idx)) == doctest::Approx(sigma).epsilon(1e-12));
    }
}

TEST_CASE("kernel values") {
    const std::vector<double> a{1, 2};
    const std::vector<double> b{3, 4};
    CHECK(kernel_value(KernelSpec::rbf_fixed(0.7), a, a) == 1.0);
    const std::vector<double> o{0, 0};
    const std::vector<double> u{1, 1};
    CHECK(kernel_value(KernelSpec::rbf_fixed(1.0), o, u) == doctest::Approx(std::exp(-1.0)).epsilon(1e-12));
    CHECK(kernel_value(KernelSpec::linear(), a, b) == 11.0);
    const std::vector<double> c{1, 2, 3};
    CHECK_THROWS_AS((void)kernel_value(KernelSpec::linear(), a, c), InvalidArgument);
    CHECK_THROWS_AS((void)kernel_value(KernelSpec::rbf_median(), a, b), InvalidArgument);
}

TEST_CASE("rbf kernel values lie in (0, 1] and are symmetric") {
    Rng rng(3);
    const auto p = testutil::gaussian(20, 4, rng, 0.0, 3.0);
    const auto spec = KernelSpec::rbf_fixed(1.3);
    for (std::size_t i = 0; i < p.size(); ++i)
        for (std::size_t j = 0; j < p.size(); ++j) {
            const double v = kernel_value(spec, p[i], p[j]);
            CHECK(v > 0.0);
            CHECK(v <= 1.0);
            CHECK(v == kernel_value(spec, p[j], p[i]));
        }
}

TEST_CASE("rbf with median bandwidth is invariant to rotation and translation") {
    Rng rng(5);
    for (int t = 0; t < 10; ++t) {
        const std::size_t d = 2 + t % 5;
        const auto p = testutil::gaussian(12, d, rng);
        const auto q = testutil::random_orthogonal(d, rng);
        std::vector<double> shift(d);
        for (auto& s : shift) s = 10.0 * rng.normal();
        const auto moved = testutil::apply_affine(p, q, shift);
        const auto s1 = resolve_bandwidth(KernelSpec::rbf_median(), p);
        const auto s2 = resolve_bandwidth(KernelSpec::rbf_median(), moved);
        CHECK(s2.sigma == doctest::Approx(s1.sigma).epsilon(1e-10));
        for (std::size_t i = 0; i < p.size(); ++i)
            for (std::size_t j = 0; j < p.size(); ++j)
                CHECK(std::abs(kernel_value(s1, p[i], p[j]) - kernel_value(s2, moved[i], moved[j])) <= 1e-10);
    }
}

TEST_CASE("bandwidth rules") {
    const auto p = line({0, 1, 3});
    CHECK(resolve_bandwidth(KernelSpec::rbf_scaled(0.5), p).sigma == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(resolve_bandwidth(KernelSpec::rbf_fixed(7.0), p).sigma == 7.0);
    CHECK(resolve_bandwidth(KernelSpec::linear(), p) == KernelSpec::linear());
    CHECK_THROWS_AS(KernelSpec::rbf_fixed(0.0).validate(), InvalidArgument);
    CHECK_THROWS_AS(KernelSpec::rbf_fixed(-1.0).validate(), InvalidArgument);
    CHECK_THROWS_AS(KernelSpec::rbf_scaled(0.0).validate(), InvalidArgument);
    CHECK(KernelSpec::rbf_median().describe() == "rbf(median)");
}

TEST_CASE("gram matrix") {
    Rng rng(17);
    SUBCASE("two identical points give all ones") {
        const PointSet p{{1.5, -2}, {1.5, -2}};
        const auto g = precompute_gram(KernelSpec::rbf_fixed(1.0), p, 1, 1);
        REQUIRE(g);
        for (double v : g->values()) CHECK(v == 1.0);
    }
    SUBCASE("entries match pointwise evaluation") {
        const auto p = testutil::gaussian(10, 3, rng);
        const auto spec = resolve_bandwidth(KernelSpec::rbf_median(), p);
        const auto g = precompute_gram(spec, p, 5, 5);
        REQUIRE(g);
        const auto k = testutil::naive_rbf(spec.sigma);
        for (std::size_t i = 0; i < 10; ++i)
            for (std::size_t j = 0; j < 10; ++j) {
                CHECK(std::abs((*g)(i, j) - k(p[i], p[j])) <= 1e-12);
                CHECK((*g)(i, j) == (*g)(j, i));
            }
        for (std::size_t i = 0; i < 10; ++i) CHECK((*g)(i, i) == 1.0);
    }
    SUBCASE("linear kernel on orthonormal vectors is the identity") {
        const PointSet p{{1, 0, 0}, {0, 1, 0}, {0, 0, 1}};
        const auto g = precompute_gram(KernelSpec::linear(), p, 2, 1);
        REQUIRE(g);
        for (std::size_t i = 0; i < 3; ++i)
            for (std::size_t j = 0; j < 3; ++j) CHECK((*g)(i, j) == (i == j ? 1.0 : 0.0));
    }
    SUBCASE("linear diagonal holds squared norms") {
        const auto p = testutil::gaussian(8, 4, rng);
        const auto g = precompute_gram(KernelSpec::linear(), p, 4, 4);
        REQUIRE(g);
        for (std::size_t i = 0; i < 8; ++i) CHECK((*g)(i, i) == doctest::Approx(testutil::naive_linear(p[i], p[i])));
    }
    SUBCASE("over budget returns nothing") {
        const auto p = testutil::gaussian(30, 2, rng);
        CHECK_FALSE(precompute_gram(KernelSpec::rbf_fixed(1.0), p, 15, 15, gram_bytes(30) - 1).has_value());
        CHECK(precompute_gram(KernelSpec::rbf_fixed(1.0), p, 15, 15, gram_bytes(30)).has_value());
    }
    SUBCASE("unresolved spec is rejected") {
        const auto p = testutil::gaussian(4, 2, rng);
        CHECK_THROWS_AS((void)precompute_gram(KernelSpec::rbf_median(), p, 2, 2), InvalidArgument);
    }
    SUBCASE("worker count does not change the matrix") {
        const auto p = testutil::gaussian(40, 5, rng);
        const auto spec = resolve_bandwidth(KernelSpec::rbf_median(), p);
        const auto g1 = precompute_gram(spec, p, 20, 20, gram_bytes(40), 1);
        const auto g4 = precompute_gram(spec, p, 20, 20, gram_bytes(40), 4);
        REQUIRE(g1);
        REQUIRE(g4);
        CHECK(g1->values() == g4->values());
    }
}

TEST_CASE("gram matrices are positive semi-definite") {
    Rng rng(23);
    for (int t = 0; t < 5; ++t) {
        const auto p = testutil::gaussian(24, 3, rng);
        for (const auto& spec : {resolve_bandwidth(KernelSpec::rbf_median(), p), KernelSpec::linear()}) {
            const auto g = precompute_gram(spec, p, 12, 12);
            REQUIRE(g);
            std::vector<std::vector<double>> a(24, std::vector<double>(24));
            for (std::size_t i = 0; i < 24; ++i)
                for (std::size_t j = 0; j < 24; ++j) a[i][j] = (*g)(i, j);
            const auto ev = testutil::jacobi_eigenvalues(a);
            CHECK(ev.back() >= -1e-8);
        }
    }
}

TEST_CASE("gram budget comes from the environment") {
    ::setenv("DISTINCT_GRAM_BUDGET_MB", "3", 1);
    CHECK(default_gram_budget_bytes() == 3u * 1024u * 1024u);
    ::unsetenv("DISTINCT_GRAM_BUDGET_MB");
    CHECK(default_gram_budget_bytes() == 1024u * 1024u * 1024u);
}
