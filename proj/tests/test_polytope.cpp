#include <doctest.h>

#include "rampc/errors.hpp"
#include "rampc/kernels.hpp"
#include "rampc/polytope.hpp"

#include <algorithm>
#include <cmath>
#include <random>

using namespace rampc;

namespace {

Polytope box(const Vector& lo, const Vector& hi) {
    const std::size_t m = lo.size();
    Polytope p;
    p.a = Matrix(2 * m, m);
    p.b.assign(2 * m, 0.0);
    for (std::size_t i = 0; i < m; ++i) {
        p.a(i, i) = 1.0;
        p.b[i] = hi[i];
        p.a(m + i, i) = -1.0;
        p.b[m + i] = -lo[i];
    }
    return p;
}

// bounded random polytope: a box intersected with extra random halfspaces
Polytope random_polytope(std::mt19937_64& rng, std::size_t m, std::size_t extra) {
    std::uniform_real_distribution<double> d(-1.0, 1.0);
    Vector lo(m), hi(m);
    for (std::size_t i = 0; i < m; ++i) {
        lo[i] = -1.0 - 0.5 * std::fabs(d(rng));
        hi[i] = 1.0 + 0.5 * std::fabs(d(rng));
    }
    Polytope p = box(lo, hi);
    Matrix a(2 * m + extra, m);
    Vector b(2 * m + extra);
    for (std::size_t i = 0; i < 2 * m; ++i) {
        for (std::size_t j = 0; j < m; ++j) a(i, j) = p.a(i, j);
        b[i] = p.b[i];
    }
    for (std::size_t e = 0; e < extra; ++e) {
        double norm = 0.0;
        for (std::size_t j = 0; j < m; ++j) {
            a(2 * m + e, j) = d(rng);
            norm += a(2 * m + e, j) * a(2 * m + e, j);
        }
        // offset keeps the origin strictly inside
        b[2 * m + e] = 0.3 + std::fabs(d(rng)) * std::sqrt(norm);
    }
    return Polytope{a, b};
}

double vertex_support(const Polytope& p, const Vector& dir) {
    auto verts = enumerate_vertices(p);
    REQUIRE(!verts.empty());
    double best = -1e300;
    for (const auto& v : verts) {
        best = std::max(best, kernels::dot(dir.data(), v.data(), dir.size()));
    }
    return best;
}

} // namespace

TEST_CASE("box support values") {
    auto p = box({0, 0}, {1, 1});
    CHECK(support(p, {1, 0}) == doctest::Approx(1.0));
    auto p2 = box({0.3, 0.3}, {1, 1});
    CHECK(support(p2, {1, 1}) == doctest::Approx(2.0));
    CHECK(support(p2, {-1, 0}) == doctest::Approx(-0.3));
}

TEST_CASE("support on random polytopes matches vertex enumeration") {
    std::mt19937_64 rng(21);
    std::uniform_real_distribution<double> d(-1.0, 1.0);
    for (int rep = 0; rep < 30; ++rep) {
        const std::size_t m = 2 + rng() % 2;  // 2 or 3
        auto p = random_polytope(rng, m, 3);
        Vector dir(m);
        for (auto& x : dir) x = d(rng);
        CHECK(support(p, dir) == doctest::Approx(vertex_support(p, dir)).epsilon(1e-8));
    }
}

TEST_CASE("support errors on empty and unbounded sets") {
    Polytope empty;
    empty.a = Matrix(2, 1);
    empty.a(0, 0) = 1.0;
    empty.a(1, 0) = -1.0;
    empty.b = {1.0, -2.0};  // x <= 1 and x >= 2
    CHECK_THROWS_AS(support(empty, {1.0}), EmptySetError);

    Polytope half;
    half.a = Matrix(1, 1);
    half.a(0, 0) = 1.0;
    half.b = {1.0};
    CHECK_THROWS_AS(support(half, {-1.0}), UnboundedError);
}

TEST_CASE("containment check") {
    auto p = box({0, 0}, {1, 1});
    CHECK(contains(p, {0.5, 0.5}, 0.0));
    CHECK_FALSE(contains(p, {1.1, 0.0}, 1e-9));
    for (const auto& v : enumerate_vertices(p)) CHECK(contains(p, v, 1e-8));
}

TEST_CASE("chebyshev center of symmetric boxes and intervals") {
    auto p = box({-1, -1}, {1, 1});
    auto [c, r] = chebyshev_center(p);
    CHECK(c[0] == doctest::Approx(0.0));
    CHECK(c[1] == doctest::Approx(0.0));
    CHECK(r == doctest::Approx(1.0));

    auto iv = box({0.4}, {1.0});
    auto [c1, r1] = chebyshev_center(iv);
    CHECK(c1[0] == doctest::Approx(0.7));
    CHECK(r1 == doctest::Approx(0.3));
}

TEST_CASE("chebyshev ball fits inside random polytopes") {
    std::mt19937_64 rng(22);
    for (int rep = 0; rep < 20; ++rep) {
        auto p = random_polytope(rng, 3, 4);
        auto [c, r] = chebyshev_center(p);
        CHECK(r >= 0.0);
        CHECK(contains(p, c, 1e-9));
        for (std::size_t i = 0; i < p.facets(); ++i) {
            const double slack = p.b[i] - kernels::dot(p.a.row(i), c.data(), 3);
            CHECK(slack >= r * row_norm(p.a, i) - 1e-8);
        }
    }
}

TEST_CASE("chebyshev center of an empty set raises") {
    Polytope empty;
    empty.a = Matrix(2, 1);
    empty.a(0, 0) = 1.0;
    empty.a(1, 0) = -1.0;
    empty.b = {1.0, -2.0};
    CHECK_THROWS_AS(chebyshev_center(empty), EmptySetError);
}

TEST_CASE("vertex enumeration counts") {
    auto p = box({0, 0}, {1, 1});
    CHECK(enumerate_vertices(p).size() == 4);

    // 3-d simplex: h >= 0, sum h <= 1
    Polytope s;
    s.a = Matrix(4, 3);
    s.b = {0, 0, 0, 1};
    for (int i = 0; i < 3; ++i) s.a(i, i) = -1.0;
    for (int j = 0; j < 3; ++j) s.a(3, j) = 1.0;
    CHECK(enumerate_vertices(s).size() == 4);
}

TEST_CASE("vertex enumeration guard") {
    Polytope big;
    big.a = Matrix(10, 7);
    big.b.assign(10, 1.0);
    CHECK_THROWS_AS(enumerate_vertices(big), ConfigError);
}
