#include <doctest.h>

#include "rampc/kernels.hpp"
#include "rampc/polytope.hpp"
#include "rampc/solver.hpp"

#include <algorithm>
#include <cmath>
#include <random>

using namespace rampc;

namespace {

LinearProgram box_lp(std::size_t n) {
    LinearProgram lp;
    lp.c.assign(n, 1.0);
    lp.a_ineq = Matrix(2 * n, n);
    lp.b_ineq.assign(2 * n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        lp.a_ineq(i, i) = 1.0;
        lp.b_ineq[i] = 1.0;
        lp.a_ineq(n + i, i) = -1.0;
        lp.b_ineq[n + i] = 0.0;
    }
    return lp;
}

// independent oracle: projected gradient on box-constrained strictly convex
// QPs, run to convergence
Vector projected_gradient_box(const Matrix& p, const Vector& q, const Vector& lo,
                              const Vector& hi) {
    const std::size_t n = q.size();
    Vector x(n, 0.0);
    double lip = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        double rowsum = 0.0;
        for (std::size_t j = 0; j < n; ++j) rowsum += std::fabs(p(i, j));
        lip = std::max(lip, rowsum);
    }
    const double step = 1.0 / (lip + 1.0);
    for (int it = 0; it < 200000; ++it) {
        Vector g = matvec(p, x);
        for (std::size_t i = 0; i < n; ++i) g[i] += q[i];
        double move = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double xn = std::clamp(x[i] - step * g[i], lo[i], hi[i]);
            move = std::max(move, std::fabs(xn - x[i]));
            x[i] = xn;
        }
        if (move < 1e-12) break;
    }
    return x;
}

} // namespace

TEST_CASE("lp: box maximum") {
    auto lp = box_lp(2);
    auto res = solve_lp(lp);
    REQUIRE(res.status == SolveStatus::Optimal);
    CHECK(res.objective == doctest::Approx(2.0));
    CHECK(res.x[0] == doctest::Approx(1.0));
    CHECK(res.x[1] == doctest::Approx(1.0));
    CHECK(res.kkt_residual <= 1e-8);
}

TEST_CASE("lp: infeasible and unbounded are reported, not thrown") {
    LinearProgram lp;
    lp.c = {1.0};
    lp.a_ineq = Matrix(2, 1);
    lp.a_ineq(0, 0) = 1.0;
    lp.a_ineq(1, 0) = -1.0;
    lp.b_ineq = {1.0, -2.0};  // x <= 1, x >= 2
    CHECK(solve_lp(lp).status == SolveStatus::Infeasible);

    LinearProgram unb;
    unb.c = {1.0};
    unb.a_ineq = Matrix(1, 1);
    unb.a_ineq(0, 0) = -1.0;
    unb.b_ineq = {0.0};  // x >= 0, maximize x
    CHECK(solve_lp(unb).status == SolveStatus::Unbounded);
}

TEST_CASE("lp: equality constraints") {
    // maximize x + y st x + y = 1, 0 <= x,y <= 1 -> objective 1
    LinearProgram lp = box_lp(2);
    lp.a_eq = Matrix(1, 2);
    lp.a_eq(0, 0) = 1.0;
    lp.a_eq(0, 1) = 1.0;
    lp.b_eq = {1.0};
    auto res = solve_lp(lp);
    REQUIRE(res.status == SolveStatus::Optimal);
    CHECK(res.objective == doctest::Approx(1.0));
}

TEST_CASE("lp: random instances match the vertex oracle and obey strong duality") {
    std::mt19937_64 rng(31);
    std::uniform_real_distribution<double> d(-1.0, 1.0);
    for (int rep = 0; rep < 40; ++rep) {
        const std::size_t m = 2 + rng() % 3;  // 2..4
        // bounded feasible region: box plus random cuts through it
        Polytope poly;
        poly.a = Matrix(2 * m + 3, m);
        poly.b.assign(2 * m + 3, 0.0);
        for (std::size_t i = 0; i < m; ++i) {
            poly.a(i, i) = 1.0;
            poly.b[i] = 1.0 + std::fabs(d(rng));
            poly.a(m + i, i) = -1.0;
            poly.b[m + i] = 1.0 + std::fabs(d(rng));
        }
        for (std::size_t e = 0; e < 3; ++e) {
            for (std::size_t j = 0; j < m; ++j) poly.a(2 * m + e, j) = d(rng);
            poly.b[2 * m + e] = 0.4 + std::fabs(d(rng));
        }
        LinearProgram lp;
        lp.c.resize(m);
        for (auto& c : lp.c) c = d(rng);
        lp.a_ineq = poly.a;
        lp.b_ineq = poly.b;
        auto res = solve_lp(lp);
        REQUIRE(res.status == SolveStatus::Optimal);

        auto verts = enumerate_vertices(poly);
        REQUIRE(!verts.empty());
        double best = -1e300;
        for (const auto& v : verts) {
            best = std::max(best, kernels::dot(lp.c.data(), v.data(), m));
        }
        CHECK(res.objective == doctest::Approx(best).epsilon(1e-7));

        // strong duality: primal and dual objectives agree
        double dual_obj = 0.0;
        for (std::size_t i = 0; i < lp.b_ineq.size(); ++i) {
            dual_obj += res.dual_ineq[i] * lp.b_ineq[i];
            CHECK(res.dual_ineq[i] >= -1e-9);
        }
        CHECK(std::fabs(dual_obj - res.objective) <= 1e-7 * (1.0 + std::fabs(res.objective)));
    }
}

TEST_CASE("lp: deterministic across repeated solves") {
    auto lp = box_lp(4);
    lp.c = {0.3, -0.2, 0.9, 0.1};
    auto r1 = solve_lp(lp);
    auto r2 = solve_lp(lp);
    CHECK(r1.status == r2.status);
    REQUIRE(r1.x.size() == r2.x.size());
    for (std::size_t i = 0; i < r1.x.size(); ++i) CHECK(r1.x[i] == r2.x[i]);
    CHECK(r1.objective == r2.objective);
}

TEST_CASE("lp: pivot cap yields max-iterations status") {
    auto lp = box_lp(3);
    SolverOptions opts;
    opts.max_iterations = 1;
    CHECK(solve_lp(lp, opts).status == SolveStatus::IterationLimit);
}

TEST_CASE("qp: clipped scalar problems") {
    // min (x-1)^2 st x <= 0.5
    Matrix p(1, 1);
    p(0, 0) = 2.0;
    Matrix a(1, 1);
    a(0, 0) = 1.0;
    auto qp = make_qp(p, {-2.0}, a, {0.5});
    auto res = solve_qp(qp);
    REQUIRE(res.status == SolveStatus::Optimal);
    CHECK(res.x[0] == doctest::Approx(0.5));

    // min x^2 unconstrained
    auto qp2 = make_qp(p, {0.0}, Matrix{}, {});
    auto res2 = solve_qp(qp2);
    REQUIRE(res2.status == SolveStatus::Optimal);
    CHECK(res2.x[0] == doctest::Approx(0.0));
}

TEST_CASE("qp: equality constrained") {
    // min x^2 + y^2 st x + y = 2 -> (1, 1)
    Matrix p(2, 2);
    p(0, 0) = 2.0;
    p(1, 1) = 2.0;
    Matrix ae(1, 2);
    ae(0, 0) = 1.0;
    ae(0, 1) = 1.0;
    auto qp = make_qp(p, {0.0, 0.0}, Matrix{}, {}, ae, {2.0});
    auto res = solve_qp(qp);
    REQUIRE(res.status == SolveStatus::Optimal);
    CHECK(res.x[0] == doctest::Approx(1.0));
    CHECK(res.x[1] == doctest::Approx(1.0));
    CHECK(res.kkt_residual <= 1e-8);
}

TEST_CASE("qp: infeasible is reported") {
    Matrix p(1, 1);
    p(0, 0) = 2.0;
    Matrix a(2, 1);
    a(0, 0) = 1.0;
    a(1, 0) = -1.0;
    auto qp = make_qp(p, {0.0}, a, {1.0, -2.0});
    CHECK(solve_qp(qp).status == SolveStatus::Infeasible);
}

TEST_CASE("qp: random strictly convex box problems match projected gradient") {
    std::mt19937_64 rng(33);
    std::uniform_real_distribution<double> d(-1.0, 1.0);
    for (int rep = 0; rep < 30; ++rep) {
        const std::size_t n = 2 + rng() % 4;  // 2..5
        Matrix base(n, n);
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t j = 0; j < n; ++j) base(i, j) = d(rng);
        }
        Matrix p(n, n);  // p = base^T base + I
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t j = 0; j < n; ++j) {
                double s = 0.0;
                for (std::size_t k = 0; k < n; ++k) s += base(k, i) * base(k, j);
                p(i, j) = s + (i == j ? 1.0 : 0.0);
            }
        }
        Vector q(n), lo(n), hi(n);
        for (std::size_t i = 0; i < n; ++i) {
            q[i] = 2.0 * d(rng);
            lo[i] = -0.8 + 0.2 * d(rng);
            hi[i] = 0.8 + 0.2 * d(rng);
        }
        Matrix a(2 * n, n);
        Vector b(2 * n);
        for (std::size_t i = 0; i < n; ++i) {
            a(i, i) = 1.0;
            b[i] = hi[i];
            a(n + i, i) = -1.0;
            b[n + i] = -lo[i];
        }
        auto res = solve_qp(make_qp(p, q, a, b));
        REQUIRE(res.status == SolveStatus::Optimal);
        auto want = projected_gradient_box(p, q, lo, hi);
        for (std::size_t i = 0; i < n; ++i) {
            CHECK(res.x[i] == doctest::Approx(want[i]).epsilon(1e-6).scale(1.0));
        }
    }
}

TEST_CASE("qp: feasible perturbations do not improve the optimum") {
    std::mt19937_64 rng(34);
    std::uniform_real_distribution<double> d(-1.0, 1.0);
    Matrix p(3, 3);
    p(0, 0) = 2.0;
    p(1, 1) = 4.0;
    p(2, 2) = 2.0;
    p(0, 1) = p(1, 0) = 0.5;
    Vector q{-1.0, 0.3, 0.7};
    Matrix a(3, 3);
    a(0, 0) = 1.0;
    a(0, 1) = 1.0;
    a(1, 2) = -1.0;
    a(2, 1) = 1.0;
    Vector b{1.0, 0.5, 0.4};
    auto qp = make_qp(p, q, a, b);
    auto res = solve_qp(qp);
    REQUIRE(res.status == SolveStatus::Optimal);
    auto objective = [&](const Vector& x) {
        double o = 0.5 * kernels::dot(matvec(p, x).data(), x.data(), 3);
        return o + kernels::dot(q.data(), x.data(), 3);
    };
    const double f0 = objective(res.x);
    for (int rep = 0; rep < 200; ++rep) {
        Vector x = res.x;
        for (auto& v : x) v += 1e-4 * d(rng);
        bool feas = true;
        for (std::size_t i = 0; i < 3; ++i) {
            feas = feas && kernels::dot(a.row(i), x.data(), 3) <= b[i];
        }
        if (feas) CHECK(objective(x) >= f0 - 1e-8);
    }
}

TEST_CASE("qp: semidefinite cost is handled through the proximal pass") {
    // min (x - y)^2 st x <= 0.3, y <= x - 0.1  (flat direction along x = y)
    Matrix p(2, 2);
    p(0, 0) = 2.0;
    p(1, 1) = 2.0;
    p(0, 1) = p(1, 0) = -2.0;
    Matrix a(2, 2);
    a(0, 0) = 1.0;
    a(1, 0) = -1.0;
    a(1, 1) = 1.0;
    auto qp = make_qp(p, {0.0, 0.0}, a, {0.3, -0.1});
    auto res = solve_qp(qp);
    REQUIRE(res.status == SolveStatus::Optimal);
    // optimum: y = x - 0.1, objective (0.1)^2
    CHECK(res.objective == doctest::Approx(0.01).epsilon(1e-6));
    CHECK(res.kkt_residual <= 1e-8);
}
