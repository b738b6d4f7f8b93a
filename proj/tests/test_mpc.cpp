#include <doctest.h>

#include "rampc/errors.hpp"
#include "rampc/kernels.hpp"
#include "rampc/mpc.hpp"
#include "rampc/polytope.hpp"

#include <algorithm>
#include <cmath>
#include <random>

using namespace rampc;

namespace {

MpcConfig small_cfg(int n, int m, int p, std::optional<double> eta = 0.0) {
    MpcConfig cfg;
    cfg.horizon = n;
    cfg.model_length = m;
    cfg.facet_count = p;
    cfg.window_size = 8;
    cfg.eta_override = eta;
    return cfg;
}

FeasibleSet interval_fss(double lo, double hi) {
    FeasibleSet fss;
    fss.a_h = Matrix(2, 1);
    fss.a_h(0, 0) = 1.0;
    fss.a_h(1, 0) = -1.0;
    fss.b_h = {hi, -lo};
    return fss;
}

ControllerState make_state(FeasibleSet fss, int m, double prev = 0.0) {
    ControllerState st{Vector(static_cast<std::size_t>(m), 0.0), prev, std::move(fss),
                       MeasurementWindow(8)};
    return st;
}

MpcSolution solve_program(const RobustProgram& prog, const MpcConfig& cfg) {
    CutPool pool;
    SimplexContext ctx(prog.fss->a_h, prog.fss->b_h);
    return solve_robust(prog, pool, ctx, cfg);
}

// direct construction of phi per the held-input recursion, as an
// independent oracle for the plan's affine map
Vector direct_phi(const Vector& past, const Vector& u, int idx, int m) {
    const int n = static_cast<int>(u.size());
    Vector phi(m, 0.0);
    for (int l = 0; l < m; ++l) {
        const int k = idx - l;
        if (k >= n) {
            phi[l] = u[n - 1];
        } else if (k >= 0) {
            phi[l] = u[k];
        } else if (static_cast<std::size_t>(-k - 1) < past.size()) {
            phi[l] = past[-k - 1];
        }
    }
    return phi;
}

} // namespace

TEST_CASE("regressor plan: zero history, direct expansion") {
    auto cfg = small_cfg(2, 2, 4);
    auto plan = build_regressor_plan({0.0, 0.0}, cfg);
    REQUIRE(plan.indices() == 3);  // offsets 0, 1, 2
    // at U = 0 only past inputs remain, all zero here
    for (std::size_t idx = 0; idx < 3; ++idx) {
        for (double v : plan.past[idx]) CHECK(v == 0.0);
    }
    // U = (1, 0): phi(t+1|t) carries u(t|t) = 1 in the lag-1 slot
    auto phi1 = plan.eval(1, {1.0, 0.0});
    CHECK(phi1[0] == 0.0);  // q(t+1|t) = u(t+1|t) = 0
    CHECK(phi1[1] == 1.0);  // q(t|t) = u(t|t) = 1
}

TEST_CASE("regressor plan: held terminal input accumulates") {
    auto cfg = small_cfg(3, 4, 8);
    auto plan = build_regressor_plan({0.1, 0.2, 0.3, 0.4}, cfg);
    const std::size_t last = plan.indices() - 1;  // idx = N+m-2
    double col_sum = 0.0;
    for (int l = 0; l < 4; ++l) col_sum += plan.coeff[last](l, 2);
    CHECK(col_sum == doctest::Approx(4.0));  // all m lags sit past the horizon
}

TEST_CASE("regressor plan matches direct construction on random data") {
    std::mt19937_64 rng(41);
    std::uniform_real_distribution<double> d(-1.0, 1.0);
    for (int rep = 0; rep < 20; ++rep) {
        const int n = 1 + static_cast<int>(rng() % 5);
        const int m = 1 + static_cast<int>(rng() % 5);
        auto cfg = small_cfg(n, m, 4 * m);
        Vector past(m);
        for (auto& v : past) v = d(rng);
        Vector u(n);
        for (auto& v : u) v = d(rng);
        auto plan = build_regressor_plan(past, cfg);
        for (std::size_t idx = 0; idx < plan.indices(); ++idx) {
            auto got = plan.eval(idx, u);
            auto want = direct_phi(past, u, static_cast<int>(idx), m);
            for (int l = 0; l < m; ++l) CHECK(got[l] == doctest::Approx(want[l]));
        }
    }
}

TEST_CASE("dualized block reproduces support values") {
    // min b^T theta st A^T theta = phi, theta >= 0 equals the support
    auto dual_value = [](const FeasibleSet& fss, const Vector& phi) {
        const std::size_t p = fss.facets();
        const std::size_t m = fss.dim();
        LinearProgram lp;
        lp.c.assign(p, 0.0);
        for (std::size_t i = 0; i < p; ++i) lp.c[i] = -fss.b_h[i];  // maximize -b.theta
        lp.a_ineq = Matrix(p, p);
        for (std::size_t i = 0; i < p; ++i) lp.a_ineq(i, i) = -1.0;
        lp.b_ineq.assign(p, 0.0);
        lp.a_eq = Matrix(m, p);
        for (std::size_t j = 0; j < m; ++j) {
            for (std::size_t i = 0; i < p; ++i) lp.a_eq(j, i) = fss.a_h(i, j);
        }
        lp.b_eq = phi;
        auto res = solve_lp(lp);
        REQUIRE(res.status == SolveStatus::Optimal);
        return -res.objective;
    };

    auto iv = interval_fss(0.5, 1.0);
    CHECK(dual_value(iv, {1.0}) == doctest::Approx(1.0));   // support at the upper bound
    CHECK(dual_value(iv, {0.0}) == doctest::Approx(0.0));   // theta = 0 feasible

    std::mt19937_64 rng(43);
    std::uniform_real_distribution<double> d(-1.0, 1.0);
    SystemBounds b;
    for (int rep = 0; rep < 25; ++rep) {
        auto fss = initial_fss(b, 3, make_facet_matrix(3, 8, rep));
        Vector phi{d(rng), d(rng), d(rng)};
        auto verts = enumerate_vertices(fss.as_polytope());
        REQUIRE(!verts.empty());
        double best = -1e300;
        for (const auto& v : verts) best = std::max(best, kernels::dot(phi.data(), v.data(), 3));
        CHECK(dual_value(fss, phi) == doctest::Approx(best).epsilon(1e-7));
    }
}

TEST_CASE("one-step minimax equalizes the extreme models") {
    SystemBounds b;
    b.u_max = 2.0;
    b.du_max = 1e6;
    b.y_max = 100.0;
    auto cfg = small_cfg(1, 1, 2);
    auto st = make_state(interval_fss(0.5, 1.0), 1);
    auto prog = make_robust_program(Variant::Rampc, st, cfg, {1.0}, 0.0, b);
    auto sol = solve_program(prog, cfg);
    REQUIRE(sol.status == SolveStatus::Optimal);
    CHECK(std::fabs(sol.u[0] - 4.0 / 3.0) < 1e-4);
    CHECK(sol.worst_case_cost == doctest::Approx(1.0 / 9.0).epsilon(1e-4));

    // grid-search oracle over the input range
    double best_u = 0.0, best_f = 1e300;
    for (double u = -2.0; u <= 2.0; u += 1e-4) {
        const double f = std::max((1.0 - 0.5 * u) * (1.0 - 0.5 * u),
                                  (1.0 - 1.0 * u) * (1.0 - 1.0 * u));
        if (f < best_f) {
            best_f = f;
            best_u = u;
        }
    }
    CHECK(std::fabs(sol.u[0] - best_u) < 2e-4);
    CHECK(sol.worst_case_cost == doctest::Approx(best_f).epsilon(1e-3));
}

TEST_CASE("constraint generation agrees with the dense solve of the assembled program") {
    SystemBounds b;
    b.u_max = 2.0;
    b.du_max = 0.8;
    b.y_max = 4.0;
    std::mt19937_64 rng(47);
    std::uniform_real_distribution<double> d(-1.0, 1.0);
    for (int rep = 0; rep < 8; ++rep) {
        const int m = 2 + static_cast<int>(rng() % 2);
        const int n = 2 + static_cast<int>(rng() % 2);
        auto cfg = small_cfg(n, m, 2 * m + 2);
        cfg.audit_qp = true;
        auto fss = initial_fss(b, m, make_facet_matrix(m, cfg.facet_count, rep + 5));
        auto st = make_state(fss, m, 0.2 * d(rng));
        for (auto& v : st.input_history) v = 0.3 * d(rng);
        Vector y_des(n);
        for (auto& v : y_des) v = 1.5 * d(rng);

        auto prog = make_robust_program(Variant::Rampc, st, cfg, y_des, 0.05, b);
        auto sol = solve_program(prog, cfg);
        REQUIRE(sol.status == SolveStatus::Optimal);

        auto big = assemble(prog);
        auto dense = solve_qp(big.qp, cfg.qp);
        REQUIRE(dense.status == SolveStatus::Optimal);
        CHECK(sol.worst_case_cost == doctest::Approx(dense.objective).epsilon(1e-6));

        // the recovered full point satisfies the assembled program's
        // optimality conditions
        CHECK(sol.audit_kkt >= 0.0);
        CHECK(sol.audit_kkt <= 1e-6);
    }
}

TEST_CASE("singleton set: worst case equals nominal, both variants coincide") {
    SystemBounds b;
    b.u_max = 2.0;
    b.du_max = 1e6;
    b.y_max = 100.0;
    auto cfg = small_cfg(3, 1, 2);
    auto st = make_state(interval_fss(0.7, 0.7), 1);
    Vector y_des{1.0, 0.5, -0.2};

    auto rsol = solve_program(make_robust_program(Variant::Rampc, st, cfg, y_des, 0.0, b), cfg);
    auto asol = solve_program(
        make_robust_program(Variant::Ampc, st, cfg, y_des, 0.0, b, {0.7}), cfg);
    REQUIRE(rsol.status == SolveStatus::Optimal);
    REQUIRE(asol.status == SolveStatus::Optimal);
    for (int j = 0; j < 3; ++j) CHECK(rsol.u[j] == doctest::Approx(asol.u[j]).epsilon(1e-5));
    // u = y_des / 0.7 wherever it is reachable
    CHECK(rsol.u[0] == doctest::Approx(1.0 / 0.7).epsilon(1e-6));
    CHECK(rsol.worst_case_cost == doctest::Approx(asol.worst_case_cost).epsilon(1e-6));
}

TEST_CASE("zero reference from rest keeps the input at zero") {
    SystemBounds b;
    b.mu = 2;
    auto cfg = small_cfg(4, 2, 4);
    auto st = make_state(initial_fss(b, 2, make_facet_matrix(2, 4, 0)), 2);
    Vector y_des(4, 0.0);
    auto sol = solve_program(make_robust_program(Variant::Rampc, st, cfg, y_des,
                                                 truncation_error(b, 2), b),
                             cfg);
    REQUIRE(sol.status == SolveStatus::Optimal);
    for (double u : sol.u) CHECK(std::fabs(u) < 1e-9);
    CHECK(sol.worst_case_cost < 1e-12);
}

TEST_CASE("nominal tracking at the chebyshev center") {
    SystemBounds b;
    b.u_max = 2.0;
    b.du_max = 1e6;
    b.y_max = 100.0;
    auto cfg = small_cfg(1, 1, 2);
    auto st = make_state(interval_fss(0.4, 1.0), 1);
    auto big = assemble_ampc(st, cfg, {1.0}, 0.0, b);  // center = 0.7
    auto prog = make_robust_program(Variant::Ampc, st, cfg, {1.0}, 0.0, b, {0.7});
    auto sol = solve_program(prog, cfg);
    REQUIRE(sol.status == SolveStatus::Optimal);
    CHECK(sol.u[0] == doctest::Approx(1.0 / 0.7).epsilon(1e-6));
    CHECK(sol.nominal_cost < 1e-10);
    // dense route over the assembled program gives the same input
    auto dense = solve_qp(big.qp, cfg.qp);
    REQUIRE(dense.status == SolveStatus::Optimal);
    CHECK(dense.x[0] == doctest::Approx(1.0 / 0.7).epsilon(1e-6));
}

TEST_CASE("minimax solution dominates the nominal controller's worst case") {
    SystemBounds b;
    b.u_max = 2.0;
    b.du_max = 0.8;
    b.y_max = 6.0;
    std::mt19937_64 rng(53);
    std::uniform_real_distribution<double> d(-1.0, 1.0);
    for (int rep = 0; rep < 12; ++rep) {
        const int m = 2;
        const int n = 3;
        auto cfg = small_cfg(n, m, 6);
        auto fss = initial_fss(b, m, make_facet_matrix(m, 6, rep + 17));
        auto st = make_state(fss, m, 0.3 * d(rng));
        for (auto& v : st.input_history) v = 0.4 * d(rng);
        Vector y_des(n);
        for (auto& v : y_des) v = 1.2 * d(rng);
        auto center = chebyshev_center(fss.as_polytope()).first;

        auto rsol = solve_program(
            make_robust_program(Variant::Rampc, st, cfg, y_des, 0.05, b), cfg);
        auto asol = solve_program(
            make_robust_program(Variant::Ampc, st, cfg, y_des, 0.05, b, center), cfg);
        REQUIRE(rsol.status == SolveStatus::Optimal);
        REQUIRE(asol.status == SolveStatus::Optimal);
        CHECK(rsol.worst_case_cost <= asol.worst_case_cost + 1e-6);
    }
}

TEST_CASE("epigraph bounds are tight at the optimum") {
    SystemBounds b;
    b.u_max = 2.0;
    b.du_max = 0.8;
    b.y_max = 6.0;
    const int n = 3, m = 2;
    auto cfg = small_cfg(n, m, 6);
    auto fss = initial_fss(b, m, make_facet_matrix(m, 6, 29));
    auto st = make_state(fss, m, 0.1);
    Vector y_des{0.8, 1.0, 0.6};
    auto prog = make_robust_program(Variant::Rampc, st, cfg, y_des, 0.05, b);
    auto sol = solve_program(prog, cfg);
    REQUIRE(sol.status == SolveStatus::Optimal);
    for (int j = 0; j < n; ++j) {
        Vector phi = prog.plan.eval(j, sol.u);
        Vector neg = phi;
        for (auto& v : neg) v = -v;
        const double hi = support(fss.as_polytope(), phi) - y_des[j];
        const double lo = y_des[j] + support(fss.as_polytope(), neg);
        CHECK(sol.cost_bounds[j] == doctest::Approx(std::max(hi, lo)).epsilon(1e-6));
    }
}

TEST_CASE("shrinking the feasible set never increases the minimax cost") {
    SystemBounds b;
    b.u_max = 2.0;
    b.du_max = 0.8;
    b.y_max = 6.0;
    const int n = 3, m = 2;
    auto cfg = small_cfg(n, m, 6);
    auto fss = initial_fss(b, m, make_facet_matrix(m, 6, 31));
    auto st = make_state(fss, m);
    Vector y_des{1.0, 0.7, 0.4};
    auto base = solve_program(make_robust_program(Variant::Rampc, st, cfg, y_des, 0.05, b),
                              cfg);
    REQUIRE(base.status == SolveStatus::Optimal);

    // pull the offsets toward an interior point: a valid elementwise-smaller set
    auto center = chebyshev_center(fss.as_polytope()).first;
    for (double alpha : {0.8, 0.5, 0.2}) {
        auto shrunk = fss;
        for (std::size_t i = 0; i < fss.facets(); ++i) {
            const double at = kernels::dot(fss.a_h.row(i), center.data(), m);
            shrunk.b_h[i] = at + alpha * (fss.b_h[i] - at);
            CHECK(shrunk.b_h[i] <= fss.b_h[i] + 1e-12);
        }
        auto st2 = make_state(shrunk, m);
        auto sol = solve_program(
            make_robust_program(Variant::Rampc, st2, cfg, y_des, 0.05, b), cfg);
        REQUIRE(sol.status == SolveStatus::Optimal);
        CHECK(sol.worst_case_cost <= base.worst_case_cost + 1e-7);
    }
}

TEST_CASE("infeasible per-step program is reported as such") {
    SystemBounds b;
    b.u_max = 2.0;
    b.du_max = 0.8;
    b.y_max = 0.2;  // tighter than anything reachable with the forced history
    const int n = 2, m = 2;
    auto cfg = small_cfg(n, m, 4);
    auto fss = initial_fss(b, m, make_facet_matrix(m, 4, 0));
    auto st = make_state(fss, m, 2.0);
    st.input_history = {2.0, 2.0};  // committed past pushes the output over the bound
    Vector y_des(n, 0.0);
    auto prog = make_robust_program(Variant::Rampc, st, cfg, y_des, 0.0, b);
    auto sol = solve_program(prog, cfg);
    CHECK(sol.status == SolveStatus::Infeasible);
}

TEST_CASE("controller: zero reference keeps everything quiet") {
    SystemBounds b;
    MpcConfig cfg = small_cfg(4, 4, 8, std::nullopt);
    Controller ctrl(b, cfg, Variant::Rampc);
    Vector refs(4, 0.0);
    auto out = ctrl.step(0.0, refs);
    CHECK(std::fabs(out.u) < 1e-9);
    CHECK(out.solution.status == SolveStatus::Optimal);
    CHECK(out.fss_support_sum > 0.0);
}

TEST_CASE("controller: consecutive steps respect the rate bound") {
    SystemBounds b;
    MpcConfig cfg = small_cfg(4, 4, 8, std::nullopt);
    Controller ctrl(b, cfg, Variant::Rampc);
    double prev = 0.0;
    for (int t = 1; t <= 6; ++t) {
        Vector refs(4, 1.2);
        auto out = ctrl.step(0.05 * t, refs);
        CHECK(std::fabs(out.u) <= b.u_max + 1e-9);
        CHECK(std::fabs(out.u - prev) <= b.du_max + 1e-9);
        prev = out.u;
    }
}
