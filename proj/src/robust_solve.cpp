#include "rampc/mpc.hpp"

#include "rampc/errors.hpp"
#include "rampc/kernels.hpp"
#include "rampc/polytope.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>

// The dualized per-step program is block separable: given the inputs, each
// robust row reduces to one support-function evaluation over the feasible
// set. The solver below exploits that: a small master program over (U, c)
// collects cutting planes phi(U)^T v <= rhs from support-LP maximizers v,
// which are vertices of the feasible set, until no robust row is violated.
// Termination is exact for polytopic sets (finitely many vertices, and a
// violated row always contributes a new cut). The multipliers of the final
// support LPs are exactly the dual-block variables of the assembled
// program, which is what makes the recovered point auditable against it.

namespace rampc {

void CutPool::revalidate(const FeasibleSet& fss, double tol) {
    const Polytope poly = fss.as_polytope();
    for (auto& list : per_row) {
        std::erase_if(list, [&](const Vector& v) { return !contains(poly, v, tol); });
    }
    std::erase_if(warm_cuts,
                  [&](const ActiveCut& ac) { return !contains(poly, ac.vertex, tol); });
}

std::size_t CutPool::total() const {
    std::size_t n = 0;
    for (const auto& list : per_row) n += list.size();
    return n;
}

void CutPool::advance(const std::vector<RobustRow>& rows) {
    if (per_row.size() != rows.size()) return;  // nothing collected yet
    std::vector<long> source(rows.size(), -1);
    for (std::size_t k = 0; k < rows.size(); ++k) {
        // the row one prediction offset ahead with the same sign and kind
        const auto& row = rows[k];
        for (std::size_t k2 = 0; k2 < rows.size(); ++k2) {
            if (rows[k2].pred_index == row.pred_index + 1 && rows[k2].sign == row.sign &&
                (rows[k2].c_index >= 0) == (row.c_index >= 0)) {
                source[k] = static_cast<long>(k2);
                break;
            }
        }
    }
    std::vector<std::vector<Vector>> shifted(rows.size());
    std::vector<long> dest(rows.size(), -1);  // inverse map for the warm set
    for (std::size_t k = 0; k < rows.size(); ++k) {
        const std::size_t src = source[k] >= 0 ? static_cast<std::size_t>(source[k]) : k;
        shifted[k] = per_row[src];
        if (dest[src] < 0) dest[src] = static_cast<long>(k);
    }
    per_row = std::move(shifted);
    std::vector<ActiveCut> moved;
    moved.reserve(warm_cuts.size());
    for (auto& ac : warm_cuts) {
        if (ac.row < dest.size() && dest[ac.row] >= 0) {
            moved.push_back({static_cast<std::size_t>(dest[ac.row]), std::move(ac.vertex)});
        }
    }
    warm_cuts = std::move(moved);
}

namespace {

struct DirectionSlot {
    bool exact = false;  // value came from an LP at cached_dir
    double value = 0.0;
    Vector vertex;
    Vector dual;
    Vector cached_dir;
};

// master inequality layout: the 4N input rows first (same order as the
// assembled program), then one row per pooled cut
struct MasterCut {
    std::size_t row_index;
    std::size_t vertex_index;
};

Vector cut_gradient(const RegressorPlan& plan, std::size_t idx, const Vector& vertex) {
    const Matrix& coeff = plan.coeff[idx];
    Vector g(coeff.cols(), 0.0);
    for (std::size_t l = 0; l < coeff.rows(); ++l) {
        if (vertex[l] != 0.0) kernels::axpy(vertex[l], coeff.row(l), g.data(), g.size());
    }
    return g;
}

struct MasterResult {
    SolveStatus status = SolveStatus::IterationLimit;
    Vector x;
    Vector dual;  // one multiplier per master row, inputs first
    long iterations = 0;
};

// Primal active-set solve of the dense master with a warm working set:
// repeated KKT solves, dropping negative multipliers and adding the most
// violated row. Fast when the active set repeats across rounds and steps;
// any numerical doubt falls back to the caller's exact path. wset is
// updated to the final active set on success.
bool solve_master_fast(const Matrix& p, const Vector& q, const std::vector<Vector>& irows,
                       const Vector& irhs, const std::vector<Vector>& crows,
                       const Vector& crhs, std::vector<std::size_t>& wset,
                       MasterResult& out) {
    const std::size_t nv = q.size();
    const std::size_t ni = irows.size();
    const std::size_t nr = ni + crows.size();
    auto row_of = [&](std::size_t r) -> const Vector& {
        return r < ni ? irows[r] : crows[r - ni];
    };
    auto rhs_of = [&](std::size_t r) { return r < ni ? irhs[r] : crhs[r - ni]; };

    std::vector<std::size_t> w;
    for (std::size_t r : wset) {
        if (r < nr && std::find(w.begin(), w.end(), r) == w.end()) w.push_back(r);
    }
    if (w.size() > nv) w.resize(nv);

    Vector x(nv, 0.0), lambda;
    long last_dropped = -1;
    for (int it = 0; it < 120; ++it) {
        ++out.iterations;
        const std::size_t nw = w.size();
        Matrix kkt(nv + nw, nv + nw);
        Vector rhs(nv + nw, 0.0);
        for (std::size_t i = 0; i < nv; ++i) {
            for (std::size_t j = 0; j < nv; ++j) kkt(i, j) = p(i, j);
            rhs[i] = -q[i];
        }
        for (std::size_t k = 0; k < nw; ++k) {
            const Vector& a = row_of(w[k]);
            for (std::size_t j = 0; j < nv; ++j) {
                kkt(nv + k, j) = a[j];
                kkt(j, nv + k) = a[j];
            }
            rhs[nv + k] = rhs_of(w[k]);
        }
        Vector xl;
        if (!solve_square(kkt, rhs, xl, 1e-13)) {
            if (w.empty()) return false;
            w.pop_back();  // drop the most recent, it made the set dependent
            continue;
        }
        x.assign(xl.begin(), xl.begin() + nv);
        lambda.assign(xl.begin() + nv, xl.end());

        std::size_t drop = nw;
        double most_negative = -1e-9;
        for (std::size_t k = 0; k < nw; ++k) {
            if (lambda[k] < most_negative) {
                most_negative = lambda[k];
                drop = k;
            }
        }
        if (drop < nw) {
            last_dropped = static_cast<long>(w[drop]);
            w.erase(w.begin() + static_cast<long>(drop));
            continue;
        }
        std::size_t add = nr;
        double worst = 1e-9;
        for (std::size_t r = 0; r < nr; ++r) {
            const double viol = kernels::dot(row_of(r).data(), x.data(), nv) - rhs_of(r);
            if (viol > worst) {
                worst = viol;
                add = r;
            }
        }
        if (add == nr) {
            out.status = SolveStatus::Optimal;
            out.x = std::move(x);
            out.dual.assign(nr, 0.0);
            for (std::size_t k = 0; k < nw; ++k) out.dual[w[k]] = lambda[k];
            wset = std::move(w);
            return true;
        }
        // re-adding what was just dropped means this scheme is cycling here
        if (static_cast<long>(add) == last_dropped) {
            if (std::getenv("RAMPC_DEBUG_MASTER")) {
                std::fprintf(stderr, "master fast: re-add after drop r=%zu it=%d |W|=%zu\n",
                             add, it, w.size());
            }
            return false;
        }
        if (std::find(w.begin(), w.end(), add) != w.end()) {
            if (std::getenv("RAMPC_DEBUG_MASTER")) {
                std::fprintf(stderr, "master fast: add already-active r=%zu it=%d viol=%g\n",
                             add, it, worst);
            }
            return false;
        }
        w.push_back(add);
    }
    return false;
}

MasterResult solve_master(const Matrix& p, const Vector& q, const std::vector<Vector>& irows,
                          const Vector& irhs, const std::vector<Vector>& crows,
                          const Vector& crhs, std::vector<std::size_t>& wset,
                          const SolverOptions& opts, int& fallbacks) {
    MasterResult out;
    if (solve_master_fast(p, q, irows, irhs, crows, crhs, wset, out)) return out;
    ++fallbacks;

    // exact fallback
    const std::size_t nv = q.size();
    const std::size_t nr = irows.size() + crows.size();
    Matrix a(nr, nv);
    Vector b(nr, 0.0);
    for (std::size_t r = 0; r < irows.size(); ++r) {
        for (std::size_t j = 0; j < nv; ++j) a(r, j) = irows[r][j];
        b[r] = irhs[r];
    }
    for (std::size_t r = 0; r < crows.size(); ++r) {
        for (std::size_t j = 0; j < nv; ++j) a(irows.size() + r, j) = crows[r][j];
        b[irows.size() + r] = crhs[r];
    }
    auto res = solve_qp(make_qp(p, q, a, b), opts);
    out.status = res.status;
    out.x = std::move(res.x);
    out.dual = std::move(res.dual_ineq);
    out.iterations += res.iterations;
    if (out.status == SolveStatus::Optimal) {
        wset.clear();
        for (std::size_t r = 0; r < nr; ++r) {
            if (out.dual[r] > 1e-10) wset.push_back(r);
        }
    }
    return out;
}

} // namespace

MpcSolution solve_robust(const RobustProgram& prog, CutPool& pool,
                         SimplexContext& support_ctx, const MpcConfig& cfg) {
    const std::size_t n = prog.y_des.size();
    const bool rampc = prog.variant == Variant::Rampc;
    const std::size_t nc = rampc ? n : 0;
    const std::size_t n_dirs = prog.plan.indices();

    pool.fit(prog.rows.size());
    pool.revalidate(*prog.fss, 1e-9);

    MpcSolution sol;
    std::vector<DirectionSlot> dirs(2 * n_dirs);  // (idx, sign): 2*idx + (sign < 0)
    auto slot_of = [&](const RobustRow& row) -> std::size_t {
        return 2 * static_cast<std::size_t>(row.pred_index) + (row.sign < 0.0 ? 1 : 0);
    };

    // coordinate envelope of the feasible set, for the certificate bounds
    const std::size_t mdim = prog.fss->dim();
    Vector box_lo(mdim, 0.0), box_hi(mdim, 0.0);
    bool have_box = true;
    {
        std::vector<char> found(2 * mdim, 0);
        const Matrix& a = prog.fss->a_h;
        for (std::size_t r = 0; r < prog.fss->facets(); ++r) {
            int hit = -1;
            double sgn = 0.0;
            for (std::size_t j = 0; j < mdim; ++j) {
                const double v = a(r, j);
                if (v == 0.0) continue;
                if (hit >= 0 || (v != 1.0 && v != -1.0)) {
                    hit = -2;
                    break;
                }
                hit = static_cast<int>(j);
                sgn = v;
            }
            if (hit >= 0) {
                const auto j = static_cast<std::size_t>(hit);
                if (sgn > 0.0) {
                    box_hi[j] = found[j] ? std::min(box_hi[j], prog.fss->b_h[r])
                                         : prog.fss->b_h[r];
                    found[j] = 1;
                } else {
                    box_lo[j] = found[mdim + j] ? std::max(box_lo[j], -prog.fss->b_h[r])
                                                : -prog.fss->b_h[r];
                    found[mdim + j] = 1;
                }
            }
        }
        for (char f : found) have_box = have_box && f;
    }
    auto box_bound = [&](const Vector& d) {
        double s = 0.0;
        for (std::size_t j = 0; j < mdim; ++j) s += std::max(d[j] * box_lo[j], d[j] * box_hi[j]);
        return s;
    };

    Vector u(n, 0.0);
    Vector c(nc, 0.0);
    std::vector<MasterCut> master_cuts;

    // The cost matrix over (U, c) is flat along U for the worst-case
    // variant. A tiny ridge anchored at the previous step's plan keeps the
    // master strictly convex and breaks ties toward the incumbent plan
    // deterministically; it shifts the objective by at most
    // ridge * |U - anchor|^2, orders of magnitude below every tolerance in
    // use. The anchor is fixed for the whole call, so the cut loop solves
    // one well-defined program exactly.
    const double master_ridge = rampc ? 1e-8 : 0.0;
    const Vector anchor = pool.anchor.size() == n ? pool.anchor : Vector(n, 0.0);

    // per-coordinate magnitude inside the set bounds the support's
    // sensitivity to a direction change:
    //   |S(d') - S(d)| <= sum_j max(|lo_j|, |hi_j|) |d'_j - d_j|
    Vector lip(mdim, 0.0);
    for (std::size_t j = 0; j < mdim; ++j) {
        lip[j] = std::max(std::fabs(box_lo[j]), std::fabs(box_hi[j]));
    }

    // upper bound on the support value in the slot's current direction,
    // without an LP: cached value plus drift, or the coordinate box
    auto support_upper = [&](std::size_t slot, const Vector& d) {
        if (!have_box) return 1e300;
        const DirectionSlot& s = dirs[slot];
        double ub = box_bound(d);
        if (!s.cached_dir.empty()) {
            double drift = 0.0;
            for (std::size_t j = 0; j < d.size(); ++j) {
                drift += lip[j] * std::fabs(d[j] - s.cached_dir[j]);
            }
            ub = std::min(ub, s.value + drift);
        }
        return ub;
    };

    auto evaluate_exact = [&](std::size_t slot, Vector d) {
        DirectionSlot& s = dirs[slot];
        if (s.exact && !s.cached_dir.empty() && s.cached_dir == d) return;
        const auto clk = std::chrono::steady_clock::now();
        auto res = support_ctx.maximize(d);
        sol.support_ms += std::chrono::duration<double, std::milli>(
                              std::chrono::steady_clock::now() - clk)
                              .count();
        sol.lp_pivots += res.pivots;
        if (res.status == SolveStatus::Infeasible) {
            throw EmptySetError("feasible system set is empty during the control solve");
        }
        if (res.status != SolveStatus::Optimal) {
            throw SolverError("support evaluation failed: " +
                              std::string(to_string(res.status)));
        }
        s.value = res.value;
        s.exact = true;
        s.vertex = std::move(res.x);
        s.dual = std::move(res.dual);
        s.cached_dir = std::move(d);
    };

    // fixed quadratic data of the master over [U | c]
    const std::size_t nv = n + nc;
    Matrix master_p(nv, nv);
    Vector master_q(nv, 0.0);
    if (prog.input_weight > 0.0) {
        for (std::size_t k = 0; k < n; ++k) master_p(k, k) += 2.0 * prog.input_weight;
    }
    if (prog.input_rate_weight > 0.0) {
        const double w = prog.input_rate_weight;
        for (std::size_t k = 0; k < n; ++k) {
            master_p(k, k) += 2.0 * w * (k + 1 < n ? 2.0 : 1.0);
            if (k + 1 < n) {
                master_p(k, k + 1) += -2.0 * w;
                master_p(k + 1, k) += -2.0 * w;
            }
        }
        master_q[0] += -2.0 * w * prog.prev_input;
    }
    if (master_ridge > 0.0) {
        for (std::size_t k = 0; k < n; ++k) {
            master_p(k, k) += 2.0 * master_ridge;
            master_q[k] += -2.0 * master_ridge * anchor[k];
        }
    }
    if (rampc) {
        for (std::size_t j = 0; j < nc; ++j) master_p(n + j, n + j) += 2.0;
    } else {
        for (std::size_t j = 0; j < n; ++j) {
            const Vector g = cut_gradient(prog.plan, j, prog.h_center);
            const double bias = prog.y_des[j] -
                                kernels::dot(prog.plan.past[j].data(), prog.h_center.data(),
                                             prog.h_center.size());
            for (std::size_t a = 0; a < n; ++a) {
                for (std::size_t cc = 0; cc < n; ++cc) {
                    master_p(a, cc) += 2.0 * g[a] * g[cc];
                }
                master_q[a] += -2.0 * bias * g[a];
            }
        }
    }
    // fixed input rows, in the assembled-program order
    std::vector<Vector> input_rows;
    Vector input_rhs;
    input_rows.reserve(4 * n);
    for (std::size_t k = 0; k < n; ++k) {
        Vector r(nv, 0.0);
        r[k] = 1.0;
        input_rows.push_back(std::move(r));
        input_rhs.push_back(prog.u_max);
    }
    for (std::size_t k = 0; k < n; ++k) {
        Vector r(nv, 0.0);
        r[k] = -1.0;
        input_rows.push_back(std::move(r));
        input_rhs.push_back(prog.u_max);
    }
    for (std::size_t k = 0; k < n; ++k) {
        Vector r(nv, 0.0);
        r[k] = 1.0;
        if (k > 0) r[k - 1] = -1.0;
        input_rows.push_back(std::move(r));
        input_rhs.push_back(prog.du_max + (k == 0 ? prog.prev_input : 0.0));
    }
    for (std::size_t k = 0; k < n; ++k) {
        Vector r(nv, 0.0);
        r[k] = -1.0;
        if (k > 0) r[k - 1] = 1.0;
        input_rows.push_back(std::move(r));
        input_rhs.push_back(prog.du_max - (k == 0 ? prog.prev_input : 0.0));
    }

    // warm active set: valid input rows plus cuts still present in the pool
    std::vector<std::size_t> w_inputs;
    for (std::size_t r : pool.warm_inputs) {
        if (r < input_rows.size()) w_inputs.push_back(r);
    }
    std::vector<CutPool::ActiveCut> w_cuts = pool.warm_cuts;

    MasterResult master_res;
    int round = 0;
    for (;; ++round) {
        if (round >= cfg.cg_max_rounds) {
            sol.status = SolveStatus::IterationLimit;
            return sol;
        }
        // cut rows for the current pool
        master_cuts.clear();
        std::vector<Vector> cut_rows;
        Vector cut_rhs;
        std::vector<std::size_t> cut_start(prog.rows.size(), 0);
        for (std::size_t k = 0; k < prog.rows.size(); ++k) {
            const auto& row = prog.rows[k];
            const std::size_t idx = static_cast<std::size_t>(row.pred_index);
            cut_start[k] = master_cuts.size();
            const auto& list = pool.per_row[k];
            for (std::size_t vi = 0; vi < list.size(); ++vi) {
                const Vector& v = list[vi];
                const Vector g = cut_gradient(prog.plan, idx, v);
                Vector coef(nv, 0.0);
                for (std::size_t a = 0; a < n; ++a) coef[a] = row.sign * g[a];
                if (row.c_index >= 0) coef[n + static_cast<std::size_t>(row.c_index)] = -1.0;
                const double past_term =
                    kernels::dot(prog.plan.past[idx].data(), v.data(), v.size());
                cut_rows.push_back(std::move(coef));
                cut_rhs.push_back(row.rhs_const - row.sign * past_term);
                master_cuts.push_back({k, vi});
            }
        }
        std::vector<std::size_t> wset = w_inputs;
        for (const auto& ac : w_cuts) {
            if (ac.row >= pool.per_row.size()) continue;
            const auto& list = pool.per_row[ac.row];
            for (std::size_t vi = 0; vi < list.size(); ++vi) {
                if (list[vi] == ac.vertex) {
                    wset.push_back(input_rows.size() + cut_start[ac.row] + vi);
                    break;
                }
            }
        }

        const auto clk_master = std::chrono::steady_clock::now();
        master_res = solve_master(master_p, master_q, input_rows, input_rhs, cut_rows,
                                  cut_rhs, wset, cfg.qp, sol.master_fallbacks);
        sol.master_ms += std::chrono::duration<double, std::milli>(
                             std::chrono::steady_clock::now() - clk_master)
                             .count();
        sol.qp_iterations += master_res.iterations;
        if (master_res.status == SolveStatus::Infeasible) {
            sol.status = SolveStatus::Infeasible;
            sol.cg_rounds = round + 1;
            return sol;
        }
        if (master_res.status != SolveStatus::Optimal) {
            sol.status = master_res.status;
            sol.cg_rounds = round + 1;
            return sol;
        }
        // remember the active set for the next round and the next step
        w_inputs.clear();
        w_cuts.clear();
        for (std::size_t r : wset) {
            if (r < input_rows.size()) {
                w_inputs.push_back(r);
            } else {
                const MasterCut& mc = master_cuts[r - input_rows.size()];
                w_cuts.push_back({mc.row_index, pool.per_row[mc.row_index][mc.vertex_index]});
            }
        }
        std::copy(master_res.x.begin(), master_res.x.begin() + n, u.begin());
        for (std::size_t j = 0; j < nc; ++j) c[j] = master_res.x[n + j];

        // check every robust row at the new inputs; solve a support LP only
        // when the drift/box certificate cannot already discharge the row.
        // LPs run grouped by sign and ascending index: neighbouring
        // directions share most of their optimal basis, which keeps the
        // warm pivot counts low.
        std::vector<Vector> d_now(dirs.size());
        auto direction_at = [&](std::size_t slot) -> const Vector& {
            if (d_now[slot].empty()) {
                Vector d = prog.plan.eval(slot / 2, u);
                if (slot % 2) {
                    for (auto& v : d) v = -v;
                }
                d_now[slot] = std::move(d);
            }
            return d_now[slot];
        };
        std::vector<char> must(dirs.size(), 0);
        for (const auto& row : prog.rows) {
            const double rhs =
                row.rhs_const + (row.c_index >= 0 ? c[static_cast<std::size_t>(row.c_index)]
                                                  : 0.0);
            const std::size_t slot = slot_of(row);
            if (!must[slot] && support_upper(slot, direction_at(slot)) > rhs) must[slot] = 1;
        }
        for (std::size_t sgn = 0; sgn < 2; ++sgn) {
            for (std::size_t idx = 0; idx < n_dirs; ++idx) {
                const std::size_t slot = 2 * idx + sgn;
                if (must[slot]) evaluate_exact(slot, direction_at(slot));
            }
        }
        bool violated = false;
        for (std::size_t k = 0; k < prog.rows.size(); ++k) {
            const auto& row = prog.rows[k];
            const double rhs =
                row.rhs_const + (row.c_index >= 0 ? c[static_cast<std::size_t>(row.c_index)]
                                                  : 0.0);
            const std::size_t slot = slot_of(row);
            if (!must[slot]) continue;
            const DirectionSlot& s = dirs[slot];
            if (s.value > rhs + cfg.cg_tol) {
                violated = true;
                auto& list = pool.per_row[k];
                bool dup = false;
                for (const auto& v : list) {
                    double diff = 0.0;
                    for (std::size_t j = 0; j < v.size(); ++j) {
                        diff = std::max(diff, std::fabs(v[j] - s.vertex[j]));
                    }
                    if (diff < 1e-12) {
                        dup = true;
                        break;
                    }
                }
                if (!dup) {
                    if (list.size() >= static_cast<std::size_t>(cfg.cut_pool_per_row)) {
                        // evict the oldest vertex that is not in the warm set;
                        // losing an active cut would wreck the next warm start
                        std::size_t evict = list.size();
                        for (std::size_t vi = 0; vi < list.size(); ++vi) {
                            bool warm = false;
                            for (const auto& ac : w_cuts) {
                                if (ac.row == k && ac.vertex == list[vi]) {
                                    warm = true;
                                    break;
                                }
                            }
                            if (!warm) {
                                evict = vi;
                                break;
                            }
                        }
                        if (evict < list.size()) {
                            list.erase(list.begin() + static_cast<long>(evict));
                        }
                    }
                    list.push_back(s.vertex);
                }
            }
        }
        if (!violated) break;
    }
    pool.anchor = u;
    pool.warm_inputs = w_inputs;
    pool.warm_cuts = w_cuts;

    // exact values at the final inputs where the reports or the audit need them
    auto exact_at_final = [&](std::size_t slot) {
        Vector d = prog.plan.eval(slot / 2, u);
        if (slot % 2) {
            for (auto& v : d) v = -v;
        }
        evaluate_exact(slot, std::move(d));
    };
    if (!rampc) {
        for (std::size_t sgn = 0; sgn < 2; ++sgn) {
            for (std::size_t j = 0; j < n; ++j) exact_at_final(2 * j + sgn);
        }
    }
    if (cfg.audit_qp) {
        for (std::size_t sgn = 0; sgn < 2; ++sgn) {
            for (std::size_t idx = 0; idx < n_dirs; ++idx) {
                for (const auto& row : prog.rows) {
                    const std::size_t slot = slot_of(row);
                    if (slot == 2 * idx + sgn) exact_at_final(slot);
                }
            }
        }
    }

    sol.status = SolveStatus::Optimal;
    sol.cg_rounds = round + 1;
    sol.u = u;
    sol.cost_bounds.assign(n, 0.0);
    if (rampc) {
        sol.cost_bounds = c;
    } else {
        for (std::size_t j = 0; j < n; ++j) {
            const double hi = dirs[2 * j].value - prog.y_des[j];
            const double lo = prog.y_des[j] + dirs[2 * j + 1].value;
            sol.cost_bounds[j] = std::max(hi, lo);
        }
        double nominal = 0.0;
        for (std::size_t j = 0; j < n; ++j) {
            const Vector phi = prog.plan.eval(j, u);
            const double dev =
                prog.y_des[j] -
                kernels::dot(phi.data(), prog.h_center.data(), prog.h_center.size());
            nominal += dev * dev;
        }
        sol.nominal_cost = nominal;
    }
    sol.worst_case_cost = kernels::sum_sq(sol.cost_bounds.data(), sol.cost_bounds.size());

    if (cfg.audit_qp) {
        // reconstitute the full primal/dual point of the assembled program
        AssembledQp big = assemble(prog);
        const std::size_t p = big.facets;
        Vector x(big.qp.num_vars(), 0.0);
        std::copy(u.begin(), u.end(), x.begin());
        for (std::size_t j = 0; j < nc; ++j) x[n + j] = c[j];
        Vector dual_ineq(big.qp.b_ineq.size(), 0.0);
        Vector dual_eq(big.qp.b_eq.size(), 0.0);
        for (std::size_t k = 0; k < 4 * n; ++k) dual_ineq[k] = master_res.dual[k];

        Vector lambda(prog.rows.size(), 0.0);  // budget-row multipliers
        std::vector<Vector> nu(prog.rows.size(), Vector(prog.plan.past[0].size(), 0.0));
        for (std::size_t mc = 0; mc < master_cuts.size(); ++mc) {
            const double beta = master_res.dual[4 * n + mc];
            if (beta == 0.0) continue;
            const auto& cut = master_cuts[mc];
            lambda[cut.row_index] += beta;
            const Vector& v = pool.per_row[cut.row_index][cut.vertex_index];
            for (std::size_t j = 0; j < v.size(); ++j) nu[cut.row_index][j] -= beta * v[j];
        }
        for (std::size_t k = 0; k < prog.rows.size(); ++k) {
            const std::size_t theta_at = big.theta_offset(k);
            const Vector& theta = dirs[slot_of(prog.rows[k])].dual;
            for (std::size_t i = 0; i < p; ++i) x[theta_at + i] = std::max(0.0, theta[i]);
            const std::size_t brow = big.budget_row(k);
            dual_ineq[brow] = lambda[k];
            //  sign rows: mu = lambda b_h + A_h nu  (stationarity of theta)
            for (std::size_t i = 0; i < p; ++i) {
                double mu = lambda[k] * prog.fss->b_h[i];
                mu += kernels::dot(prog.fss->a_h.row(i), nu[k].data(), nu[k].size());
                dual_ineq[brow + 1 + i] = mu;
            }
            const std::size_t m = nu[k].size();
            for (std::size_t j = 0; j < m; ++j) dual_eq[k * m + j] = nu[k][j];
        }
        sol.audit_kkt = qp_kkt_residual(big.qp, x, dual_ineq, dual_eq);
    }
    return sol;
}

} // namespace rampc
