#include "rampc/solver.hpp"

#include "rampc/errors.hpp"
#include "rampc/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <utility>

namespace rampc {

namespace {

constexpr double kEnterTol = 1e-9;   // reduced-cost threshold
constexpr double kRatioTol = 1e-9;   // pivot eligibility threshold
constexpr double kSkipTol = 1e-12;   // leave rows with tiny column entries alone
constexpr long kArtificial = -1;

} // namespace

const char* to_string(SolveStatus s) {
    switch (s) {
    case SolveStatus::Optimal: return "optimal";
    case SolveStatus::Infeasible: return "infeasible";
    case SolveStatus::Unbounded: return "unbounded";
    case SolveStatus::IterationLimit: return "max-iterations";
    }
    return "?";
}

// The tableau is the standard dictionary of
//   maximize c_s^T xs  s.t.  [A, -A] xs <= b, xs >= 0
// over split variables xs (x = xs_head - xs_tail), with one artificial
// column used by phase 1 exactly as in the classic two-phase scheme. Row
// nrows_ carries the phase-2 objective, row nrows_ + 1 the phase-1 one.

SimplexContext::SimplexContext(const Matrix& rows, const Vector& rhs, long max_pivots)
    : nvars_(rows.cols()),
      n_(2 * rows.cols()),
      nrows_(rows.rows()),
      stride_(2 * rows.cols() + 2),
      max_pivots_(max_pivots) {
    tab_.assign((nrows_ + 2) * stride_, 0.0);
    basic_.resize(nrows_);
    nonbasic_.resize(n_ + 1);
    for (std::size_t i = 0; i < nrows_; ++i) {
        double* r = tab_.data() + i * stride_;
        for (std::size_t j = 0; j < nvars_; ++j) {
            r[j] = rows(i, j);
            r[j + nvars_] = -rows(i, j);
        }
        r[n_] = -1.0;  // artificial
        r[n_ + 1] = rhs[i];
        basic_[i] = static_cast<long>(n_ + i);
    }
    for (std::size_t j = 0; j < n_; ++j) nonbasic_[j] = static_cast<long>(j);
    nonbasic_[n_] = kArtificial;
    tab_[(nrows_ + 1) * stride_ + n_] = 1.0;  // phase-1 objective: max -artificial
}

void SimplexContext::pivot(std::size_t r, std::size_t s) {
    kernels::pivot_update(tab_.data(), nrows_ + 2, n_ + 2, stride_, r, s, kSkipTol);
    std::swap(basic_[r], nonbasic_[s]);
}

bool SimplexContext::run(std::size_t obj_row, bool skip_artificial, long& pivots) {
    const double* obj = tab_.data() + obj_row * stride_;
    for (;;) {
        // entering column: most negative reduced cost, ties by label
        std::size_t s = n_ + 1;
        for (std::size_t j = 0; j <= n_; ++j) {
            if (skip_artificial && nonbasic_[j] == kArtificial) continue;
            if (s > n_ || std::make_pair(obj[j], nonbasic_[j]) <
                              std::make_pair(obj[s], nonbasic_[s])) {
                s = j;
            }
        }
        if (s > n_ || obj[s] >= -kEnterTol) return true;

        // leaving row: smallest ratio, ties by label
        std::size_t r = nrows_;
        double best_ratio = 0.0;
        for (std::size_t i = 0; i < nrows_; ++i) {
            const double a = tab_[i * stride_ + s];
            if (a <= kRatioTol) continue;
            const double ratio = tab_[i * stride_ + n_ + 1] / a;
            if (r == nrows_ || std::make_pair(ratio, basic_[i]) <
                                   std::make_pair(best_ratio, basic_[r])) {
                r = i;
                best_ratio = ratio;
            }
        }
        if (r == nrows_) return false;  // unbounded in this objective
        if (pivots >= max_pivots_) throw SolverError("simplex pivot limit reached");
        pivot(r, s);
        ++pivots;
    }
}

bool SimplexContext::phase1(long& pivots) {
    phase1_done_ = true;
    std::size_t r = 0;
    for (std::size_t i = 1; i < nrows_; ++i) {
        if (tab_[i * stride_ + n_ + 1] < tab_[r * stride_ + n_ + 1]) r = i;
    }
    if (nrows_ == 0 || tab_[r * stride_ + n_ + 1] >= -feas_tol) {
        feasible_ = true;
        infeas_ = 0.0;
        return true;
    }
    pivot(r, n_);
    ++pivots;
    run(nrows_ + 1, false, pivots);
    infeas_ = std::max(0.0, -tab_[(nrows_ + 1) * stride_ + n_ + 1]);
    if (infeas_ > feas_tol) {
        feasible_ = false;
        return false;
    }
    // drive the artificial out of the basis if it settled there at level ~0
    for (std::size_t i = 0; i < nrows_; ++i) {
        if (basic_[i] != kArtificial) continue;
        std::size_t s = n_ + 1;
        double best = 0.0;
        for (std::size_t j = 0; j < n_; ++j) {
            const double a = std::fabs(tab_[i * stride_ + j]);
            if (a > best + 1e-30 && a > kRatioTol) {
                best = a;
                s = j;
            }
        }
        if (s <= n_) {
            pivot(i, s);
            ++pivots;
        }
        // an all-zero row is redundant; the artificial stays basic at zero
        break;
    }
    feasible_ = true;
    return true;
}

bool SimplexContext::feasible() {
    if (!phase1_done_) {
        long pivots = 0;
        phase1(pivots);
    }
    return feasible_;
}

double SimplexContext::infeasibility() const { return infeas_; }

void SimplexContext::set_objective(const Vector& direction) {
    double* obj = tab_.data() + nrows_ * stride_;
    std::fill(obj, obj + n_ + 2, 0.0);
    auto split_cost = [&](long label) -> double {
        if (label < 0 || label >= static_cast<long>(n_)) return 0.0;
        const std::size_t v = static_cast<std::size_t>(label);
        return v < nvars_ ? direction[v] : -direction[v - nvars_];
    };
    for (std::size_t j = 0; j <= n_; ++j) obj[j] = -split_cost(nonbasic_[j]);
    for (std::size_t i = 0; i < nrows_; ++i) {
        const double cb = split_cost(basic_[i]);
        if (cb != 0.0) kernels::axpy(cb, tab_.data() + i * stride_, obj, n_ + 2);
    }
}

SimplexContext::MaxResult SimplexContext::maximize(const Vector& direction) {
    MaxResult res;
    res.x.assign(nvars_, 0.0);
    res.dual.assign(nrows_, 0.0);
    long pivots = 0;
    try {
        if (!phase1_done_) phase1(pivots);
        if (!feasible_) {
            res.status = SolveStatus::Infeasible;
            return res;
        }
        set_objective(direction);
        const bool bounded = run(nrows_, true, pivots);
        res.pivots = pivots;
        if (!bounded) {
            res.status = SolveStatus::Unbounded;
            return res;
        }
    } catch (const SolverError&) {
        res.status = SolveStatus::IterationLimit;
        res.pivots = pivots;
        return res;
    }
    res.status = SolveStatus::Optimal;
    res.value = tab_[nrows_ * stride_ + n_ + 1];
    for (std::size_t i = 0; i < nrows_; ++i) {
        const long label = basic_[i];
        if (label >= 0 && label < static_cast<long>(n_)) {
            const std::size_t v = static_cast<std::size_t>(label);
            const double val = tab_[i * stride_ + n_ + 1];
            if (v < nvars_) {
                res.x[v] += val;
            } else {
                res.x[v - nvars_] -= val;
            }
        }
    }
    const double* obj = tab_.data() + nrows_ * stride_;
    for (std::size_t j = 0; j <= n_; ++j) {
        const long label = nonbasic_[j];
        if (label >= static_cast<long>(n_)) {
            res.dual[static_cast<std::size_t>(label) - n_] = obj[j];
        }
    }
    return res;
}

namespace {

double lp_kkt_residual(const LinearProgram& lp, const SolveResult& res) {
    const std::size_t mi = lp.b_ineq.size();
    const std::size_t me = lp.b_eq.size();
    double r = 0.0;
    for (std::size_t i = 0; i < mi; ++i) {
        r = std::max(r, kernels::dot(lp.a_ineq.row(i), res.x.data(), res.x.size()) -
                            lp.b_ineq[i]);
        r = std::max(r, -res.dual_ineq[i]);
    }
    for (std::size_t i = 0; i < me; ++i) {
        r = std::max(r, std::fabs(kernels::dot(lp.a_eq.row(i), res.x.data(), res.x.size()) -
                                  lp.b_eq[i]));
    }
    // stationarity for free variables: A_i^T y_i + A_e^T y_e = c
    Vector grad(lp.c.size(), 0.0);
    for (std::size_t i = 0; i < mi; ++i) {
        kernels::axpy(res.dual_ineq[i], lp.a_ineq.row(i), grad.data(), grad.size());
    }
    for (std::size_t i = 0; i < me; ++i) {
        kernels::axpy(res.dual_eq[i], lp.a_eq.row(i), grad.data(), grad.size());
    }
    for (std::size_t j = 0; j < grad.size(); ++j) {
        r = std::max(r, std::fabs(grad[j] - lp.c[j]));
    }
    // duality gap, normalized
    double dual_obj = 0.0;
    for (std::size_t i = 0; i < mi; ++i) dual_obj += res.dual_ineq[i] * lp.b_ineq[i];
    for (std::size_t i = 0; i < me; ++i) dual_obj += res.dual_eq[i] * lp.b_eq[i];
    r = std::max(r, std::fabs(dual_obj - res.objective) / (1.0 + std::fabs(res.objective)));
    return r;
}

} // namespace

SolveResult solve_lp(const LinearProgram& lp, const SolverOptions& opts) {
    const std::size_t nv = lp.c.size();
    const std::size_t mi = lp.b_ineq.size();
    const std::size_t me = lp.b_eq.size();
    Matrix rows(mi + 2 * me, nv);
    Vector rhs(mi + 2 * me, 0.0);
    for (std::size_t i = 0; i < mi; ++i) {
        for (std::size_t j = 0; j < nv; ++j) rows(i, j) = lp.a_ineq(i, j);
        rhs[i] = lp.b_ineq[i];
    }
    for (std::size_t i = 0; i < me; ++i) {
        for (std::size_t j = 0; j < nv; ++j) {
            rows(mi + i, j) = lp.a_eq(i, j);
            rows(mi + me + i, j) = -lp.a_eq(i, j);
        }
        rhs[mi + i] = lp.b_eq[i];
        rhs[mi + me + i] = -lp.b_eq[i];
    }

    SimplexContext ctx(rows, rhs, opts.max_iterations);
    auto mr = ctx.maximize(lp.c);

    SolveResult res;
    res.status = mr.status;
    res.iterations = mr.pivots;
    res.x = std::move(mr.x);
    res.objective = mr.value;
    res.dual_ineq.assign(mi, 0.0);
    res.dual_eq.assign(me, 0.0);
    for (std::size_t i = 0; i < mi; ++i) res.dual_ineq[i] = mr.dual[i];
    for (std::size_t i = 0; i < me; ++i) res.dual_eq[i] = mr.dual[mi + i] - mr.dual[mi + me + i];
    if (res.status == SolveStatus::Optimal) {
        res.kkt_residual = lp_kkt_residual(lp, res);
        if (res.kkt_residual > opts.tol) {
            // numerically unreliable optimum is reported as an error status
            res.status = SolveStatus::IterationLimit;
        }
    }
    return res;
}

} // namespace rampc
