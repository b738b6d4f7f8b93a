#include "rampc/solver.hpp"

#include "rampc/errors.hpp"
#include "rampc/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

// Dual active-set method of Goldfarb and Idnani for strictly convex dense
// programs, wrapped in a proximal loop so positive-semidefinite cost
// matrices are handled as well: each pass solves the program with a small
// ridge anchored at the previous iterate, whose fixed point is an exact
// minimizer of the original program.

namespace rampc {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

struct GiWorkspace {
    std::size_t n = 0;
    Matrix chol;  // lower-triangular factor of the (possibly ridged) cost
    Matrix j;     // J = L^-T, rotated as constraints enter and leave
    Matrix r;     // upper-triangular factor over the active set
    std::vector<long> active;
    Vector u;  // multipliers in active-set order
    Vector d, z, rstep, np;
};

bool cholesky(const Matrix& g, Matrix& l) {
    const std::size_t n = g.rows();
    l = Matrix(n, n);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t jj = 0; jj <= i; ++jj) {
            double s = g(i, jj);
            for (std::size_t k = 0; k < jj; ++k) s -= l(i, k) * l(jj, k);
            if (i == jj) {
                if (s <= 0.0) return false;
                l(i, i) = std::sqrt(s);
            } else {
                l(i, jj) = s / l(jj, jj);
            }
        }
    }
    return true;
}

void chol_solve(const Matrix& l, Vector& b) {
    const std::size_t n = l.rows();
    for (std::size_t i = 0; i < n; ++i) {
        double s = b[i];
        for (std::size_t k = 0; k < i; ++k) s -= l(i, k) * b[k];
        b[i] = s / l(i, i);
    }
    for (std::size_t ii = n; ii-- > 0;) {
        double s = b[ii];
        for (std::size_t k = ii + 1; k < n; ++k) s -= l(k, ii) * b[k];
        b[ii] = s / l(ii, ii);
    }
}

double distance(double a, double b) {
    const double a1 = std::fabs(a), b1 = std::fabs(b);
    if (a1 > b1) {
        const double t = b1 / a1;
        return a1 * std::sqrt(1.0 + t * t);
    }
    if (b1 > a1) {
        const double t = a1 / b1;
        return b1 * std::sqrt(1.0 + t * t);
    }
    return a1 * std::sqrt(2.0);
}

// d = J^T np
void compute_d(GiWorkspace& w) {
    for (std::size_t i = 0; i < w.n; ++i) {
        double s = 0.0;
        for (std::size_t k = 0; k < w.n; ++k) s += w.j(k, i) * w.np[k];
        w.d[i] = s;
    }
}

// z = J_2 d_2
void update_z(GiWorkspace& w, std::size_t iq) {
    for (std::size_t k = 0; k < w.n; ++k) {
        double s = 0.0;
        for (std::size_t jj = iq; jj < w.n; ++jj) s += w.j(k, jj) * w.d[jj];
        w.z[k] = s;
    }
}

// r = R^-1 d_1
void update_r(GiWorkspace& w, std::size_t iq) {
    for (std::size_t ii = iq; ii-- > 0;) {
        double s = w.d[ii];
        for (std::size_t k = ii + 1; k < iq; ++k) s -= w.r(ii, k) * w.rstep[k];
        w.rstep[ii] = s / w.r(ii, ii);
    }
}

bool add_constraint(GiWorkspace& w, std::size_t& iq, double& r_norm) {
    const std::size_t n = w.n;
    for (std::size_t jj = n - 1; jj >= iq + 1; --jj) {
        double cc = w.d[jj - 1];
        double ss = w.d[jj];
        const double h = distance(cc, ss);
        if (h == 0.0) continue;
        w.d[jj] = 0.0;
        ss /= h;
        cc /= h;
        if (cc < 0.0) {
            cc = -cc;
            ss = -ss;
            w.d[jj - 1] = -h;
        } else {
            w.d[jj - 1] = h;
        }
        const double xny = ss / (1.0 + cc);
        for (std::size_t k = 0; k < n; ++k) {
            const double t1 = w.j(k, jj - 1);
            const double t2 = w.j(k, jj);
            w.j(k, jj - 1) = t1 * cc + t2 * ss;
            w.j(k, jj) = xny * (t1 + w.j(k, jj - 1)) - t2;
        }
        if (jj == iq + 1) break;
    }
    ++iq;
    for (std::size_t ii = 0; ii < iq; ++ii) w.r(ii, iq - 1) = w.d[ii];
    const double diag = std::fabs(w.d[iq - 1]);
    r_norm = std::max(r_norm, diag);
    return diag > std::numeric_limits<double>::epsilon() * r_norm * 64.0;
}

void delete_constraint(GiWorkspace& w, std::size_t& iq, std::size_t n_eq, long label) {
    const std::size_t n = w.n;
    std::size_t qq = iq;
    for (std::size_t ii = n_eq; ii < iq; ++ii) {
        if (w.active[ii] == label) {
            qq = ii;
            break;
        }
    }
    for (std::size_t ii = qq; ii + 1 < iq; ++ii) {
        w.active[ii] = w.active[ii + 1];
        w.u[ii] = w.u[ii + 1];
        for (std::size_t k = 0; k < n; ++k) w.r(k, ii) = w.r(k, ii + 1);
    }
    w.active[iq - 1] = 0;
    w.u[iq - 1] = 0.0;
    for (std::size_t k = 0; k < iq; ++k) w.r(k, iq - 1) = 0.0;
    --iq;
    if (iq == 0) return;
    for (std::size_t jj = qq; jj < iq; ++jj) {
        double cc = w.r(jj, jj);
        double ss = w.r(jj + 1, jj);
        const double h = distance(cc, ss);
        if (h == 0.0) continue;
        cc /= h;
        ss /= h;
        w.r(jj + 1, jj) = 0.0;
        if (cc < 0.0) {
            w.r(jj, jj) = -h;
            cc = -cc;
            ss = -ss;
        } else {
            w.r(jj, jj) = h;
        }
        const double xny = ss / (1.0 + cc);
        for (std::size_t k = jj + 1; k < iq; ++k) {
            const double t1 = w.r(jj, k);
            const double t2 = w.r(jj + 1, k);
            w.r(jj, k) = t1 * cc + t2 * ss;
            w.r(jj + 1, k) = xny * (t1 + w.r(jj, k)) - t2;
        }
        for (std::size_t k = 0; k < n; ++k) {
            const double t1 = w.j(k, jj);
            const double t2 = w.j(k, jj + 1);
            w.j(k, jj) = t1 * cc + t2 * ss;
            w.j(k, jj + 1) = xny * (t1 + w.j(k, jj)) - t2;
        }
    }
}

struct GiResult {
    SolveStatus status;
    Vector x;
    Vector u;             // multipliers, active-set order
    std::vector<long> active;
    std::size_t n_active = 0;
    long iterations = 0;
};

// minimize 0.5 x^T G x + g0^T x  s.t.  eq rows: a x = b, ineq rows: a x <= b.
// G must be positive definite.
GiResult goldfarb_idnani(const Matrix& g, const Vector& g0, const Matrix& a_eq,
                         const Vector& b_eq, const Matrix& a_in, const Vector& b_in,
                         long max_iter) {
    const std::size_t n = g.rows();
    const std::size_t me = a_eq.rows();
    const std::size_t mi = a_in.rows();

    GiResult res;
    res.status = SolveStatus::IterationLimit;

    GiWorkspace w;
    w.n = n;
    if (!cholesky(g, w.chol)) throw SolverError("cost matrix factorization failed");
    // J = L^-T
    w.j = Matrix(n, n);
    for (std::size_t i = 0; i < n; ++i) {
        Vector e(n, 0.0);
        e[i] = 1.0;
        // solve L^T col = e  (forward on L^T means backward on L)
        for (std::size_t ii = n; ii-- > 0;) {
            double s = e[ii];
            for (std::size_t k = ii + 1; k < n; ++k) s -= w.chol(k, ii) * e[k];
            e[ii] = s / w.chol(ii, ii);
        }
        for (std::size_t k = 0; k < n; ++k) w.j(k, i) = e[k];
    }
    w.r = Matrix(n, n);
    w.active.assign(n + 1, 0);
    w.u.assign(n + 1, 0.0);
    w.d.assign(n, 0.0);
    w.z.assign(n, 0.0);
    w.rstep.assign(n + 1, 0.0);
    w.np.assign(n, 0.0);

    Vector x(n);
    for (std::size_t i = 0; i < n; ++i) x[i] = -g0[i];
    chol_solve(w.chol, x);

    std::size_t iq = 0;
    double r_norm = 1.0;
    long iters = 0;
    const double feas_eps = 1e-10;

    // equality constraints first; they never leave the active set
    for (std::size_t i = 0; i < me; ++i) {
        for (std::size_t k = 0; k < n; ++k) w.np[k] = a_eq(i, k);
        compute_d(w);
        update_z(w, iq);
        update_r(w, iq);
        const double znp = kernels::dot(w.z.data(), w.np.data(), n);
        const double resid = kernels::dot(w.np.data(), x.data(), n) - b_eq[i];
        double t2 = 0.0;
        if (std::fabs(znp) > 1e-14 * (1.0 + row_norm(a_eq, i))) t2 = -resid / znp;
        for (std::size_t k = 0; k < n; ++k) x[k] += t2 * w.z[k];
        w.u[iq] = t2;
        for (std::size_t k = 0; k < iq; ++k) w.u[k] -= t2 * w.rstep[k];
        if (!add_constraint(w, iq, r_norm)) {
            // linearly dependent row: fine when consistent, fatal otherwise
            const double resid2 = kernels::dot(w.np.data(), x.data(), n) - b_eq[i];
            --iq;  // roll back the attempted factor extension
            for (std::size_t ii = 0; ii <= iq && ii < n; ++ii) w.r(ii, iq) = 0.0;
            w.u[iq] = 0.0;
            if (std::fabs(resid2) > 1e-7 * (1.0 + std::fabs(b_eq[i]))) {
                res.status = SolveStatus::Infeasible;
                res.iterations = iters;
                return res;
            }
            continue;
        }
        w.active[iq - 1] = -(static_cast<long>(i)) - 1;  // negative labels: equalities
    }
    const std::size_t n_eq_active = iq;

    std::vector<char> in_active(mi, 0);
    for (;;) {
        if (++iters > max_iter) {
            res.status = SolveStatus::IterationLimit;
            res.iterations = iters;
            return res;
        }
        // most violated inactive inequality
        long ip = -1;
        double worst = -feas_eps;
        for (std::size_t i = 0; i < mi; ++i) {
            if (in_active[i]) continue;
            const double s = b_in[i] - kernels::dot(a_in.row(i), x.data(), n);
            if (s < worst) {
                worst = s;
                ip = static_cast<long>(i);
            }
        }
        if (ip < 0) {
            res.status = SolveStatus::Optimal;
            res.x = std::move(x);
            res.u.assign(w.u.begin(), w.u.begin() + iq);
            res.active.assign(w.active.begin(), w.active.begin() + iq);
            res.n_active = iq;
            res.iterations = iters;
            return res;
        }
        for (std::size_t k = 0; k < n; ++k) w.np[k] = -a_in(static_cast<std::size_t>(ip), k);
        double u_ip = 0.0;
        double s_ip = worst;  // np^T x + b0 with b0 = b_in[ip]

        for (;;) {
            if (++iters > max_iter) {
                res.status = SolveStatus::IterationLimit;
                res.iterations = iters;
                return res;
            }
            compute_d(w);
            update_z(w, iq);
            update_r(w, iq);

            double t1 = kInf;
            long drop = 0;
            for (std::size_t k = n_eq_active; k < iq; ++k) {
                if (w.rstep[k] > 1e-14 && w.u[k] / w.rstep[k] < t1) {
                    t1 = w.u[k] / w.rstep[k];
                    drop = w.active[k];
                }
            }
            const double znp = kernels::dot(w.z.data(), w.np.data(), n);
            double t2 = kInf;
            const double zz = kernels::sum_sq(w.z.data(), n);
            if (zz > 1e-26) t2 = -s_ip / znp;
            const double t = std::min(t1, t2);

            if (t >= kInf) {
                res.status = SolveStatus::Infeasible;
                res.iterations = iters;
                return res;
            }
            if (t2 >= kInf) {
                // dual step only
                for (std::size_t k = 0; k < iq; ++k) w.u[k] -= t * w.rstep[k];
                u_ip += t;
                in_active[static_cast<std::size_t>(drop)] = 0;
                delete_constraint(w, iq, n_eq_active, drop);
                continue;
            }
            for (std::size_t k = 0; k < n; ++k) x[k] += t * w.z[k];
            for (std::size_t k = 0; k < iq; ++k) w.u[k] -= t * w.rstep[k];
            u_ip += t;
            s_ip = b_in[static_cast<std::size_t>(ip)] -
                   kernels::dot(a_in.row(static_cast<std::size_t>(ip)), x.data(), n);
            if (t == t2) {
                // full step: ip becomes active
                w.u[iq] = u_ip;
                if (!add_constraint(w, iq, r_norm)) {
                    throw SolverError("active-set factor update lost rank");
                }
                w.active[iq - 1] = ip;
                in_active[static_cast<std::size_t>(ip)] = 1;
                break;
            }
            // partial step: drop the blocking constraint and retry
            in_active[static_cast<std::size_t>(drop)] = 0;
            delete_constraint(w, iq, n_eq_active, drop);
        }
    }
}

struct DenseQp {
    Matrix p;
    Vector q;
    Matrix a_in;
    Vector b_in;
    Matrix a_eq;
    Vector b_eq;
};

DenseQp densify(const QuadraticProgram& qp) {
    const std::size_t n = qp.num_vars();
    if (n == 0) throw std::invalid_argument("quadratic program has no variables");
    if (n > 4000 || qp.a_ineq.rows + qp.a_eq.rows > 40000) {
        throw SolverError("problem too large for the dense quadratic solver");
    }
    DenseQp d;
    d.p = qp.p.rows ? qp.p.to_dense() : Matrix(n, n);
    d.q = qp.q;
    d.a_in = qp.a_ineq.rows ? qp.a_ineq.to_dense() : Matrix(0, n);
    d.b_in = qp.b_ineq;
    d.a_eq = qp.a_eq.rows ? qp.a_eq.to_dense() : Matrix(0, n);
    d.b_eq = qp.b_eq;
    if (d.p.rows() != n || d.p.cols() != n) {
        throw std::invalid_argument("cost matrix dimension mismatch");
    }
    if (d.a_in.rows() != d.b_in.size() || d.a_eq.rows() != d.b_eq.size()) {
        throw std::invalid_argument("constraint dimension mismatch");
    }
    return d;
}

void validate_cost(const Matrix& p) {
    const std::size_t n = p.rows();
    double scale = 0.0;
    for (std::size_t i = 0; i < n * n; ++i) scale = std::max(scale, std::fabs(p.data()[i]));
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t jj = i + 1; jj < n; ++jj) {
            if (std::fabs(p(i, jj) - p(jj, i)) > 1e-10 * (1.0 + scale)) {
                throw std::invalid_argument("cost matrix is not symmetric");
            }
        }
    }
    Matrix shifted = p;
    const double delta = 1e-10 * (1.0 + scale);
    for (std::size_t i = 0; i < n; ++i) shifted(i, i) += delta;
    Matrix l;
    if (!cholesky(shifted, l)) {
        throw std::invalid_argument("cost matrix is not positive semidefinite");
    }
}

} // namespace

QuadraticProgram make_qp(const Matrix& p, const Vector& q,
                         const Matrix& a_ineq, const Vector& b_ineq,
                         const Matrix& a_eq, const Vector& b_eq) {
    QuadraticProgram qp;
    qp.p = SparseMatrix::from_dense(p);
    qp.q = q;
    qp.a_ineq = a_ineq.empty() ? SparseMatrix{0, q.size(), {0}, {}, {}}
                               : SparseMatrix::from_dense(a_ineq);
    qp.a_ineq.cols = q.size();
    qp.b_ineq = b_ineq;
    qp.a_eq = a_eq.empty() ? SparseMatrix{0, q.size(), {0}, {}, {}}
                           : SparseMatrix::from_dense(a_eq);
    qp.a_eq.cols = q.size();
    qp.b_eq = b_eq;
    return qp;
}

double qp_kkt_residual(const QuadraticProgram& qp, const Vector& x,
                       const Vector& dual_ineq, const Vector& dual_eq) {
    double r = 0.0;
    Vector grad = qp.p.multiply(x);
    for (std::size_t i = 0; i < grad.size(); ++i) grad[i] += qp.q[i];
    const Vector ax = qp.a_ineq.multiply(x);
    for (std::size_t i = 0; i < qp.b_ineq.size(); ++i) {
        const double slack = qp.b_ineq[i] - ax[i];
        r = std::max(r, -slack);                                // primal feasibility
        r = std::max(r, -dual_ineq[i]);                         // dual sign
        r = std::max(r, std::fabs(dual_ineq[i] * slack));       // complementarity
    }
    const Vector aex = qp.a_eq.multiply(x);
    for (std::size_t i = 0; i < qp.b_eq.size(); ++i) {
        r = std::max(r, std::fabs(aex[i] - qp.b_eq[i]));
    }
    const Vector gi = qp.a_ineq.multiply_t(dual_ineq);
    const Vector ge = qp.a_eq.multiply_t(dual_eq);
    for (std::size_t i = 0; i < grad.size(); ++i) {
        r = std::max(r, std::fabs(grad[i] + gi[i] + ge[i]));    // stationarity
    }
    return r;
}

SolveResult solve_qp(const QuadraticProgram& qp, const SolverOptions& opts) {
    DenseQp d = densify(qp);
    validate_cost(d.p);
    const std::size_t n = d.q.size();

    double scale = 1.0;
    for (std::size_t i = 0; i < n; ++i) scale = std::max(scale, std::fabs(d.p(i, i)));

    Matrix l;
    const bool strictly_convex = cholesky(d.p, l);
    const double ridge = strictly_convex ? 0.0 : 1e-7 * scale;

    SolveResult res;
    Vector anchor(n, 0.0);
    long total_iters = 0;
    const int max_passes = strictly_convex ? 1 : 30;
    GiResult gi;
    for (int pass = 0; pass < max_passes; ++pass) {
        Matrix g = d.p;
        Vector g0 = d.q;
        if (ridge > 0.0) {
            for (std::size_t i = 0; i < n; ++i) {
                g(i, i) += ridge;
                g0[i] -= ridge * anchor[i];
            }
        }
        try {
            gi = goldfarb_idnani(g, g0, d.a_eq, d.b_eq, d.a_in, d.b_in, opts.max_iterations);
        } catch (const SolverError&) {
            res.status = SolveStatus::IterationLimit;
            res.iterations = total_iters;
            return res;
        }
        total_iters += gi.iterations;
        if (gi.status != SolveStatus::Optimal) {
            res.status = gi.status;
            res.iterations = total_iters;
            return res;
        }
        double shift = 0.0;
        double mag = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            shift = std::max(shift, std::fabs(gi.x[i] - anchor[i]));
            mag = std::max(mag, std::fabs(gi.x[i]));
        }
        Vector step(n);
        for (std::size_t i = 0; i < n; ++i) step[i] = gi.x[i] - anchor[i];
        anchor = gi.x;
        if (shift <= 1e-11 * (1.0 + mag)) break;
        // a persistent proximal step along a cost-flat feasible ray is an
        // unboundedness certificate
        if (pass >= 2 && shift > 1e-3 * (1.0 + mag)) {
            const double nrm = std::sqrt(kernels::sum_sq(step.data(), n));
            for (std::size_t i = 0; i < n; ++i) step[i] /= nrm;
            const Vector pd = matvec(d.p, step);
            const Vector aid = d.a_in.rows() ? matvec(d.a_in, step) : Vector{};
            const Vector aed = d.a_eq.rows() ? matvec(d.a_eq, step) : Vector{};
            bool ray = norm_inf(pd) < 1e-9 &&
                       kernels::dot(d.q.data(), step.data(), n) < -1e-12;
            for (double v : aid) ray = ray && v <= 1e-9;
            for (double v : aed) ray = ray && std::fabs(v) <= 1e-9;
            if (ray) {
                res.status = SolveStatus::Unbounded;
                res.iterations = total_iters;
                return res;
            }
        }
    }

    res.status = SolveStatus::Optimal;
    res.x = gi.x;
    res.iterations = total_iters;
    res.dual_ineq.assign(d.b_in.size(), 0.0);
    res.dual_eq.assign(d.b_eq.size(), 0.0);
    for (std::size_t k = 0; k < gi.n_active; ++k) {
        const long label = gi.active[k];
        if (label >= 0) {
            res.dual_ineq[static_cast<std::size_t>(label)] = gi.u[k];
        } else {
            res.dual_eq[static_cast<std::size_t>(-label - 1)] = -gi.u[k];
        }
    }
    res.objective = 0.5 * kernels::dot(qp.p.multiply(res.x).data(), res.x.data(), n) +
                    kernels::dot(qp.q.data(), res.x.data(), n);
    res.kkt_residual = qp_kkt_residual(qp, res.x, res.dual_ineq, res.dual_eq);
    if (res.kkt_residual > opts.tol) res.status = SolveStatus::IterationLimit;
    return res;
}

} // namespace rampc
