#pragma once

#include "rampc/linalg.hpp"

#include <optional>

namespace rampc {

enum class SolveStatus { Optimal, Infeasible, Unbounded, IterationLimit };

const char* to_string(SolveStatus s);

struct SolveResult {
    SolveStatus status = SolveStatus::IterationLimit;
    Vector x;
    double objective = 0.0;
    double kkt_residual = 0.0;
    long iterations = 0;
    Vector dual_ineq;  // one multiplier per inequality row
    Vector dual_eq;    // one multiplier per equality row
};

/// maximize c^T x  s.t.  A_ineq x <= b_ineq,  A_eq x = b_eq,  x free.
struct LinearProgram {
    Vector c;
    Matrix a_ineq;
    Vector b_ineq;
    Matrix a_eq;
    Vector b_eq;
};

/// minimize 0.5 x^T P x + q^T x  s.t.  A_ineq x <= b_ineq,  A_eq x = b_eq.
/// P must be symmetric positive semidefinite (validated to 1e-10).
struct QuadraticProgram {
    SparseMatrix p;
    Vector q;
    SparseMatrix a_ineq;
    Vector b_ineq;
    SparseMatrix a_eq;
    Vector b_eq;

    std::size_t num_vars() const { return q.size(); }
};

struct SolverOptions {
    double tol = 1e-8;
    long max_iterations = 10000;
};

SolveResult solve_lp(const LinearProgram& lp, const SolverOptions& opts = {});
SolveResult solve_qp(const QuadraticProgram& qp, const SolverOptions& opts = {});

/// Dense convenience constructor used by tests and small callers.
QuadraticProgram make_qp(const Matrix& p, const Vector& q,
                         const Matrix& a_ineq, const Vector& b_ineq,
                         const Matrix& a_eq = {}, const Vector& b_eq = {});

/// KKT residual of (x, dual_ineq, dual_eq) against the program data:
/// max of primal violation, stationarity, dual sign and complementarity.
double qp_kkt_residual(const QuadraticProgram& qp, const Vector& x,
                       const Vector& dual_ineq, const Vector& dual_eq);

/// Dictionary simplex over a fixed constraint set { x : rows x <= rhs }
/// with free variables. Builds the tableau once; repeated maximize() calls
/// with different directions warm start from the current basis, which is
/// what makes the per-step identification updates and the support-function
/// evaluations cheap.
class SimplexContext {
public:
    SimplexContext(const Matrix& rows, const Vector& rhs, long max_pivots = 10000);

    struct MaxResult {
        SolveStatus status;
        double value = 0.0;
        Vector x;     // maximizer over the original free variables
        Vector dual;  // one multiplier per row; A^T dual = direction at optimum
        long pivots = 0;
    };

    /// Runs phase 1 on first use. Infeasibility below `feas_tol` in the
    /// phase-1 objective is ignored (treated as numerically feasible).
    MaxResult maximize(const Vector& direction);

    bool feasible();                      // establishes phase 1 if needed
    double infeasibility() const;         // phase-1 residual after feasible()
    std::size_t num_vars() const { return nvars_; }
    std::size_t num_rows() const { return nrows_; }

    double feas_tol = 1e-9;

private:
    bool run(std::size_t obj_row, bool skip_artificial, long& pivots);
    void pivot(std::size_t r, std::size_t s);
    void set_objective(const Vector& direction);
    bool phase1(long& pivots);

    std::size_t nvars_ = 0;   // original free variables
    std::size_t n_ = 0;       // split variables = 2 * nvars
    std::size_t nrows_ = 0;
    std::size_t stride_ = 0;
    std::vector<double> tab_;
    std::vector<long> basic_;     // label per row
    std::vector<long> nonbasic_;  // label per column (n_ + 1 of them)
    long max_pivots_ = 10000;
    bool phase1_done_ = false;
    bool feasible_ = false;
    double infeas_ = 0.0;
};

} // namespace rampc
