#pragma once

#include "rampc/model.hpp"
#include "rampc/set_membership.hpp"
#include "rampc/solver.hpp"

#include <cstdint>
#include <optional>
#include <tuple>
#include <vector>

namespace rampc {

enum class Variant { Rampc, Ampc };

const char* to_string(Variant v);

struct MpcConfig {
    int horizon = 15;        ///< N, prediction steps
    int model_length = 12;   ///< m, FIR length
    int facet_count = 156;   ///< p, rows of the feasible-set facet matrix
    int window_size = 36;    ///< s, measurement pairs kept for identification
    double input_weight = 0.0;       ///< optional |u|^2 penalty (off for the benchmark)
    double input_rate_weight = 0.0;  ///< optional |du|^2 penalty
    std::uint64_t facet_seed = 1729;
    std::optional<double> eta_override;  ///< pin the truncation margin (toy setups)
    SolverOptions lp{1e-8, 20000};
    SolverOptions qp{1e-8, 20000};
    double cg_tol = 1e-9;      ///< robust-row violation accepted at termination
    int cg_max_rounds = 200;
    int cut_pool_per_row = 4;
    bool audit_qp = false;     ///< check the recovered point against the assembled program

    void validate() const;
};

/// Affine map from the decision inputs U to the regressor at prediction
/// offset idx = i - t in [0, N+m-2]:  phi(i|t) = past[idx] + coeff[idx] U.
/// The input is held at u(t+N-1|t) past the horizon, so late columns of
/// coeff accumulate onto the last decision variable.
struct RegressorPlan {
    int horizon = 0;
    int model_length = 0;
    std::vector<Vector> past;
    std::vector<Matrix> coeff;

    std::size_t indices() const { return past.size(); }
    Vector eval(std::size_t idx, const Vector& u) const;
};

/// past_inputs: applied inputs newest first (zero padded at the start).
RegressorPlan build_regressor_plan(const Vector& past_inputs, const MpcConfig& cfg);

/// One inner maximization of the robust program:
///   max_{h in H(t)} sign * phi(pred_index)^T h  <=  rhs_const [+ c(c_index)]
struct RobustRow {
    int pred_index;
    double sign;
    double rhs_const;
    int c_index;  ///< index into the epigraph variables, -1 for hard rows
};

struct ControllerState {
    Vector input_history;  ///< applied inputs newest first, length >= model_length
    double prev_input = 0.0;
    FeasibleSet fss;
    MeasurementWindow window;
};

/// Everything the per-step optimal control problem is made of, kept in
/// structured form. `assemble` turns it into the explicit program with
/// dual blocks; the constraint-generation solver consumes it directly.
struct RobustProgram {
    Variant variant = Variant::Rampc;
    RegressorPlan plan;
    const FeasibleSet* fss = nullptr;
    Vector y_des;        ///< references for the N predicted outputs
    double out_bound = 0.0;  ///< y_max - eta_m
    double u_max = 0.0;
    double du_max = 0.0;
    double prev_input = 0.0;
    double input_weight = 0.0;
    double input_rate_weight = 0.0;
    Vector h_center;     ///< nominal model (Ampc)
    std::vector<RobustRow> rows;
};

RobustProgram make_robust_program(Variant variant, const ControllerState& state,
                                  const MpcConfig& cfg, const Vector& y_des,
                                  double eta_m, const SystemBounds& bounds,
                                  Vector h_center = {});

/// Incremental sparse assembly of a quadratic program.
class QpBuilder {
public:
    explicit QpBuilder(std::size_t initial_vars) : nvars_(initial_vars) {}

    std::size_t add_vars(std::size_t count);
    std::size_t num_vars() const { return nvars_; }
    void add_p(std::size_t i, std::size_t j, double v);  // symmetric contribution
    void add_q(std::size_t i, double v);
    void add_ineq(std::vector<std::pair<std::size_t, double>> entries, double rhs);
    void add_eq(std::vector<std::pair<std::size_t, double>> entries, double rhs);
    std::size_t ineq_rows() const { return b_ineq_.size(); }
    QuadraticProgram take();

private:
    std::size_t nvars_ = 0;
    std::vector<std::tuple<std::size_t, std::size_t, double>> p_entries_;
    Vector q_;
    std::vector<std::vector<std::pair<std::size_t, double>>> ineq_;
    Vector b_ineq_;
    std::vector<std::vector<std::pair<std::size_t, double>>> eq_;
    Vector b_eq_;
};

/// Appends the strong-duality certificate for
///   max_{h : A_h h <= b_h} dir^T h <= rhs,   dir = sign (phi_past + phi_coeff U)
/// as linear rows over fresh multipliers theta (one per facet):
///   A_h^T theta = dir,   b_h^T theta <= rhs,   theta >= 0.
/// rhs = rhs_const + x[rhs_var] (rhs_var < 0 for a constant bound).
/// Returns the theta column offset.
std::size_t dualize_max_constraint(QpBuilder& builder, const FeasibleSet& fss,
                                   double sign, const Vector& phi_past,
                                   const Matrix& phi_coeff, std::size_t u_offset,
                                   double rhs_const, long rhs_var);

/// The explicit program: variables [U | c | theta blocks in row order].
struct AssembledQp {
    QuadraticProgram qp;
    std::vector<RobustRow> rows;
    int n_inputs = 0;
    int n_costs = 0;
    std::size_t facets = 0;

    std::size_t theta_offset(std::size_t row_index) const {
        return static_cast<std::size_t>(n_inputs + n_costs) + row_index * facets;
    }
    /// index of a robust row's budget row within qp.a_ineq (each dual block
    /// contributes its budget row followed by its `facets` sign rows)
    std::size_t budget_row(std::size_t row_index) const {
        return static_cast<std::size_t>(4 * n_inputs) + row_index * (facets + 1);
    }
};

AssembledQp assemble(const RobustProgram& prog);

AssembledQp assemble_rampc(const ControllerState& state, const MpcConfig& cfg,
                           const Vector& y_des, double eta_m, const SystemBounds& bounds);
AssembledQp assemble_ampc(const ControllerState& state, const MpcConfig& cfg,
                          const Vector& y_des, double eta_m, const SystemBounds& bounds);

struct MpcSolution {
    Vector u;
    Vector cost_bounds;        ///< per-step worst-case |deviation| bounds
    double worst_case_cost = 0.0;
    double nominal_cost = 0.0; ///< tracking cost at the nominal model (Ampc)
    SolveStatus status = SolveStatus::IterationLimit;
    long qp_iterations = 0;
    long lp_pivots = 0;
    int cg_rounds = 0;
    int master_fallbacks = 0;  ///< master solves that needed the exact path
    double master_ms = 0.0;    ///< time inside master solves
    double support_ms = 0.0;   ///< time inside support evaluations
    double audit_kkt = -1.0;   ///< residual on the assembled program when audited
};

/// Solver state carried across steps: vertices of the feasible set
/// collected as cutting planes (revalidated for membership as the set
/// shrinks), the proximal anchor for the master's flat directions, and the
/// master's last active set for warm starts.
struct CutPool {
    struct ActiveCut {
        std::size_t row;
        Vector vertex;
    };

    std::vector<std::vector<Vector>> per_row;
    Vector anchor;
    std::vector<ActiveCut> warm_cuts;
    std::vector<std::size_t> warm_inputs;

    void fit(std::size_t n_rows) { per_row.resize(n_rows); }
    void revalidate(const FeasibleSet& fss, double tol);
    std::size_t total() const;

    /// Realigns the pool with the receding horizon: the row at prediction
    /// offset idx inherits the vertices collected for idx+1 one step ago.
    /// The shifted input plan moves the same way, so these are the cuts
    /// most likely to bind again.
    void advance(const std::vector<RobustRow>& rows);
};

/// Solves the robust program by constraint generation: a small master
/// program over (U, c) plus exact support-function evaluations over the
/// feasible set, added as cuts until no robust row is violated. Exact for
/// polytopic sets. support_ctx must be a simplex context over the
/// feasible-set rows.
MpcSolution solve_robust(const RobustProgram& prog, CutPool& pool,
                         SimplexContext& support_ctx, const MpcConfig& cfg);

class Controller {
public:
    Controller(const SystemBounds& bounds, const MpcConfig& cfg, Variant variant);

    struct StepOutcome {
        double u = 0.0;
        double du = 0.0;
        MpcSolution solution;
        double fss_support_sum = 0.0;  ///< size proxy: sum of coordinate supports
    };

    /// One closed-loop step: fold in the measurement, update the feasible
    /// set, solve the per-step program, return the applied input.
    StepOutcome step(double y_meas, const Vector& y_des_window);

    const ControllerState& state() const { return state_; }
    double eta() const { return eta_; }
    Variant variant() const { return variant_; }
    const MpcConfig& config() const { return cfg_; }
    long steps_taken() const { return t_; }

private:
    SystemBounds bounds_;
    MpcConfig cfg_;
    Variant variant_;
    double eta_;
    ControllerState state_;
    CutPool pool_;
    IdentificationCache ident_cache_;
    long t_ = 0;
};

} // namespace rampc
