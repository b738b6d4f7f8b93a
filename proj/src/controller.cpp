#include "rampc/mpc.hpp"

#include "rampc/errors.hpp"
#include "rampc/polytope.hpp"

#include <algorithm>
#include <cmath>

namespace rampc {

Controller::Controller(const SystemBounds& bounds, const MpcConfig& cfg, Variant variant)
    : bounds_(bounds),
      cfg_(cfg),
      variant_(variant),
      eta_(0.0),
      state_{{}, 0.0, FeasibleSet{}, MeasurementWindow(1)} {
    bounds_.validate();
    cfg_.validate();
    eta_ = cfg_.eta_override ? *cfg_.eta_override
                             : truncation_error(bounds_, cfg_.model_length);
    state_.input_history.assign(static_cast<std::size_t>(cfg_.model_length), 0.0);
    state_.window = MeasurementWindow(static_cast<std::size_t>(cfg_.window_size));
    const auto a_h = make_facet_matrix(cfg_.model_length, cfg_.facet_count, cfg_.facet_seed);
    state_.fss = initial_fss(bounds_, cfg_.model_length, a_h);
}

Controller::StepOutcome Controller::step(double y_meas, const Vector& y_des_window) {
    ++t_;
    const std::size_t m = static_cast<std::size_t>(cfg_.model_length);

    // fold the measurement into the window: it is explained by the m inputs
    // that preceded it
    Vector regressor(state_.input_history.begin(), state_.input_history.begin() + m);
    state_.window.push(std::move(regressor), y_meas);
    const auto delta = nonfalsified_set(state_.window, eta_, bounds_.eps);
    state_.fss = update_fss(state_.fss, delta, cfg_.lp, &ident_cache_);

    Vector h_center;
    if (variant_ == Variant::Ampc) {
        h_center = chebyshev_center(state_.fss.as_polytope()).first;
    }
    const auto prog = make_robust_program(variant_, state_, cfg_, y_des_window, eta_,
                                          bounds_, std::move(h_center));
    pool_.advance(prog.rows);
    SimplexContext support_ctx(state_.fss.a_h, state_.fss.b_h, cfg_.lp.max_iterations);
    auto sol = solve_robust(prog, pool_, support_ctx, cfg_);
    if (sol.status == SolveStatus::Infeasible) {
        throw FeasibilityLoss("per-step program lost feasibility", t_);
    }
    if (sol.status != SolveStatus::Optimal) {
        throw SolverError("per-step program failed: " + std::string(to_string(sol.status)));
    }

    // apply the first input; solver tolerance may leave it a hair outside
    // the box, anything worse is a bug
    const double lo = std::max(-bounds_.u_max, state_.prev_input - bounds_.du_max);
    const double hi = std::min(bounds_.u_max, state_.prev_input + bounds_.du_max);
    double u = sol.u[0];
    if (u < lo - 1e-8 || u > hi + 1e-8) {
        throw InternalError("applied input violates its bounds beyond solver tolerance");
    }
    u = std::clamp(u, lo, hi);

    StepOutcome outcome;
    outcome.u = u;
    outcome.du = u - state_.prev_input;
    outcome.solution = std::move(sol);

    Vector dir(m, 0.0);
    for (std::size_t j = 0; j < m; ++j) {
        dir[j] = 1.0;
        outcome.fss_support_sum += support_ctx.maximize(dir).value;
        dir[j] = -1.0;
        outcome.fss_support_sum += support_ctx.maximize(dir).value;
        dir[j] = 0.0;
    }

    state_.input_history.insert(state_.input_history.begin(), u);
    state_.input_history.resize(m);
    state_.prev_input = u;
    return outcome;
}

} // namespace rampc
