#include "rampc/mpc.hpp"

#include "rampc/errors.hpp"
#include "rampc/kernels.hpp"
#include "rampc/polytope.hpp"

#include <algorithm>
#include <map>

namespace rampc {

std::size_t QpBuilder::add_vars(std::size_t count) {
    const std::size_t at = nvars_;
    nvars_ += count;
    return at;
}

void QpBuilder::add_p(std::size_t i, std::size_t j, double v) {
    if (v == 0.0) return;
    p_entries_.emplace_back(i, j, v);
    if (i != j) p_entries_.emplace_back(j, i, v);
}

void QpBuilder::add_q(std::size_t i, double v) {
    if (q_.size() <= i) q_.resize(i + 1, 0.0);
    q_[i] += v;
}

void QpBuilder::add_ineq(std::vector<std::pair<std::size_t, double>> entries, double rhs) {
    ineq_.push_back(std::move(entries));
    b_ineq_.push_back(rhs);
}

void QpBuilder::add_eq(std::vector<std::pair<std::size_t, double>> entries, double rhs) {
    eq_.push_back(std::move(entries));
    b_eq_.push_back(rhs);
}

QuadraticProgram QpBuilder::take() {
    QuadraticProgram qp;
    qp.q = q_;
    qp.q.resize(nvars_, 0.0);

    std::sort(p_entries_.begin(), p_entries_.end());
    qp.p.cols = nvars_;
    std::vector<std::pair<std::size_t, double>> row;
    std::size_t at = 0;
    for (std::size_t i = 0; i < nvars_; ++i) {
        row.clear();
        while (at < p_entries_.size() && std::get<0>(p_entries_[at]) == i) {
            const std::size_t j = std::get<1>(p_entries_[at]);
            double v = 0.0;
            while (at < p_entries_.size() && std::get<0>(p_entries_[at]) == i &&
                   std::get<1>(p_entries_[at]) == j) {
                v += std::get<2>(p_entries_[at]);
                ++at;
            }
            if (v != 0.0) row.emplace_back(j, v);
        }
        qp.p.add_row(row);
    }

    auto pack = [&](const std::vector<std::vector<std::pair<std::size_t, double>>>& rows,
                    SparseMatrix& m) {
        m.cols = nvars_;
        for (const auto& r : rows) m.add_row(r);
    };
    pack(ineq_, qp.a_ineq);
    qp.b_ineq = b_ineq_;
    pack(eq_, qp.a_eq);
    qp.b_eq = b_eq_;
    return qp;
}

std::size_t dualize_max_constraint(QpBuilder& builder, const FeasibleSet& fss,
                                   double sign, const Vector& phi_past,
                                   const Matrix& phi_coeff, std::size_t u_offset,
                                   double rhs_const, long rhs_var) {
    const std::size_t p = fss.facets();
    const std::size_t m = fss.dim();
    const std::size_t theta = builder.add_vars(p);

    // budget: b_h^T theta - [rhs var] <= rhs_const
    std::vector<std::pair<std::size_t, double>> budget;
    budget.reserve(p + 1);
    for (std::size_t i = 0; i < p; ++i) {
        if (fss.b_h[i] != 0.0) budget.emplace_back(theta + i, fss.b_h[i]);
    }
    if (rhs_var >= 0) budget.emplace_back(static_cast<std::size_t>(rhs_var), -1.0);
    builder.add_ineq(std::move(budget), rhs_const);

    // multiplier signs: theta >= 0 (the primal rows are inequalities)
    for (std::size_t i = 0; i < p; ++i) {
        builder.add_ineq({{theta + i, -1.0}}, 0.0);
    }

    // coupling: A_h^T theta - sign * phi_coeff U = sign * phi_past
    const std::size_t n_u = phi_coeff.cols();
    for (std::size_t j = 0; j < m; ++j) {
        std::vector<std::pair<std::size_t, double>> row;
        row.reserve(p + n_u);
        for (std::size_t i = 0; i < p; ++i) {
            if (fss.a_h(i, j) != 0.0) row.emplace_back(theta + i, fss.a_h(i, j));
        }
        for (std::size_t k = 0; k < n_u; ++k) {
            if (phi_coeff(j, k) != 0.0) row.emplace_back(u_offset + k, -sign * phi_coeff(j, k));
        }
        builder.add_eq(std::move(row), sign * phi_past[j]);
    }
    return theta;
}

RobustProgram make_robust_program(Variant variant, const ControllerState& state,
                                  const MpcConfig& cfg, const Vector& y_des,
                                  double eta_m, const SystemBounds& bounds,
                                  Vector h_center) {
    if (y_des.size() != static_cast<std::size_t>(cfg.horizon)) {
        throw ConfigError("reference window must provide one value per horizon step");
    }
    RobustProgram prog;
    prog.variant = variant;
    prog.plan = build_regressor_plan(state.input_history, cfg);
    prog.fss = &state.fss;
    prog.y_des = y_des;
    prog.out_bound = bounds.y_max - eta_m;
    if (prog.out_bound <= 0.0) {
        throw ConfigError("output bound does not exceed the truncation margin");
    }
    prog.u_max = bounds.u_max;
    prog.du_max = bounds.du_max;
    prog.prev_input = state.prev_input;
    prog.input_weight = cfg.input_weight;
    prog.input_rate_weight = cfg.input_rate_weight;
    prog.h_center = std::move(h_center);

    const int n = cfg.horizon;
    const int m = cfg.model_length;
    if (variant == Variant::Rampc) {
        for (int idx = 0; idx < n; ++idx) {
            // c(idx) >= max phi.h - y_des  and  c(idx) >= y_des - min phi.h
            prog.rows.push_back({idx, +1.0, +y_des[idx], idx});
            prog.rows.push_back({idx, -1.0, -y_des[idx], idx});
        }
    }
    for (int idx = 1; idx <= n + m - 2; ++idx) {
        prog.rows.push_back({idx, +1.0, prog.out_bound, -1});
        prog.rows.push_back({idx, -1.0, prog.out_bound, -1});
    }
    return prog;
}

namespace {

void add_input_rows(QpBuilder& b, const RobustProgram& prog, std::size_t u_offset) {
    const std::size_t n = prog.y_des.size();
    for (std::size_t k = 0; k < n; ++k) {
        b.add_ineq({{u_offset + k, 1.0}}, prog.u_max);
    }
    for (std::size_t k = 0; k < n; ++k) {
        b.add_ineq({{u_offset + k, -1.0}}, prog.u_max);
    }
    for (std::size_t k = 0; k < n; ++k) {
        if (k == 0) {
            b.add_ineq({{u_offset, 1.0}}, prog.du_max + prog.prev_input);
        } else {
            b.add_ineq({{u_offset + k, 1.0}, {u_offset + k - 1, -1.0}}, prog.du_max);
        }
    }
    for (std::size_t k = 0; k < n; ++k) {
        if (k == 0) {
            b.add_ineq({{u_offset, -1.0}}, prog.du_max - prog.prev_input);
        } else {
            b.add_ineq({{u_offset + k, -1.0}, {u_offset + k - 1, 1.0}}, prog.du_max);
        }
    }
}

void add_input_penalties(QpBuilder& b, const RobustProgram& prog, std::size_t u_offset) {
    const std::size_t n = prog.y_des.size();
    if (prog.input_weight > 0.0) {
        for (std::size_t k = 0; k < n; ++k) {
            b.add_p(u_offset + k, u_offset + k, 2.0 * prog.input_weight);
        }
    }
    if (prog.input_rate_weight > 0.0) {
        const double w = prog.input_rate_weight;
        for (std::size_t k = 0; k < n; ++k) {
            b.add_p(u_offset + k, u_offset + k, 2.0 * w * (k + 1 < n ? 2.0 : 1.0));
            if (k + 1 < n) b.add_p(u_offset + k, u_offset + k + 1, -2.0 * w);
        }
        b.add_q(u_offset, -2.0 * w * prog.prev_input);
    }
}

} // namespace

AssembledQp assemble(const RobustProgram& prog) {
    const std::size_t n = prog.y_des.size();
    const bool rampc = prog.variant == Variant::Rampc;
    const std::size_t nc = rampc ? n : 0;

    QpBuilder b(n + nc);
    AssembledQp out;
    out.n_inputs = static_cast<int>(n);
    out.n_costs = static_cast<int>(nc);
    out.facets = prog.fss->facets();
    out.rows = prog.rows;

    add_input_rows(b, prog, 0);
    add_input_penalties(b, prog, 0);

    if (rampc) {
        for (std::size_t j = 0; j < n; ++j) b.add_p(n + j, n + j, 2.0);
    } else {
        // nominal tracking cost at the center model:
        // sum_j (y_des(j) - past_j.h - (Phi_j^T h)^T U)^2
        for (std::size_t j = 0; j < n; ++j) {
            const Vector& past = prog.plan.past[j];
            const Matrix& coeff = prog.plan.coeff[j];
            const std::size_t m = past.size();
            Vector g(n, 0.0);  // gradient of the predicted output wrt U
            for (std::size_t l = 0; l < m; ++l) {
                for (std::size_t k = 0; k < n; ++k) g[k] += coeff(l, k) * prog.h_center[l];
            }
            const double bias = prog.y_des[j] -
                                kernels::dot(past.data(), prog.h_center.data(), m);
            for (std::size_t a = 0; a < n; ++a) {
                for (std::size_t c = a; c < n; ++c) {
                    if (g[a] != 0.0 && g[c] != 0.0) b.add_p(a, c, 2.0 * g[a] * g[c]);
                }
                if (g[a] != 0.0) b.add_q(a, -2.0 * bias * g[a]);
            }
        }
    }

    // budget rows must directly follow the input block so AssembledQp can
    // index them; dual blocks claim fresh variables in row order
    for (const auto& row : prog.rows) {
        const std::size_t idx = static_cast<std::size_t>(row.pred_index);
        const long rhs_var = row.c_index >= 0 ? static_cast<long>(n + row.c_index) : -1;
        dualize_max_constraint(b, *prog.fss, row.sign, prog.plan.past[idx],
                               prog.plan.coeff[idx], 0, row.rhs_const, rhs_var);
    }

    out.qp = b.take();
    return out;
}

AssembledQp assemble_rampc(const ControllerState& state, const MpcConfig& cfg,
                           const Vector& y_des, double eta_m, const SystemBounds& bounds) {
    return assemble(make_robust_program(Variant::Rampc, state, cfg, y_des, eta_m, bounds));
}

AssembledQp assemble_ampc(const ControllerState& state, const MpcConfig& cfg,
                          const Vector& y_des, double eta_m, const SystemBounds& bounds) {
    auto [center, radius] = chebyshev_center(state.fss.as_polytope());
    (void)radius;
    return assemble(make_robust_program(Variant::Ampc, state, cfg, y_des, eta_m, bounds,
                                        std::move(center)));
}

} // namespace rampc
