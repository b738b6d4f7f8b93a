#include "rampc/set_membership.hpp"

#include "rampc/errors.hpp"
#include "rampc/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <random>

namespace rampc {

void MeasurementWindow::push(Vector regressor, double y_meas) {
    entries_.emplace_front(std::move(regressor), y_meas);
    if (entries_.size() > capacity_) entries_.pop_back();
}

Matrix make_facet_matrix(std::size_t m, std::size_t p, std::uint64_t seed) {
    if (p < 2 * m) throw ConfigError("facet count must be at least 2m for the coordinate facets");
    Matrix a(p, m);
    for (std::size_t i = 0; i < m; ++i) {
        a(i, i) = 1.0;
        a(m + i, i) = -1.0;
    }
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> gauss(0.0, 1.0);
    for (std::size_t r = 2 * m; r < p; ++r) {
        double norm2 = 0.0;
        do {
            norm2 = 0.0;
            for (std::size_t j = 0; j < m; ++j) {
                a(r, j) = gauss(rng);
                norm2 += a(r, j) * a(r, j);
            }
        } while (norm2 < 1e-12);
        const double inv = 1.0 / std::sqrt(norm2);
        for (std::size_t j = 0; j < m; ++j) a(r, j) *= inv;
    }
    return a;
}

namespace {

// support of the axis-aligned prior box in direction d
double box_support(const Vector& lo, const Vector& hi, const double* d, std::size_t m) {
    double s = 0.0;
    for (std::size_t j = 0; j < m; ++j) s += std::max(d[j] * lo[j], d[j] * hi[j]);
    return s;
}

} // namespace

FeasibleSet initial_fss(const SystemBounds& bounds, int m, const Matrix& a_h) {
    if (a_h.cols() != static_cast<std::size_t>(m)) {
        throw ConfigError("facet matrix dimension does not match the model length");
    }
    // every +/- coordinate direction must appear, otherwise the set is not
    // guaranteed bounded and the dual blocks lose feasibility
    for (int sign = 0; sign < 2; ++sign) {
        for (int v = 0; v < m; ++v) {
            bool found = false;
            for (std::size_t r = 0; r < a_h.rows() && !found; ++r) {
                bool match = true;
                for (int j = 0; j < m && match; ++j) {
                    const double want = (j == v) ? (sign ? -1.0 : 1.0) : 0.0;
                    match = std::fabs(a_h(r, j) - want) <= 1e-12;
                }
                found = match;
            }
            if (!found) throw ConfigError("facet matrix must contain all +/- coordinate rows");
        }
    }
    Vector lo(m), hi(m);
    for (int i = 1; i <= m; ++i) {
        auto [l, h] = bounds.envelope(i);
        lo[i - 1] = l;
        hi[i - 1] = h;
    }
    FeasibleSet fss;
    fss.a_h = a_h;
    fss.b_h.resize(a_h.rows());
    for (std::size_t r = 0; r < a_h.rows(); ++r) {
        fss.b_h[r] = box_support(lo, hi, a_h.row(r), m);
    }
    return fss;
}

NonFalsifiedSet nonfalsified_set(const MeasurementWindow& window, double eta_m, double eps) {
    const std::size_t count = window.size();
    const std::size_t m = count ? window.regressor(0).size() : 0;
    NonFalsifiedSet delta;
    delta.a = Matrix(2 * count, m);
    delta.b.resize(2 * count);
    for (std::size_t k = 0; k < count; ++k) {
        const Vector& phi = window.regressor(k);
        const double y = window.measurement(k);
        for (std::size_t j = 0; j < m; ++j) {
            delta.a(2 * k, j) = phi[j];
            delta.a(2 * k + 1, j) = -phi[j];
        }
        delta.b[2 * k] = y + eta_m + eps;
        delta.b[2 * k + 1] = -(y - eta_m - eps);
    }
    return delta;
}

FeasibleSet update_fss(const FeasibleSet& fss, const NonFalsifiedSet& delta,
                       const SolverOptions& opts, IdentificationCache* cache) {
    const std::size_t p = fss.facets();
    const std::size_t m = fss.dim();
    const std::size_t extra = delta.b.size();
    Matrix rows(p + extra, m);
    Vector rhs(p + extra);
    for (std::size_t i = 0; i < p; ++i) {
        for (std::size_t j = 0; j < m; ++j) rows(i, j) = fss.a_h(i, j);
        rhs[i] = fss.b_h[i];
    }
    for (std::size_t i = 0; i < extra; ++i) {
        for (std::size_t j = 0; j < m; ++j) rows(p + i, j) = delta.a(i, j);
        rhs[p + i] = delta.b[i];
    }

    const bool use_cache = cache != nullptr;
    if (use_cache && cache->argmax.size() != p) cache->argmax.assign(p, Vector{});
    auto witness_holds = [&](std::size_t i) {
        const Vector& h = cache->argmax[i];
        if (h.size() != m) return false;
        // still attains the stored offset inside the new intersection
        if (kernels::dot(fss.a_h.row(i), h.data(), m) < fss.b_h[i] - 1e-9) return false;
        for (std::size_t r = 0; r < p + extra; ++r) {
            if (kernels::dot(rows.row(r), h.data(), m) > rhs[r] + 1e-10) return false;
        }
        return true;
    };

    SimplexContext ctx(rows, rhs, opts.max_iterations);
    FeasibleSet next;
    next.a_h = fss.a_h;
    next.b_h.resize(p);
    Vector direction(m);
    bool feasibility_checked = false;
    bool any_witness = false;
    for (std::size_t i = 0; i < p; ++i) {
        if (use_cache && witness_holds(i)) {
            next.b_h[i] = fss.b_h[i];
            any_witness = true;  // a feasible point exists
            continue;
        }
        if (!feasibility_checked) {
            feasibility_checked = true;
            if (!ctx.feasible()) {
                throw AssumptionViolation(
                    "measurement data inconsistent with the prior envelope or noise bound "
                    "(intersection empty, violation " +
                    std::to_string(ctx.infeasibility()) + ")");
            }
        }
        for (std::size_t j = 0; j < m; ++j) direction[j] = fss.a_h(i, j);
        auto res = ctx.maximize(direction);
        if (res.status != SolveStatus::Optimal) {
            throw SolverError("identification support LP failed: " +
                              std::string(to_string(res.status)));
        }
        // the previous offset is itself a row of the LP, so the optimum can
        // exceed it only by solver tolerance; clamping keeps the shrinkage
        // monotone exactly
        next.b_h[i] = std::min(res.value, fss.b_h[i]);
        if (use_cache) cache->argmax[i] = std::move(res.x);
    }
    if (!feasibility_checked && !any_witness && !ctx.feasible()) {
        throw AssumptionViolation(
            "measurement data inconsistent with the prior envelope or noise bound "
            "(intersection empty, violation " +
            std::to_string(ctx.infeasibility()) + ")");
    }
    return next;
}

void export_fss_csv(const FeasibleSet& fss, std::ostream& out) {
    out.precision(17);
    for (std::size_t i = 0; i < fss.facets(); ++i) {
        for (std::size_t j = 0; j < fss.dim(); ++j) out << fss.a_h(i, j) << ',';
        out << fss.b_h[i] << '\n';
    }
}

} // namespace rampc
