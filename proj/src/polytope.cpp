#include "rampc/polytope.hpp"

#include "rampc/errors.hpp"
#include "rampc/kernels.hpp"
#include "rampc/solver.hpp"

#include <algorithm>
#include <cmath>

namespace rampc {

double support(const Polytope& poly, const Vector& direction) {
    SimplexContext ctx(poly.a, poly.b);
    auto res = ctx.maximize(direction);
    switch (res.status) {
    case SolveStatus::Optimal: return res.value;
    case SolveStatus::Infeasible: throw EmptySetError("support of an empty polytope");
    case SolveStatus::Unbounded: throw UnboundedError("polytope unbounded in query direction");
    default: throw SolverError("support LP did not converge");
    }
}

bool contains(const Polytope& poly, const Vector& h, double tol) {
    for (std::size_t i = 0; i < poly.facets(); ++i) {
        if (kernels::dot(poly.a.row(i), h.data(), poly.dim()) > poly.b[i] + tol) return false;
    }
    return true;
}

std::pair<Vector, double> chebyshev_center(const Polytope& poly) {
    const std::size_t m = poly.dim();
    Matrix rows(poly.facets(), m + 1);
    for (std::size_t i = 0; i < poly.facets(); ++i) {
        for (std::size_t j = 0; j < m; ++j) rows(i, j) = poly.a(i, j);
        rows(i, m) = row_norm(poly.a, i);
    }
    SimplexContext ctx(rows, poly.b);
    Vector dir(m + 1, 0.0);
    dir[m] = 1.0;
    auto res = ctx.maximize(dir);
    if (res.status == SolveStatus::Infeasible) {
        throw EmptySetError("chebyshev center of an empty polytope");
    }
    if (res.status == SolveStatus::Unbounded) {
        throw UnboundedError("chebyshev center of an unbounded polytope");
    }
    if (res.status != SolveStatus::Optimal) {
        throw SolverError("chebyshev LP did not converge");
    }
    if (res.value < -1e-9) throw EmptySetError("polytope is empty (negative inscribed radius)");
    Vector center(res.x.begin(), res.x.begin() + m);
    return {center, std::max(0.0, res.value)};
}

std::vector<Vector> enumerate_vertices(const Polytope& poly) {
    const std::size_t m = poly.dim();
    const std::size_t p = poly.facets();
    if (m > 6 || p > 40) {
        throw ConfigError("vertex enumeration refused: combinatorial guard (dim <= 6, facets <= 40)");
    }
    if (p < m) return {};

    std::vector<Vector> verts;
    std::vector<std::size_t> pick(m);
    for (std::size_t i = 0; i < m; ++i) pick[i] = i;

    Matrix sys(m, m);
    Vector rhs(m), v;
    for (;;) {
        for (std::size_t i = 0; i < m; ++i) {
            for (std::size_t j = 0; j < m; ++j) sys(i, j) = poly.a(pick[i], j);
            rhs[i] = poly.b[pick[i]];
        }
        if (solve_square(sys, rhs, v, 1e-10) && contains(poly, v, 1e-8)) {
            bool dup = false;
            for (const auto& w : verts) {
                double diff = 0.0;
                for (std::size_t j = 0; j < m; ++j) diff = std::max(diff, std::fabs(w[j] - v[j]));
                if (diff < 1e-7) {
                    dup = true;
                    break;
                }
            }
            if (!dup) verts.push_back(v);
        }
        // next combination
        std::size_t k = m;
        while (k > 0 && pick[k - 1] == p - m + (k - 1)) --k;
        if (k == 0) return verts;
        ++pick[k - 1];
        for (std::size_t j = k; j < m; ++j) pick[j] = pick[j - 1] + 1;
    }
}

} // namespace rampc
