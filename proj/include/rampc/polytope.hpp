#pragma once

#include "rampc/linalg.hpp"

#include <utility>
#include <vector>

namespace rampc {

/// { h : A h <= b }. Immutable value type.
struct Polytope {
    Matrix a;
    Vector b;

    std::size_t dim() const { return a.cols(); }
    std::size_t facets() const { return a.rows(); }
};

/// max_{h in poly} direction . h, via the LP solver.
/// Throws EmptySetError when the polytope is empty and UnboundedError when
/// the maximum does not exist.
double support(const Polytope& poly, const Vector& direction);

/// True iff A h <= b + tol elementwise.
bool contains(const Polytope& poly, const Vector& h, double tol);

/// Center and radius of the largest inscribed Euclidean ball:
/// max r s.t. A h + r * rownorm(A) <= b. Throws EmptySetError when empty.
std::pair<Vector, double> chebyshev_center(const Polytope& poly);

/// Brute-force vertex enumeration over all facet subsets; test oracle for
/// the LP-based routines. Refuses dimensions above 6 or more than 40 facets.
std::vector<Vector> enumerate_vertices(const Polytope& poly);

} // namespace rampc
