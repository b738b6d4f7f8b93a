#pragma once

#include "rampc/linalg.hpp"
#include "rampc/model.hpp"
#include "rampc/polytope.hpp"
#include "rampc/solver.hpp"

#include <cstdint>
#include <deque>
#include <iosfwd>

namespace rampc {

/// Feasible system set { h : A_h h <= b_h(t) }. The facet matrix is chosen
/// once; only the offsets move, and they only shrink.
struct FeasibleSet {
    Matrix a_h;
    Vector b_h;

    std::size_t dim() const { return a_h.cols(); }
    std::size_t facets() const { return a_h.rows(); }
    Polytope as_polytope() const { return Polytope{a_h, b_h}; }
};

/// Sliding block of the most recent measurement pairs. Entry 0 is the
/// newest pair; `regressor` holds the m inputs that produced the
/// measurement, newest first.
class MeasurementWindow {
public:
    explicit MeasurementWindow(std::size_t capacity) : capacity_(capacity) {}

    void push(Vector regressor, double y_meas);
    std::size_t size() const { return entries_.size(); }
    std::size_t capacity() const { return capacity_; }
    const Vector& regressor(std::size_t k) const { return entries_[k].first; }
    double measurement(std::size_t k) const { return entries_[k].second; }

private:
    std::size_t capacity_;
    std::deque<std::pair<Vector, double>> entries_;
};

/// Polytopic rows of the non-falsified set, two per windowed measurement.
struct NonFalsifiedSet {
    Matrix a;
    Vector b;
};

/// Facet matrix construction: +/- coordinate facets first (they keep the
/// set bounded), then p - 2m unit-norm directions from a fixed-seed stream
/// so runs are reproducible.
Matrix make_facet_matrix(std::size_t m, std::size_t p, std::uint64_t seed);

/// Offsets of the prior box { h : envelope bounds } in every facet
/// direction. Throws ConfigError when a_h lacks the coordinate facets.
FeasibleSet initial_fss(const SystemBounds& bounds, int m, const Matrix& a_h);

NonFalsifiedSet nonfalsified_set(const MeasurementWindow& window, double eta_m, double eps);

/// Optional per-facet maximizer witnesses kept across updates. When a
/// stored maximizer is still feasible for the new intersection, the facet's
/// support cannot have moved and its LP is skipped.
struct IdentificationCache {
    std::vector<Vector> argmax;
};

/// One identification update: each offset becomes the support of
/// (previous set intersected with the non-falsified rows) in its facet
/// direction. Offsets never grow. Throws AssumptionViolation when the
/// intersection is empty beyond numerical tolerance.
FeasibleSet update_fss(const FeasibleSet& fss, const NonFalsifiedSet& delta,
                       const SolverOptions& opts = {}, IdentificationCache* cache = nullptr);

void export_fss_csv(const FeasibleSet& fss, std::ostream& out);

} // namespace rampc
