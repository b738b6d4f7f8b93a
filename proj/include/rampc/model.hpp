#pragma once

#include "rampc/linalg.hpp"

#include <cstdint>
#include <random>

namespace rampc {

/// Prior knowledge about the controlled system: an exponentially decaying
/// envelope on the impulse response, a hard noise bound, and the input,
/// input-rate and output limits the controller must respect.
struct SystemBounds {
    double l_lower = 0.3;  ///< lower gain bound, >= 0
    double l_upper = 1.0;  ///< upper gain bound, >= l_lower
    int mu = 4;            ///< head length, indices <= mu carry the flat bounds
    double rho = 0.65;     ///< tail decay rate, in (0, 1)
    double eps = 0.1;      ///< measurement noise bound, |v| < eps
    double u_max = 2.0;    ///< |u| bound
    double du_max = 0.8;   ///< |u(t) - u(t-1)| bound
    double y_max = 4.0;    ///< |y| bound

    void validate() const;  // throws ConfigError on a bad combination

    /// Envelope [lo, hi] for impulse-response coefficient i (1-based).
    std::pair<double, double> envelope(int i) const;
};

/// A sampled finite impulse response standing in for the infinite one.
/// Immutable after construction.
struct Plant {
    Vector coeffs;  ///< coeffs[k] is the coefficient at lag k+1
    int length() const { return static_cast<int>(coeffs.size()); }
};

struct Measurement {
    double y_true;
    double y_meas;
    double v;
};

/// Worst-case output error from modeling only the first m impulse-response
/// coefficients: u_max * l_upper * rho^(m - mu) * rho / (1 - rho).
/// Throws std::invalid_argument when m < mu.
double truncation_error(const SystemBounds& bounds, int m);

/// Draws every coefficient uniformly from its envelope. Deterministic for a
/// fixed seed.
Plant sample_plant(const SystemBounds& bounds, int m_true, std::uint64_t seed);

/// Output of the plant given past inputs ordered newest first
/// (past_inputs[0] = u(t-1)). Inputs before the start of the record are zero.
double plant_output(const Plant& plant, const Vector& past_inputs);

/// Bounded uniform noise on (-eps, eps), strict on both ends.
class NoiseRng {
public:
    NoiseRng(double eps, std::uint64_t seed) : eps_(eps), rng_(seed) {}
    double draw();

private:
    double eps_;
    std::mt19937_64 rng_;
};

Measurement measure(const Plant& plant, const Vector& past_inputs, NoiseRng& rng);

} // namespace rampc
