#include "rampc/model.hpp"

#include "rampc/errors.hpp"
#include "rampc/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace rampc {

void SystemBounds::validate() const {
    if (l_lower < 0.0 || l_upper < l_lower) {
        throw ConfigError("impulse-response gain bounds need 0 <= l_lower <= l_upper");
    }
    if (rho <= 0.0 || rho >= 1.0) throw ConfigError("decay rate rho must lie in (0, 1)");
    if (mu < 1) throw ConfigError("head length mu must be a positive integer");
    if (eps <= 0.0) throw ConfigError("noise bound eps must be positive");
    if (u_max <= 0.0 || du_max <= 0.0 || y_max <= 0.0) {
        throw ConfigError("constraint levels u_max, du_max, y_max must be positive");
    }
}

std::pair<double, double> SystemBounds::envelope(int i) const {
    if (i <= mu) return {l_lower, l_upper};
    const double decay = std::pow(rho, i - mu);
    return {l_lower * decay, l_upper * decay};
}

double truncation_error(const SystemBounds& bounds, int m) {
    if (m < bounds.mu) {
        throw std::invalid_argument("model length m must be at least the head length mu");
    }
    return bounds.u_max * bounds.l_upper * std::pow(bounds.rho, m - bounds.mu) *
           bounds.rho / (1.0 - bounds.rho);
}

Plant sample_plant(const SystemBounds& bounds, int m_true, std::uint64_t seed) {
    if (m_true < bounds.mu) {
        throw std::invalid_argument("plant length must be at least the head length mu");
    }
    std::mt19937_64 rng(seed);
    Plant plant;
    plant.coeffs.resize(m_true);
    for (int i = 1; i <= m_true; ++i) {
        auto [lo, hi] = bounds.envelope(i);
        std::uniform_real_distribution<double> dist(lo, hi);
        plant.coeffs[i - 1] = dist(rng);
    }
    return plant;
}

double plant_output(const Plant& plant, const Vector& past_inputs) {
    const std::size_t n = std::min(plant.coeffs.size(), past_inputs.size());
    return kernels::dot(plant.coeffs.data(), past_inputs.data(), n);
}

double NoiseRng::draw() {
    std::uniform_real_distribution<double> dist(-eps_, eps_);
    double v = dist(rng_);
    while (std::fabs(v) >= eps_) v = dist(rng_);  // strict bound
    return v;
}

Measurement measure(const Plant& plant, const Vector& past_inputs, NoiseRng& rng) {
    Measurement m;
    m.y_true = plant_output(plant, past_inputs);
    m.v = rng.draw();
    m.y_meas = m.y_true + m.v;
    return m;
}

} // namespace rampc
