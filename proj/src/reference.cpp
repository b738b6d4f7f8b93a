#include "rampc/harness.hpp"

#include "rampc/errors.hpp"

#include <cmath>

namespace rampc {

double ReferenceTrajectory::at(long t) const {
    if (samples.empty()) return 0.0;
    if (t < 1) return samples.front();
    if (t > static_cast<long>(samples.size())) return samples.back();
    return samples[static_cast<std::size_t>(t - 1)];
}

const std::vector<std::string>& standard_trajectories() {
    static const std::vector<std::string> names{"rampSaw", "rampStep", "sinusoid", "step"};
    return names;
}

namespace {

double triangle(double phase, double a) {
    // 0 -> a -> -a -> 0 over one period, starts rising through zero
    if (phase < 0.25) return a * 4.0 * phase;
    if (phase < 0.75) return a * (2.0 - 4.0 * phase);
    return a * (4.0 * phase - 4.0);
}

double ramp_step(double phase, double a) {
    // ramp from -a to a over the first half, hold a, drop, hold -a;
    // phase shifted so the trajectory starts at zero while rising
    double ph = phase + 0.25;
    if (ph >= 1.0) ph -= 1.0;
    if (ph < 0.5) return -a + 4.0 * a * ph;
    if (ph < 0.75) return a;
    return -a;
}

} // namespace

ReferenceTrajectory make_reference(const std::string& name, const TrajectoryParams& params,
                                   const SystemBounds& bounds, double eta_m) {
    if (params.length < 1) throw ConfigError("trajectory length must be at least 1");
    if (params.period < 2) throw ConfigError("trajectory period must be at least 2");

    ReferenceTrajectory traj;
    traj.name = name;
    traj.samples.resize(static_cast<std::size_t>(params.length));
    const double a = params.amplitude;
    const double s = params.step_amplitude;
    for (int t = 1; t <= params.length; ++t) {
        const double phase =
            static_cast<double>(t % params.period) / static_cast<double>(params.period);
        double v = 0.0;
        if (name == "rampSaw") {
            v = triangle(phase, a);
        } else if (name == "rampStep") {
            v = ramp_step(phase, a);
        } else if (name == "sinusoid") {
            v = a * std::sin(2.0 * M_PI * t / params.period);
        } else if (name == "step") {
            v = phase < 0.5 ? s : -s;
        } else {
            throw ConfigError("unknown reference trajectory: " + name);
        }
        traj.samples[static_cast<std::size_t>(t - 1)] = v;
    }
    const double band = bounds.y_max - eta_m;
    for (double v : traj.samples) {
        if (std::fabs(v) > band) {
            throw ConfigError("reference exceeds the robustly trackable band");
        }
    }
    return traj;
}

} // namespace rampc
