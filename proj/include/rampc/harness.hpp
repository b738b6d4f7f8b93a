#pragma once

#include "rampc/model.hpp"
#include "rampc/mpc.hpp"

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace rampc {

struct TrajectoryParams {
    int length = 100;            ///< run length T
    double amplitude = 1.5;      ///< swing of the ramp and sine shapes
    int period = 40;
    double step_amplitude = 0.75;  ///< square wave level; smaller on purpose
};

struct ReferenceTrajectory {
    std::string name;
    Vector samples;  ///< y_des(1..T)

    double at(long t) const;  ///< clamped lookup, holds the last value
};

/// Known names: rampSaw, rampStep, sinusoid, step. Validates that the
/// reference stays inside the robustly trackable band |y| <= y_max - eta_m.
ReferenceTrajectory make_reference(const std::string& name, const TrajectoryParams& params,
                                   const SystemBounds& bounds, double eta_m);

const std::vector<std::string>& standard_trajectories();

double rms_deviation(const Vector& y, const Vector& y_des);

struct HarnessConfig {
    SystemBounds bounds;
    MpcConfig mpc;
    TrajectoryParams trajectory;
    int m_true = 80;
    bool audit_membership = true;  ///< check h_S membership and shrinkage per step
};

struct StepRecord {
    long t;
    double u;
    double du;
    double y_true;
    double y_meas;
    double y_des;
    double cost;  ///< worst-case tracking cost of the planned sequence
    std::string status;
};

struct RunRecord {
    std::string trajectory;
    Variant variant = Variant::Rampc;
    std::uint64_t plant_seed = 0;
    std::uint64_t noise_seed = 0;
    std::vector<StepRecord> steps;
    double rms = 0.0;
    double mean_step_ms = 0.0;

    // closed-loop audits
    double max_abs_u = 0.0;
    double max_abs_du = 0.0;
    double max_abs_y = 0.0;
    bool membership_ok = true;     ///< truncated true response stayed in H(t)
    bool shrinkage_ok = true;      ///< offsets never grew
    bool support_sum_ok = true;    ///< size proxy never grew
    long feasibility_lost_at = 0;  ///< 0 when the run completed
};

RunRecord run_closed_loop(const Plant& plant, Variant variant,
                          const ReferenceTrajectory& trajectory, const HarnessConfig& cfg,
                          std::uint64_t noise_seed, std::uint64_t plant_seed = 0);

struct SummaryCell {
    std::string trajectory;
    std::string variant;
    double mean_rms = 0.0;
    double max_rms = 0.0;
    int count = 0;
    int failures = 0;
    double mean_step_ms = 0.0;
};

struct SummaryTable {
    int n_plants = 0;
    std::uint64_t master_seed = 0;
    std::vector<SummaryCell> cells;
    std::vector<std::string> failure_notes;

    const SummaryCell* find(const std::string& trajectory, Variant variant) const;
};

/// Paired Monte-Carlo sweep: both variants face identical plants and noise
/// streams per (plant, trajectory) cell. Runs are independent and execute
/// on `threads` workers; results do not depend on the thread count.
/// Per-run records go to out_dir as CSV when it is nonempty; keep, when
/// given, receives every RunRecord.
SummaryTable monte_carlo(const HarnessConfig& cfg, int n_plants,
                         const std::vector<std::string>& trajectories,
                         const std::vector<Variant>& variants, std::uint64_t master_seed,
                         int threads = 1, const std::string& out_dir = {},
                         std::vector<RunRecord>* keep = nullptr);

/// Deterministic per-run seeds derived from the master seed; the noise
/// stream ignores the variant so comparisons are paired.
std::uint64_t derive_plant_seed(std::uint64_t master, int plant_index);
std::uint64_t derive_noise_seed(std::uint64_t master, int plant_index, int traj_index);

void write_run_csv(const RunRecord& run, std::ostream& out);
/// Reads back the step table written by write_run_csv (header included).
std::vector<StepRecord> read_run_csv(std::istream& in);

std::string summary_to_json(const SummaryTable& table);

struct ProfileRow {
    int fir_length = 0;
    std::string variant;
    double mean_step_ms = 0.0;
    int steps = 0;
};

/// Per-step wall-clock of controller_step across FIR lengths, horizon held
/// fixed. Absolute numbers are hardware-dependent; only relative behavior
/// is asserted anywhere.
std::vector<ProfileRow> runtime_profile(const HarnessConfig& cfg,
                                        const std::vector<int>& fir_lengths, int steps,
                                        std::uint64_t seed);

std::string profile_to_json(const std::vector<ProfileRow>& rows);

} // namespace rampc
