#include "rampc/harness.hpp"

#include "rampc/errors.hpp"
#include "rampc/kernels.hpp"
#include "rampc/polytope.hpp"

#include <json.hpp>

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <sstream>
#include <thread>

namespace rampc {

double rms_deviation(const Vector& y, const Vector& y_des) {
    if (y.size() != y_des.size() || y.empty()) {
        throw ConfigError("rms needs two equal-length nonempty sequences");
    }
    double s = 0.0;
    for (std::size_t i = 0; i < y.size(); ++i) {
        const double d = y[i] - y_des[i];
        s += d * d;
    }
    return std::sqrt(s / static_cast<double>(y.size()));
}

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

} // namespace

std::uint64_t derive_plant_seed(std::uint64_t master, int plant_index) {
    return splitmix64(splitmix64(master) ^ (0x706c616e74ULL + static_cast<std::uint64_t>(plant_index)));
}

std::uint64_t derive_noise_seed(std::uint64_t master, int plant_index, int traj_index) {
    std::uint64_t s = splitmix64(master ^ 0x6e6f697365ULL);
    s = splitmix64(s ^ static_cast<std::uint64_t>(plant_index));
    return splitmix64(s ^ (0x9e37ULL * static_cast<std::uint64_t>(traj_index + 1)));
}

RunRecord run_closed_loop(const Plant& plant, Variant variant,
                          const ReferenceTrajectory& trajectory, const HarnessConfig& cfg,
                          std::uint64_t noise_seed, std::uint64_t plant_seed) {
    const int T = static_cast<int>(trajectory.samples.size());
    const int m = cfg.mpc.model_length;
    if (plant.length() < m) throw ConfigError("plant shorter than the model");

    RunRecord run;
    run.trajectory = trajectory.name;
    run.variant = variant;
    run.plant_seed = plant_seed;
    run.noise_seed = noise_seed;
    run.steps.reserve(static_cast<std::size_t>(T));

    Controller ctrl(cfg.bounds, cfg.mpc, variant);
    NoiseRng noise(cfg.bounds.eps, noise_seed);
    Vector inputs;  // applied inputs, newest first
    inputs.reserve(static_cast<std::size_t>(T));
    Vector y_seq, ref_seq;
    Vector h_true(plant.coeffs.begin(), plant.coeffs.begin() + m);
    Vector prev_offsets;
    double prev_support_sum = 0.0;
    double prev_u = 0.0;
    double total_ms = 0.0;

    for (int t = 1; t <= T; ++t) {
        const Measurement meas = measure(plant, inputs, noise);
        Vector refs(static_cast<std::size_t>(cfg.mpc.horizon));
        for (int j = 0; j < cfg.mpc.horizon; ++j) {
            refs[static_cast<std::size_t>(j)] = trajectory.at(t + 1 + j);
        }
        Controller::StepOutcome out;
        const auto clk0 = std::chrono::steady_clock::now();
        try {
            out = ctrl.step(meas.y_meas, refs);
        } catch (const FeasibilityLoss& e) {
            run.feasibility_lost_at = t;
            throw FeasibilityLoss(std::string(e.what()) + " at run step " + std::to_string(t), t);
        }
        const auto clk1 = std::chrono::steady_clock::now();
        total_ms += std::chrono::duration<double, std::milli>(clk1 - clk0).count();

        StepRecord rec;
        rec.t = t;
        rec.u = out.u;
        rec.du = out.u - prev_u;
        rec.y_true = meas.y_true;
        rec.y_meas = meas.y_meas;
        rec.y_des = trajectory.at(t);
        rec.cost = out.solution.worst_case_cost;
        rec.status = to_string(out.solution.status);
        run.steps.push_back(rec);

        run.max_abs_u = std::max(run.max_abs_u, std::fabs(out.u));
        run.max_abs_du = std::max(run.max_abs_du, std::fabs(rec.du));
        run.max_abs_y = std::max(run.max_abs_y, std::fabs(meas.y_true));

        if (cfg.audit_membership) {
            const auto& fss = ctrl.state().fss;
            if (!contains(fss.as_polytope(), h_true, 1e-7)) run.membership_ok = false;
            if (!prev_offsets.empty()) {
                for (std::size_t i = 0; i < fss.b_h.size(); ++i) {
                    if (fss.b_h[i] > prev_offsets[i] + 1e-12) run.shrinkage_ok = false;
                }
            }
            prev_offsets = fss.b_h;
            if (t > 1 && out.fss_support_sum > prev_support_sum + 1e-7) {
                run.support_sum_ok = false;
            }
            prev_support_sum = out.fss_support_sum;
        }

        inputs.insert(inputs.begin(), out.u);
        prev_u = out.u;
        y_seq.push_back(meas.y_true);
        ref_seq.push_back(rec.y_des);
    }
    run.rms = rms_deviation(y_seq, ref_seq);
    run.mean_step_ms = total_ms / static_cast<double>(T);
    return run;
}

const SummaryCell* SummaryTable::find(const std::string& trajectory, Variant variant) const {
    for (const auto& c : cells) {
        if (c.trajectory == trajectory && c.variant == to_string(variant)) return &c;
    }
    return nullptr;
}

SummaryTable monte_carlo(const HarnessConfig& cfg, int n_plants,
                         const std::vector<std::string>& trajectories,
                         const std::vector<Variant>& variants, std::uint64_t master_seed,
                         int threads, const std::string& out_dir,
                         std::vector<RunRecord>* keep) {
    if (n_plants < 1) throw ConfigError("monte carlo needs at least one plant");
    const double eta = cfg.mpc.eta_override
                           ? *cfg.mpc.eta_override
                           : truncation_error(cfg.bounds, cfg.mpc.model_length);

    struct Task {
        int plant_index;
        int traj_index;
        Variant variant;
    };
    std::vector<Task> tasks;
    for (int p = 0; p < n_plants; ++p) {
        for (int ti = 0; ti < static_cast<int>(trajectories.size()); ++ti) {
            for (Variant v : variants) tasks.push_back({p, ti, v});
        }
    }

    std::vector<ReferenceTrajectory> refs;
    refs.reserve(trajectories.size());
    for (const auto& name : trajectories) {
        refs.push_back(make_reference(name, cfg.trajectory, cfg.bounds, eta));
    }

    std::vector<RunRecord> results(tasks.size());
    std::vector<std::string> errors(tasks.size());
    std::atomic<std::size_t> next{0};
    auto worker = [&]() {
        for (;;) {
            const std::size_t i = next.fetch_add(1);
            if (i >= tasks.size()) return;
            const Task& task = tasks[i];
            const std::uint64_t pseed = derive_plant_seed(master_seed, task.plant_index);
            const std::uint64_t nseed =
                derive_noise_seed(master_seed, task.plant_index, task.traj_index);
            try {
                const Plant plant = sample_plant(cfg.bounds, cfg.m_true, pseed);
                results[i] = run_closed_loop(plant, task.variant,
                                             refs[static_cast<std::size_t>(task.traj_index)],
                                             cfg, nseed, pseed);
            } catch (const std::exception& e) {
                errors[i] = e.what();
                results[i].trajectory = trajectories[static_cast<std::size_t>(task.traj_index)];
                results[i].variant = task.variant;
                results[i].plant_seed = pseed;
                results[i].noise_seed = nseed;
            }
        }
    };
    const int nw = std::max(1, threads);
    std::vector<std::thread> workers;
    for (int w = 1; w < nw; ++w) workers.emplace_back(worker);
    worker();
    for (auto& th : workers) th.join();

    SummaryTable table;
    table.n_plants = n_plants;
    table.master_seed = master_seed;
    for (const auto& name : trajectories) {
        for (Variant v : variants) {
            SummaryCell cell;
            cell.trajectory = name;
            cell.variant = to_string(v);
            table.cells.push_back(cell);
        }
    }
    auto cell_of = [&](const Task& t) -> SummaryCell& {
        const std::size_t at = static_cast<std::size_t>(t.traj_index) * variants.size();
        for (std::size_t vi = 0; vi < variants.size(); ++vi) {
            if (variants[vi] == t.variant) return table.cells[at + vi];
        }
        throw InternalError("variant missing from summary layout");
    };
    for (std::size_t i = 0; i < tasks.size(); ++i) {
        SummaryCell& cell = cell_of(tasks[i]);
        if (!errors[i].empty()) {
            ++cell.failures;
            table.failure_notes.push_back(
                "plant " + std::to_string(tasks[i].plant_index) + " " + cell.trajectory + " " +
                cell.variant + ": " + errors[i]);
            continue;
        }
        const RunRecord& run = results[i];
        cell.mean_rms += run.rms;
        cell.max_rms = std::max(cell.max_rms, run.rms);
        cell.mean_step_ms += run.mean_step_ms;
        ++cell.count;
        if (keep) keep->push_back(run);
        if (!out_dir.empty()) {
            std::filesystem::create_directories(out_dir);
            std::ostringstream name;
            name << out_dir << "/run_" << run.trajectory << "_" << cell.variant << "_p"
                 << tasks[i].plant_index << ".csv";
            std::ofstream f(name.str());
            if (!f) throw ConfigError("cannot write " + name.str());
            write_run_csv(run, f);
        }
    }
    for (auto& cell : table.cells) {
        if (cell.count > 0) {
            cell.mean_rms /= cell.count;
            cell.mean_step_ms /= cell.count;
        }
    }
    return table;
}

void write_run_csv(const RunRecord& run, std::ostream& out) {
    out.precision(17);
    out << "t,u,du,y_true,y_meas,y_des,cost,status\n";
    for (const auto& s : run.steps) {
        out << s.t << ',' << s.u << ',' << s.du << ',' << s.y_true << ',' << s.y_meas << ','
            << s.y_des << ',' << s.cost << ',' << s.status << '\n';
    }
}

std::vector<StepRecord> read_run_csv(std::istream& in) {
    std::vector<StepRecord> steps;
    std::string line;
    std::getline(in, line);  // header
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::istringstream row(line);
        StepRecord s;
        char comma = 0;
        row >> s.t >> comma >> s.u >> comma >> s.du >> comma >> s.y_true >> comma >>
            s.y_meas >> comma >> s.y_des >> comma >> s.cost >> comma;
        std::getline(row, s.status);
        steps.push_back(std::move(s));
    }
    return steps;
}

std::string summary_to_json(const SummaryTable& table) {
    nlohmann::json j;
    j["n_plants"] = table.n_plants;
    j["master_seed"] = table.master_seed;
    j["cells"] = nlohmann::json::array();
    for (const auto& c : table.cells) {
        j["cells"].push_back({{"trajectory", c.trajectory},
                              {"variant", c.variant},
                              {"mean_rms", c.mean_rms},
                              {"max_rms", c.max_rms},
                              {"count", c.count},
                              {"failures", c.failures},
                              {"mean_step_ms", c.mean_step_ms}});
    }
    j["failures"] = table.failure_notes;
    return j.dump(2);
}

std::vector<ProfileRow> runtime_profile(const HarnessConfig& cfg,
                                        const std::vector<int>& fir_lengths, int steps,
                                        std::uint64_t seed) {
    std::vector<ProfileRow> rows;
    for (int m : fir_lengths) {
        HarnessConfig c = cfg;
        c.mpc.model_length = m;
        c.mpc.eta_override.reset();  // recompute the margin for each length
        c.audit_membership = false;
        const double eta = truncation_error(c.bounds, m);
        TrajectoryParams tp = c.trajectory;
        tp.length = steps;
        const auto ref = make_reference("sinusoid", tp, c.bounds, eta);
        const Plant plant = sample_plant(c.bounds, c.m_true, derive_plant_seed(seed, 0));
        for (Variant v : {Variant::Rampc, Variant::Ampc}) {
            const auto run =
                run_closed_loop(plant, v, ref, c, derive_noise_seed(seed, 0, 0), seed);
            rows.push_back({m, to_string(v), run.mean_step_ms, steps});
        }
    }
    return rows;
}

std::string profile_to_json(const std::vector<ProfileRow>& rows) {
    nlohmann::json j = nlohmann::json::array();
    for (const auto& r : rows) {
        j.push_back({{"fir_length", r.fir_length},
                     {"variant", r.variant},
                     {"mean_step_ms", r.mean_step_ms},
                     {"steps", r.steps}});
    }
    return j.dump(2);
}

} // namespace rampc
