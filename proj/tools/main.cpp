#include "rampc/config.hpp"
#include "rampc/harness.hpp"
#include "rampc/errors.hpp"
#include "rampc/kernels.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <sstream>
#include <thread>

using namespace rampc;

namespace {

HarnessConfig load_or_default(const std::string& path) {
    if (path.empty()) return config_from_json("{}");
    return load_config(path);
}

int run_simulate(const std::string& config_path, const std::string& variant_name,
                 const std::string& trajectory, std::uint64_t seed, const std::string& out) {
    const HarnessConfig cfg = load_or_default(config_path);
    const Variant variant = variant_name == "ampc" ? Variant::Ampc : Variant::Rampc;
    const double eta = cfg.mpc.eta_override
                           ? *cfg.mpc.eta_override
                           : truncation_error(cfg.bounds, cfg.mpc.model_length);
    const auto ref = make_reference(trajectory, cfg.trajectory, cfg.bounds, eta);
    const auto pseed = derive_plant_seed(seed, 0);
    const Plant plant = sample_plant(cfg.bounds, cfg.m_true, pseed);
    const auto run =
        run_closed_loop(plant, variant, ref, cfg, derive_noise_seed(seed, 0, 0), pseed);

    if (out.empty() || out == "-") {
        write_run_csv(run, std::cout);
    } else {
        std::ofstream f(out);
        if (!f) throw rampc::ConfigError("cannot write " + out);
        write_run_csv(run, f);
    }
    std::cerr << "variant=" << to_string(variant) << " trajectory=" << trajectory
              << " steps=" << run.steps.size() << " rms=" << run.rms
              << " max|u|=" << run.max_abs_u << " max|du|=" << run.max_abs_du
              << " max|y|=" << run.max_abs_y << " mean_step_ms=" << run.mean_step_ms << '\n';
    return 0;
}

int run_montecarlo(const std::string& config_path, int n, const std::string& out_dir,
                   const std::string& summary_path, std::uint64_t seed, int threads,
                   std::vector<std::string> trajectories) {
    const HarnessConfig cfg = load_or_default(config_path);
    if (trajectories.empty()) trajectories = standard_trajectories();
    if (threads <= 0) {
        threads = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
    }
    const auto table = monte_carlo(cfg, n, trajectories, {Variant::Rampc, Variant::Ampc},
                                   seed, threads, out_dir);
    const std::string json = summary_to_json(table);
    if (summary_path.empty() || summary_path == "-") {
        std::cout << json << '\n';
    } else {
        std::ofstream f(summary_path);
        if (!f) throw rampc::ConfigError("cannot write " + summary_path);
        f << json << '\n';
    }
    std::cerr << "trajectory        variant  mean_rms   max_rms    runs  failures\n";
    for (const auto& c : table.cells) {
        std::ostringstream line;
        line.setf(std::ios::fixed);
        line.precision(4);
        line << c.trajectory;
        line << std::string(c.trajectory.size() < 18 ? 18 - c.trajectory.size() : 1, ' ');
        line << c.variant << (c.variant.size() < 9 ? std::string(9 - c.variant.size(), ' ') : " ")
             << c.mean_rms << "     " << c.max_rms << "    " << c.count << "     "
             << c.failures;
        std::cerr << line.str() << '\n';
    }
    int failures = 0;
    for (const auto& c : table.cells) failures += c.failures;
    if (failures > 0) {
        std::cerr << "error: " << failures << " run(s) failed\n";
        for (const auto& note : table.failure_notes) std::cerr << "  " << note << '\n';
        return 2;
    }
    return 0;
}

int run_profile(const std::string& config_path, std::vector<int> fir_lengths, int steps,
                std::uint64_t seed, const std::string& out) {
    const HarnessConfig cfg = load_or_default(config_path);
    if (fir_lengths.empty()) fir_lengths = {8, 10, 12, 14, 20};
    const auto rows = runtime_profile(cfg, fir_lengths, steps, seed);
    const std::string json = profile_to_json(rows);
    if (out.empty() || out == "-") {
        std::cout << json << '\n';
    } else {
        std::ofstream f(out);
        if (!f) throw rampc::ConfigError("cannot write " + out);
        f << json << '\n';
    }
    std::cerr << "m    variant  mean_step_ms\n";
    for (const auto& r : rows) {
        std::cerr << r.fir_length << (r.fir_length < 10 ? "    " : "   ") << r.variant
                  << (r.variant.size() < 9 ? std::string(9 - r.variant.size(), ' ') : " ")
                  << r.mean_step_ms << '\n';
    }
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Robust adaptive model predictive control for uncertain FIR systems"};
    app.require_subcommand(1);

    std::string config_path;
    app.add_option("--config", config_path, "JSON configuration file")->capture_default_str();

    auto* sim = app.add_subcommand("simulate", "one plant, one trajectory, one controller");
    std::string variant = "rampc";
    std::string trajectory = "sinusoid";
    std::uint64_t seed = 1;
    std::string out_path;
    sim->add_option("--variant", variant, "rampc|ampc")
        ->check(CLI::IsMember({"rampc", "ampc"}));
    sim->add_option("--trajectory", trajectory, "rampSaw|rampStep|sinusoid|step");
    sim->add_option("--seed", seed, "run seed");
    sim->add_option("--out", out_path, "per-step CSV path (default: stdout)");

    auto* mc = app.add_subcommand("montecarlo", "paired sweep over sampled plants");
    int n_plants = 200;
    std::string out_dir;
    std::string summary_path;
    int threads = 0;
    std::vector<std::string> trajectories;
    std::uint64_t mc_seed = 2024;
    mc->add_option("--n", n_plants, "number of sampled plants");
    mc->add_option("--out-dir", out_dir, "directory for per-run CSV files");
    mc->add_option("--summary", summary_path, "summary JSON path (default: stdout)");
    mc->add_option("--threads", threads, "worker threads (default: hardware)");
    mc->add_option("--trajectories", trajectories, "subset of trajectories");
    mc->add_option("--seed", mc_seed, "master seed");

    auto* prof = app.add_subcommand("profile", "per-step runtimes across FIR lengths");
    std::vector<int> fir_lengths;
    int prof_steps = 60;
    std::uint64_t prof_seed = 7;
    std::string prof_out;
    prof->add_option("--fir-lengths", fir_lengths, "FIR lengths to profile");
    prof->add_option("--steps", prof_steps, "closed-loop steps per measurement");
    prof->add_option("--seed", prof_seed, "plant/noise seed");
    prof->add_option("--out", prof_out, "profile JSON path (default: stdout)");

    CLI11_PARSE(app, argc, argv);

    try {
        if (sim->parsed()) {
            return run_simulate(config_path, variant, trajectory, seed, out_path);
        }
        if (mc->parsed()) {
            return run_montecarlo(config_path, n_plants, out_dir, summary_path, mc_seed,
                                  threads, trajectories);
        }
        if (prof->parsed()) {
            return run_profile(config_path, fir_lengths, prof_steps, prof_seed, prof_out);
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
