#include "rampc/config.hpp"

#include "rampc/errors.hpp"

#include <json.hpp>

#include <fstream>
#include <sstream>

namespace rampc {

namespace {

template <typename T>
void read(const nlohmann::json& j, const char* key, T& into) {
    if (j.contains(key)) into = j.at(key).get<T>();
}

} // namespace

HarnessConfig config_from_json(const std::string& text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw ConfigError(std::string("configuration is not valid JSON: ") + e.what());
    }

    HarnessConfig cfg;
    try {
        if (j.contains("bounds")) {
            const auto& b = j.at("bounds");
            read(b, "l_lower", cfg.bounds.l_lower);
            read(b, "l_upper", cfg.bounds.l_upper);
            read(b, "mu", cfg.bounds.mu);
            read(b, "rho", cfg.bounds.rho);
            read(b, "eps", cfg.bounds.eps);
            read(b, "u_max", cfg.bounds.u_max);
            read(b, "du_max", cfg.bounds.du_max);
            read(b, "y_max", cfg.bounds.y_max);
        }
        if (j.contains("mpc")) {
            const auto& m = j.at("mpc");
            read(m, "N", cfg.mpc.horizon);
            read(m, "m", cfg.mpc.model_length);
            read(m, "p", cfg.mpc.facet_count);
            read(m, "s", cfg.mpc.window_size);
            read(m, "facet_seed", cfg.mpc.facet_seed);
            read(m, "input_weight", cfg.mpc.input_weight);
            read(m, "input_rate_weight", cfg.mpc.input_rate_weight);
            if (m.contains("eta_override") && !m.at("eta_override").is_null()) {
                cfg.mpc.eta_override = m.at("eta_override").get<double>();
            }
        }
        if (j.contains("solver")) {
            const auto& s = j.at("solver");
            read(s, "lp_tol", cfg.mpc.lp.tol);
            read(s, "qp_tol", cfg.mpc.qp.tol);
            long iters = cfg.mpc.lp.max_iterations;
            read(s, "max_iterations", iters);
            cfg.mpc.lp.max_iterations = iters;
            cfg.mpc.qp.max_iterations = iters;
            read(s, "cg_tol", cfg.mpc.cg_tol);
        }
        if (j.contains("trajectories")) {
            const auto& t = j.at("trajectories");
            read(t, "T", cfg.trajectory.length);
            read(t, "amplitude", cfg.trajectory.amplitude);
            read(t, "period", cfg.trajectory.period);
            read(t, "step_amplitude", cfg.trajectory.step_amplitude);
        }
        if (j.contains("plant")) {
            read(j.at("plant"), "m_true", cfg.m_true);
        }
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("bad configuration value: ") + e.what());
    }
    cfg.bounds.validate();
    cfg.mpc.validate();
    if (cfg.m_true < cfg.mpc.model_length) {
        throw ConfigError("plant length m_true must be at least the model length");
    }
    return cfg;
}

HarnessConfig load_config(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw ConfigError("cannot open configuration file: " + path);
    std::ostringstream buf;
    buf << f.rdbuf();
    return config_from_json(buf.str());
}

std::string config_to_json(const HarnessConfig& cfg) {
    nlohmann::json j;
    j["bounds"] = {{"l_lower", cfg.bounds.l_lower}, {"l_upper", cfg.bounds.l_upper},
                   {"mu", cfg.bounds.mu},           {"rho", cfg.bounds.rho},
                   {"eps", cfg.bounds.eps},         {"u_max", cfg.bounds.u_max},
                   {"du_max", cfg.bounds.du_max},   {"y_max", cfg.bounds.y_max}};
    j["mpc"] = {{"N", cfg.mpc.horizon},
                {"m", cfg.mpc.model_length},
                {"p", cfg.mpc.facet_count},
                {"s", cfg.mpc.window_size},
                {"facet_seed", cfg.mpc.facet_seed},
                {"input_weight", cfg.mpc.input_weight},
                {"input_rate_weight", cfg.mpc.input_rate_weight}};
    if (cfg.mpc.eta_override) {
        j["mpc"]["eta_override"] = *cfg.mpc.eta_override;
    } else {
        j["mpc"]["eta_override"] = nullptr;
    }
    j["solver"] = {{"lp_tol", cfg.mpc.lp.tol},
                   {"qp_tol", cfg.mpc.qp.tol},
                   {"max_iterations", cfg.mpc.lp.max_iterations},
                   {"cg_tol", cfg.mpc.cg_tol}};
    j["trajectories"] = {{"T", cfg.trajectory.length},
                         {"amplitude", cfg.trajectory.amplitude},
                         {"period", cfg.trajectory.period},
                         {"step_amplitude", cfg.trajectory.step_amplitude}};
    j["plant"] = {{"m_true", cfg.m_true}};
    return j.dump(2);
}

} // namespace rampc
