#include "tristate/config.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "tristate/io.hpp"

namespace tristate {

namespace {

using nlohmann::json;

double get_num(const json& j, const char* key, double fallback) {
    if (!j.contains(key)) return fallback;
    if (!j[key].is_number())
        throw ConfigError(std::string("config: '") + key + "' must be a number");
    return j[key].get<double>();
}

std::vector<double> get_list(const json& j, const char* key) {
    std::vector<double> out;
    if (!j.contains(key)) return out;
    if (!j[key].is_array())
        throw ConfigError(std::string("config: '") + key + "' must be an array");
    for (const auto& v : j[key]) {
        if (!v.is_number())
            throw ConfigError(std::string("config: '") + key + "' entries must be numbers");
        out.push_back(v.get<double>());
    }
    return out;
}

SampledShape load_sampled_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("config: cannot read sampled pulse file " + path);
    SampledShape sh;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        std::istringstream ss(line);
        double t, p, s;
        char c1, c2;
        if (!(ss >> t >> c1 >> p >> c2 >> s))
            throw ConfigError("config: bad sampled pulse row: " + line);
        sh.times.push_back(t);
        sh.omega_p.push_back(p);
        sh.omega_s.push_back(s);
    }
    return sh;
}

}  // namespace

DimensionlessProblem RunConfig::problem() const {
    EntrancePulses pulses = sampled_path
        ? EntrancePulses(load_sampled_csv(*sampled_path))
        : make_sech_pulses(a, T, t_d);
    return normalize(medium, pulses, effective_grid());
}

Grid RunConfig::effective_grid() const {
    if (grid) return *grid;
    Grid g;
    g.tau_min = -8.0;
    g.tau_max = 8.0 + std::max(0.0, t_d / T);
    g.n_tau = 2048;
    return g;
}

RunConfig parse_config(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ConfigError(std::string("config: invalid JSON: ") + e.what());
    }

    RunConfig cfg;
    if (j.contains("medium")) {
        const auto& m = j["medium"];
        if (m.contains("kind")) {
            auto k = system_kind_from_string(m["kind"].get<std::string>());
            if (!k) throw ConfigError("config: medium.kind must be lambda, xi or vee");
            cfg.medium.kind = *k;
        }
        cfg.medium.q_ratio = get_num(m, "q_ratio", cfg.medium.q_ratio);
        cfg.medium.delta_p = get_num(m, "delta_p", cfg.medium.delta_p);
        cfg.medium.gamma = get_num(m, "gamma", cfg.medium.gamma);
    }
    if (j.contains("pulses")) {
        const auto& p = j["pulses"];
        if (p.contains("sampled")) {
            cfg.sampled_path = p["sampled"].get<std::string>();
        } else {
            cfg.a = get_num(p, "a", cfg.a);
            cfg.T = get_num(p, "T", cfg.T);
            cfg.t_d = get_num(p, "t_d", cfg.t_d);
        }
    }
    if (j.contains("grid")) {
        const auto& g = j["grid"];
        Grid grid;
        grid.tau_min = get_num(g, "tau_min", -8.0);
        grid.tau_max = get_num(g, "tau_max", 8.0 + cfg.t_d / cfg.T);
        grid.n_tau = std::size_t(get_num(g, "n_tau", 2048));
        auto z = get_list(g, "z");
        if (!z.empty()) grid.z_values = z;
        cfg.grid = grid;
    }
    if (j.contains("oracle")) {
        const auto& o = j["oracle"];
        cfg.oracle.dz = get_num(o, "dz", cfg.oracle.dz);
        cfg.oracle.store_stride = std::size_t(get_num(o, "store_stride", 0));
        if (o.contains("init")) {
            std::string s = o["init"].get<std::string>();
            if (s == "trapped") cfg.oracle.init = InitialState::Trapped;
            else if (s == "ground") cfg.oracle.init = InitialState::Ground;
            else throw ConfigError("config: oracle.init must be 'trapped' or 'ground'");
        }
    }
    if (j.contains("diagnostics")) {
        const auto& d = j["diagnostics"];
        cfg.diagnostics.z_scan_max = get_num(d, "z_scan_max", cfg.diagnostics.z_scan_max);
        cfg.diagnostics.n_z = std::size_t(get_num(d, "n_z", double(cfg.diagnostics.n_z)));
        cfg.diagnostics.pump_threshold =
            get_num(d, "pump_threshold", cfg.diagnostics.pump_threshold);
        cfg.diagnostics.z_pump_scan = get_list(d, "z_pump_scan");
    }
    if (j.contains("sweep")) {
        const auto& s = j["sweep"];
        SweepSpec sw;
        sw.q_values = get_list(s, "q");
        sw.t_d_values = get_list(s, "t_d");
        sw.a_values = get_list(s, "a");
        cfg.sweep = sw;
    }
    if (j.contains("compare"))
        cfg.compare_tolerance = get_num(j["compare"], "tolerance", cfg.compare_tolerance);

    try {
        cfg.medium.validate();
        if (cfg.grid) cfg.grid->validate();
        cfg.oracle.validate();
        if (!cfg.sampled_path) {
            if (!(cfg.a > 0.0)) throw InvalidParameterError("config: pulses.a must be > 0");
            if (!(cfg.T > 0.0)) throw InvalidParameterError("config: pulses.T must be > 0");
        }
    } catch (const InvalidParameterError& e) {
        throw ConfigError(e.what());
    }
    return cfg;
}

RunConfig load_config(const std::string& path) {
    return parse_config(read_text_file(path));
}

namespace {

// Figure presets. Captions fix q, t_d and the z ranges; the pulse peak and
// grid are repo defaults (aT = 10, tau in [-8, 8 + t_d], 2048 points).
// fig2 uses t_d = 5 so the q = 2 curve shows the fold at z = 0.03.
const char* kFig2 = R"json({
  "medium": {"kind": "lambda", "q_ratio": 2.0},
  "pulses": {"a": 10.0, "T": 1.0, "t_d": 5.0},
  "grid": {"z": [0.0, 0.03]},
  "sweep": {"q": [0.5, 1.0, 2.0]}
})json";

const char* kFig3 = R"json({
  "medium": {"kind": "lambda", "q_ratio": 0.5},
  "pulses": {"a": 10.0, "T": 1.0, "t_d": 2.5},
  "grid": {"z": [0.0, 0.3, 0.6, 0.9, 1.2, 1.5, 1.8, 2.1, 2.4, 2.7, 3.0, 3.3]}
})json";

const char* kFig4 = R"json({
  "medium": {"kind": "lambda", "q_ratio": 1.0},
  "pulses": {"a": 10.0, "T": 1.0, "t_d": 2.5},
  "grid": {"z": [0.0, 0.3, 0.6, 0.9, 1.2, 1.5, 1.8, 2.1, 2.4, 2.7, 3.0, 3.3]}
})json";

const char* kFig5 = R"json({
  "medium": {"kind": "lambda", "q_ratio": 1.0},
  "pulses": {"a": 10.0, "T": 1.0, "t_d": 5.0},
  "grid": {"z": [0.0, 0.2, 0.4, 0.6, 0.8, 1.0, 1.2, 1.4, 1.6, 1.8, 2.0]},
  "sweep": {"q": [0.5, 1.0], "t_d": [2.5, 5.0]}
})json";

const char* kFig6 = R"json({
  "medium": {"kind": "lambda", "q_ratio": 0.001},
  "pulses": {"a": 10.0, "T": 1.0, "t_d": 2.5},
  "grid": {"z": [0.0, 1.0, 2.0, 3.0]}
})json";

}  // namespace

std::optional<std::string> preset_config(const std::string& name) {
    if (name == "fig2") return std::string(kFig2);
    if (name == "fig3") return std::string(kFig3);
    if (name == "fig4") return std::string(kFig4);
    if (name == "fig5") return std::string(kFig5);
    if (name == "fig6") return std::string(kFig6);
    return std::nullopt;
}

std::vector<std::string> preset_names() {
    return {"fig2", "fig3", "fig4", "fig5", "fig6"};
}

}  // namespace tristate
