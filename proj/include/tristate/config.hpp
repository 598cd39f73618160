#pragma once

#include <optional>
#include <string>

#include "tristate/diagnostics.hpp"
#include "tristate/oracle.hpp"

namespace tristate {

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct SweepSpec {
    std::vector<double> q_values;
    std::vector<double> t_d_values;
    std::vector<double> a_values;

    std::size_t cell_count() const {
        auto n = [](const std::vector<double>& v) { return v.empty() ? 1 : v.size(); };
        return n(q_values) * n(t_d_values) * n(a_values);
    }
};

/// Everything a run needs, read from one JSON config file.
struct RunConfig {
    MediumParams medium;
    double a = 10.0;
    double T = 1.0;
    double t_d = 2.5;
    std::optional<std::string> sampled_path;
    std::optional<Grid> grid;  // absent -> defaults from the pulse parameters
    OracleConfig oracle;
    DiagnosticsOptions diagnostics;
    std::optional<SweepSpec> sweep;
    double compare_tolerance = 0.05;

    DimensionlessProblem problem() const;
    Grid effective_grid() const;
};

RunConfig parse_config(const std::string& json_text);
RunConfig load_config(const std::string& path);

/// Built-in figure presets (fig2..fig6); returns the preset's JSON text.
std::optional<std::string> preset_config(const std::string& name);
std::vector<std::string> preset_names();

}  // namespace tristate
