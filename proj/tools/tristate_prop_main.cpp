#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "tristate/adiabatic.hpp"
#include "tristate/config.hpp"
#include "tristate/diagnostics.hpp"
#include "tristate/io.hpp"
#include "tristate/oracle.hpp"
#include "tristate/parallel.hpp"

namespace ts = tristate;
namespace fs = std::filesystem;

namespace {

enum ExitCode {
    kOk = 0,
    kConfigError = 2,
    kFoldAbort = 3,
    kDivergence = 4,
    kIoError = 5,
};

int log_level() {
    const char* env = std::getenv("TRISTATE_LOG");
    if (!env) return 1;
    std::string v(env);
    if (v == "quiet" || v == "0") return 0;
    if (v == "debug" || v == "2") return 2;
    return 1;
}

void log_info(const std::string& msg) {
    if (log_level() >= 1) std::cerr << "tristate-prop: " << msg << "\n";
}

struct StageClock {
    using clock = std::chrono::steady_clock;
    clock::time_point t0 = clock::now();
    double take() {
        auto t1 = clock::now();
        double s = std::chrono::duration<double>(t1 - t0).count();
        t0 = t1;
        return s;
    }
};

struct RunContext {
    std::string config_path;
    std::string out_dir;
    ts::RunConfig cfg;
    ts::RunManifest manifest;
    StageClock clock;
    StageClock total;

    void stage(const std::string& name) {
        manifest.stage_seconds[name] = clock.take();
    }
    void finish(const std::string& command) {
        manifest.command = command;
        manifest.config_path = config_path;
        manifest.out_dir = out_dir;
        manifest.version = ts::kToolVersion;
        manifest.duration_seconds = total.take();
        manifest.write((fs::path(out_dir) / "manifest.json").string());
    }
};

ts::RunConfig resolve_config(const std::string& config_path, const std::string& preset,
                             std::string& resolved_path) {
    if (!preset.empty()) {
        auto text = ts::preset_config(preset);
        if (!text) throw ts::ConfigError("unknown preset: " + preset);
        resolved_path = "preset:" + preset;
        return ts::parse_config(*text);
    }
    if (config_path.empty())
        throw ts::ConfigError("either --config or --preset is required");
    resolved_path = config_path;
    return ts::load_config(config_path);
}

std::string config_echo(const ts::RunConfig& cfg) {
    auto g = cfg.effective_grid();
    std::string s = "kind=";
    s += ts::to_string(cfg.medium.kind);
    s += " q=" + ts::format_double(cfg.medium.q_ratio);
    s += " delta_p=" + ts::format_double(cfg.medium.delta_p);
    s += " gamma=" + ts::format_double(cfg.medium.gamma);
    s += " a=" + ts::format_double(cfg.a) + " T=" + ts::format_double(cfg.T);
    s += " t_d=" + ts::format_double(cfg.t_d);
    s += " n_tau=" + std::to_string(g.n_tau);
    s += " dz=" + ts::format_double(cfg.oracle.dz);
    return s;
}

// populations attached to the adiabatic fields: dark state plus the
// first-order upper-level population; folded cells carry NaN for pop2
void adiabatic_rows(const ts::AdiabaticSolver& solver, ts::CsvWriter& csv,
                    std::size_t jobs) {
    const auto& prob = solver.problem();
    const auto taus = prob.grid.taus();
    for (double z : prob.grid.z_values) {
        auto rs = solver.solve_slice(z, taus, jobs);
        for (std::size_t it = 0; it < taus.size(); ++it) {
            double th = solver.theta(rs[it]);
            double w = solver.total_rabi(rs[it], taus[it]);
            double pop2 = std::numeric_limits<double>::quiet_NaN();
            try {
                double td = solver.theta_dot(rs[it], taus[it]);
                double ratio = w > 0.0 ? td / w : 0.0;
                pop2 = ratio * ratio;
            } catch (const ts::FoldError&) {
            }
            double c = std::cos(th), s = std::sin(th);
            csv.row({z, taus[it], w * s, w * c, 0.0, 0.0, c * c, pop2, s * s});
        }
    }
}

void oracle_rows(const ts::FieldHistory& hist, ts::CsvWriter& csv) {
    for (const auto& slice : hist.slices) {
        for (std::size_t i = 0; i < hist.taus.size(); ++i) {
            double p = std::abs(slice.ep[i]);
            double s = std::abs(slice.es[i]);
            csv.row({slice.z, hist.taus[i], p, s,
                     p > 0.0 ? std::arg(slice.ep[i]) : 0.0,
                     s > 0.0 ? std::arg(slice.es[i]) : 0.0,
                     std::norm(slice.amps[i].b1), std::norm(slice.amps[i].b2),
                     std::norm(slice.amps[i].b3)});
        }
    }
}

const std::vector<std::string> kFieldColumns = {
    "z", "tau", "omega_p", "omega_s", "phi_p", "phi_s", "pop1", "pop2", "pop3"};

int cmd_simulate(RunContext& ctx, const std::string& solver_kind, std::size_t jobs,
                 bool fail_on_fold) {
    auto prob = ctx.cfg.problem();
    std::size_t fold_cells = 0;

    if (solver_kind == "adiabatic" || solver_kind == "both") {
        ts::AdiabaticSolver solver(prob);
        std::string name = solver_kind == "both" ? "fields_adiabatic.csv" : "fields.csv";
        ts::CsvWriter csv((fs::path(ctx.out_dir) / name).string(), kFieldColumns);
        adiabatic_rows(solver, csv, jobs);
        csv.close();
        ctx.manifest.outputs.push_back(name);
        for (double z : prob.grid.z_values) fold_cells += solver.fold_cell_count(z);
        ctx.stage("adiabatic");
    }
    if (solver_kind == "oracle" || solver_kind == "both") {
        ts::OracleSolver oracle(prob, ctx.cfg.oracle);
        auto hist = oracle.propagate(prob.grid.z_values.back());
        std::string name = solver_kind == "both" ? "fields_oracle.csv" : "fields.csv";
        ts::CsvWriter csv((fs::path(ctx.out_dir) / name).string(), kFieldColumns);
        oracle_rows(hist, csv);
        csv.close();
        ctx.manifest.outputs.push_back(name);
        ctx.manifest.notes["oracle_steps"] = std::to_string(
            std::llround(prob.grid.z_values.back() / ctx.cfg.oracle.dz));
        ctx.stage("oracle");
    }

    ctx.manifest.notes["fold_cells"] = std::to_string(fold_cells);
    if (fold_cells > 0) {
        log_info("characteristic folds in " + std::to_string(fold_cells) +
                 " grid cells (largest-launch branch written)");
        if (fail_on_fold) {
            ctx.finish("simulate");
            return kFoldAbort;
        }
    }
    ctx.finish("simulate");
    return kOk;
}

int cmd_diagnose(RunContext& ctx) {
    auto prob = ctx.cfg.problem();
    auto rep = ts::run_diagnostics(prob, ctx.cfg.diagnostics);
    ctx.stage("diagnostics");
    ts::write_text_file_atomic((fs::path(ctx.out_dir) / "diagnostics.json").string(),
                               rep.to_json() + "\n");
    ctx.manifest.outputs.push_back("diagnostics.json");
    ctx.finish("diagnose");
    return kOk;
}

int cmd_compare(RunContext& ctx) {
    auto prob = ctx.cfg.problem();
    ts::AdiabaticSolver solver(prob);
    ts::OracleSolver oracle(prob, ctx.cfg.oracle);
    auto hist = oracle.propagate(prob.grid.z_values.back());
    ctx.stage("oracle");
    auto errors = ts::compare(solver, hist);
    ctx.stage("compare");

    ts::CsvWriter csv((fs::path(ctx.out_dir) / "compare.csv").string(),
                      {"z", "l2_omega_p", "l2_omega_s", "self_l2_omega_p",
                       "self_l2_omega_s", "linf_omega_p", "linf_omega_s", "l2_theta",
                       "linf_pop2", "fold_present"});
    bool pass = true;
    std::string fold_note;
    for (const auto& e : errors) {
        csv.row({e.z, e.l2_omega_p, e.l2_omega_s, e.self_l2_omega_p, e.self_l2_omega_s,
                 e.linf_omega_p, e.linf_omega_s, e.l2_theta, e.linf_pop2,
                 e.fold_present ? 1.0 : 0.0});
        bool slice_ok = e.l2_omega_p <= ctx.cfg.compare_tolerance &&
                        e.l2_omega_s <= ctx.cfg.compare_tolerance;
        if (!slice_ok) pass = false;
        if (e.fold_present && fold_note.empty())
            fold_note = "characteristic fold from z=" + ts::format_double(e.z);
    }
    csv.close();
    ctx.manifest.outputs.push_back("compare.csv");
    ctx.manifest.notes["verdict"] = pass ? "pass" : "fail";
    if (!fold_note.empty()) ctx.manifest.notes["fold"] = fold_note;
    std::cout << "compare verdict: " << (pass ? "pass" : "fail")
              << (fold_note.empty() ? "" : " (" + fold_note + ")") << "\n";
    ctx.finish("compare");
    return kOk;
}

int cmd_sweep(RunContext& ctx, std::size_t jobs) {
    if (!ctx.cfg.sweep)
        throw ts::ConfigError("sweep: config has no sweep block");
    const auto& sw = *ctx.cfg.sweep;
    if (sw.cell_count() > 10000)
        throw ts::ConfigError("sweep: grid exceeds 10^4 cells");

    const bool empty_grid =
        sw.q_values.empty() && sw.t_d_values.empty() && sw.a_values.empty();
    auto qs = sw.q_values.empty() ? std::vector<double>{ctx.cfg.medium.q_ratio}
                                  : sw.q_values;
    auto tds = sw.t_d_values.empty() ? std::vector<double>{ctx.cfg.t_d} : sw.t_d_values;
    auto as = sw.a_values.empty() ? std::vector<double>{ctx.cfg.a} : sw.a_values;
    if (empty_grid) {
        qs.clear();
        tds.clear();
        as.clear();
    }

    struct Row {
        double q, t_d, a;
        std::optional<ts::DiagnosticsReport> rep;
        std::string error;
    };
    std::vector<Row> rows(qs.size() * tds.size() * as.size());
    std::size_t idx = 0;
    for (double q : qs)
        for (double td : tds)
            for (double a : as) rows[idx++] = Row{q, td, a, std::nullopt, ""};

    ts::parallel_for(rows.size(), [&](std::size_t i) {
        Row& r = rows[i];
        try {
            ts::RunConfig cell = ctx.cfg;
            cell.medium.q_ratio = r.q;
            cell.t_d = r.t_d;
            cell.a = r.a;
            cell.grid.reset();  // grid tracks t_d unless pinned
            if (ctx.cfg.grid) {
                cell.grid = ctx.cfg.grid;
                cell.grid->tau_max = std::max(ctx.cfg.grid->tau_max, 8.0 + r.t_d);
            }
            r.rep = ts::run_diagnostics(cell.problem(), cell.diagnostics);
        } catch (const std::exception& e) {
            r.error = e.what();
        }
    }, jobs);
    ctx.stage("sweep");

    ts::CsvWriter csv((fs::path(ctx.out_dir) / "sweep.csv").string(),
                      {"index", "q", "t_d", "a", "z_break", "z_pump_est",
                       "z_pump_measured", "z_stirap_est", "efficiency_last",
                       "conservation_residual", "status"});
    for (std::size_t i = 0; i < rows.size(); ++i) {
        const Row& r = rows[i];
        auto opt = [](const std::optional<double>& v) {
            return v ? ts::format_double(*v) : std::string("");
        };
        if (r.rep) {
            const auto& d = *r.rep;
            double eff_last = d.efficiency_curve.empty()
                                  ? std::numeric_limits<double>::quiet_NaN()
                                  : d.efficiency_curve.back().second;
            csv.raw_row({std::to_string(i), ts::format_double(r.q),
                         ts::format_double(r.t_d), ts::format_double(r.a),
                         opt(d.z_break), ts::format_double(d.z_pump_est),
                         opt(d.z_pump_measured), ts::format_double(d.z_stirap_est),
                         ts::format_double(eff_last),
                         ts::format_double(d.conservation_residual), "ok"});
        } else {
            csv.raw_row({std::to_string(i), ts::format_double(r.q),
                         ts::format_double(r.t_d), ts::format_double(r.a),
                         "", "", "", "", "", "", "error: " + r.error});
        }
    }
    csv.close();
    ctx.manifest.outputs.push_back("sweep.csv");
    ctx.finish("sweep");
    return kOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"three-level pulse propagation (adiabatic solution + oracle)"};
    app.require_subcommand(1);

    std::string config_path, out_dir = ".", preset, solver_kind = "adiabatic";
    std::size_t jobs = 0;
    bool fail_on_fold = false;

    auto add_common = [&](CLI::App* cmd) {
        cmd->add_option("--config", config_path, "path to a JSON config");
        cmd->add_option("--out", out_dir, "output directory");
        cmd->add_option("--preset", preset, "figure preset (fig2..fig6)");
        cmd->add_option("--jobs", jobs, "worker threads (0 = hardware)");
    };

    auto* sim = app.add_subcommand("simulate", "run a solver and write fields.csv");
    add_common(sim);
    sim->add_option("--solver", solver_kind, "adiabatic|oracle|both")
        ->check(CLI::IsMember({"adiabatic", "oracle", "both"}));
    sim->add_flag("--fail-on-fold", fail_on_fold,
                  "exit with code 3 when characteristics fold");

    auto* diag = app.add_subcommand("diagnose", "write diagnostics.json");
    add_common(diag);

    auto* comp = app.add_subcommand("compare", "adiabatic vs oracle error metrics");
    add_common(comp);

    auto* sweep = app.add_subcommand("sweep", "diagnostics over a parameter grid");
    add_common(sweep);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? kOk : kConfigError;
    }

    RunContext ctx;
    try {
        ctx.cfg = resolve_config(config_path, preset, ctx.config_path);
        ctx.out_dir = out_dir;
        fs::create_directories(out_dir);
        ctx.manifest.notes["config_echo"] = config_echo(ctx.cfg);
        ctx.stage("setup");

        if (sim->parsed()) return cmd_simulate(ctx, solver_kind, jobs, fail_on_fold);
        if (diag->parsed()) return cmd_diagnose(ctx);
        if (comp->parsed()) return cmd_compare(ctx);
        if (sweep->parsed()) return cmd_sweep(ctx, jobs);
        return kConfigError;
    } catch (const ts::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kConfigError;
    } catch (const ts::InvalidParameterError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kConfigError;
    } catch (const ts::FoldError& e) {
        std::cerr << "fold abort: " << e.what() << "\n";
        return kFoldAbort;
    } catch (const ts::BracketError& e) {
        std::cerr << "fold abort: " << e.what() << "\n";
        return kFoldAbort;
    } catch (const ts::DivergenceError& e) {
        std::cerr << "divergence: " << e.what() << "\n";
        return kDivergence;
    } catch (const ts::StepSizeError& e) {
        std::cerr << "divergence guard: " << e.what() << "\n";
        return kDivergence;
    } catch (const ts::IoError& e) {
        std::cerr << "io error: " << e.what() << "\n";
        return kIoError;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
