#include "tristate/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include <json.hpp>

#include "tristate/parallel.hpp"

namespace tristate {

BreakdownResult breakdown_length(const DimensionlessProblem& problem,
                                 double z_scan_max, std::size_t n_z) {
    if (!(z_scan_max > 0.0))
        throw InvalidParameterError("breakdown_length: z_scan_max must be > 0");
    CharacteristicSolver chars(problem);

    BreakdownResult res;
    const double qp = problem.q_p_signed(), qs = problem.q_s_signed();
    const auto taus = problem.grid.taus();
    for (double tau : taus) {
        if ((qp - qs) * problem.pulses.theta0_deriv(tau) > 0.0) {
            res.sign_condition_met = true;
            break;
        }
    }

    // log-spaced scan, refined twice around the first fold-positive level
    const double z_lo = z_scan_max * 1e-4;
    auto fold_at = [&](double z) { return !chars.fold_free(z); };

    double lo = 0.0, hi = -1.0;
    double prev = 0.0;
    for (std::size_t i = 0; i < n_z; ++i) {
        double t = double(i) / double(n_z - 1);
        double z = z_lo * std::pow(z_scan_max / z_lo, t);
        if (fold_at(z)) {
            lo = prev;
            hi = z;
            break;
        }
        prev = z;
    }
    if (hi < 0.0) return res;
    for (int pass = 0; pass < 2; ++pass) {
        const std::size_t m = 8;
        double step = (hi - lo) / double(m);
        for (std::size_t i = 1; i <= m; ++i) {
            double z = lo + double(i) * step;
            if (fold_at(z)) {
                hi = z;
                lo = z - step;
                break;
            }
        }
    }
    res.z_break = hi;
    return res;
}

double z_pump_estimate(double q) {
    if (!(q > 0.0))
        throw InvalidParameterError("z_pump_estimate: q must be > 0");
    return (2.0 + q) / (q * q);
}

std::optional<double> z_pump_measured(const DimensionlessProblem& problem,
                                      double threshold,
                                      const std::vector<double>& z_scan) {
    if (!(threshold > 0.0 && threshold < 1.0))
        throw InvalidParameterError("z_pump_measured: threshold must be in (0, 1)");
    AdiabaticSolver solver(problem);
    const auto taus = problem.grid.taus();

    double entrance_peak = 0.0;
    for (double tau : taus)
        entrance_peak = std::max(entrance_peak, problem.pulses.omega_p0(tau));
    const double limit = threshold * entrance_peak;

    for (double z : z_scan) {
        auto rs = solver.solve_slice(z, taus);
        double peak = 0.0;
        for (std::size_t i = 0; i < taus.size(); ++i) {
            double w = solver.total_rabi(rs[i], taus[i]);
            peak = std::max(peak, w * std::sin(solver.theta(rs[i])));
        }
        if (peak < limit) return z;
    }
    return std::nullopt;
}

double z_stirap_estimate(double t_d, double T, std::optional<double> q) {
    if (t_d < 0.0)
        throw InvalidParameterError("z_stirap_estimate: t_d must be >= 0");
    if (!(T > 0.0))
        throw InvalidParameterError("z_stirap_estimate: T must be > 0");
    double z = t_d / (2.0 * T);
    if (q) z = std::min(z, z_pump_estimate(*q));
    return z;
}

double transfer_efficiency(const AdiabaticSolver& solver, double z) {
    const double tau_end = solver.problem().grid.tau_max;
    auto r = solver.solve_characteristic(z, tau_end);
    if (r.fold_flag) {
        std::ostringstream msg;
        msg << "transfer_efficiency: characteristic fold at z=" << z
            << " before tau_end=" << tau_end << " (launch " << r.xi << ")";
        throw FoldError(msg.str());
    }
    double s = std::sin(solver.theta(r));
    return s * s;
}

double transfer_efficiency(const DimensionlessProblem& problem, double z) {
    AdiabaticSolver solver(problem);
    return transfer_efficiency(solver, z);
}

namespace {

double conserved_density(const DimensionlessProblem& problem, const FieldCell& c) {
    const auto sg = problem.signs();
    return sg.s_p * c.omega_p * c.omega_p / problem.q() +
           sg.s_s * c.omega_s * c.omega_s;
}

}  // namespace

double conservation_residual(const DimensionlessProblem& problem,
                             const FieldState& history) {
    const std::size_t nz = history.z_values.size();
    const std::size_t nt = history.taus.size();
    if (nz < 2)
        throw InvalidParameterError("conservation_residual: need at least two z slices");
    std::vector<double> integral(nz, 0.0);
    for (std::size_t iz = 0; iz < nz; ++iz) {
        double acc = 0.0;
        for (std::size_t it = 0; it + 1 < nt; ++it) {
            double d0 = conserved_density(problem, history.at(iz, it));
            double d1 = conserved_density(problem, history.at(iz, it + 1));
            acc += 0.5 * (history.taus[it + 1] - history.taus[it]) * (d0 + d1);
        }
        integral[iz] = acc;
    }
    double ref = std::fabs(integral[0]);
    if (ref == 0.0) ref = 1.0;
    double worst = 0.0;
    for (std::size_t iz = 1; iz < nz; ++iz)
        worst = std::max(worst, std::fabs(integral[iz] - integral[0]) / ref);
    return worst;
}

double pointwise_conservation_residual(const DimensionlessProblem& problem,
                                       const FieldState& history) {
    const std::size_t nz = history.z_values.size();
    const std::size_t nt = history.taus.size();
    if (nz < 2)
        throw InvalidParameterError("conservation_residual: need at least two z slices");
    const double a = problem.amplitude_scale();
    const double floor = 1e-6 * a * a;  // skip cells with no photons to conserve
    double worst = 0.0;
    for (std::size_t it = 0; it < nt; ++it) {
        double ref = conserved_density(problem, history.at(0, it));
        if (std::fabs(ref) < floor) continue;
        for (std::size_t iz = 1; iz < nz; ++iz) {
            double d = conserved_density(problem, history.at(iz, it));
            worst = std::max(worst, std::fabs(d - ref) / std::fabs(ref));
        }
    }
    return worst;
}

std::string DiagnosticsReport::to_json() const {
    nlohmann::json j;
    j["z_break"] = z_break ? nlohmann::json(*z_break) : nlohmann::json(nullptr);
    j["z_pump_est"] = z_pump_est;
    j["z_pump_measured"] =
        z_pump_measured ? nlohmann::json(*z_pump_measured) : nlohmann::json(nullptr);
    j["z_stirap_est"] = z_stirap_est;
    auto curve = nlohmann::json::array();
    for (const auto& [z, eff] : efficiency_curve) curve.push_back({z, eff});
    j["efficiency_curve"] = curve;
    j["conservation_residual"] = conservation_residual;
    j["sign_condition_met"] = sign_condition_met;
    return j.dump(2);
}

DiagnosticsReport run_diagnostics(const DimensionlessProblem& problem,
                                  const DiagnosticsOptions& opts) {
    DiagnosticsReport rep;

    auto breakdown = breakdown_length(problem, opts.z_scan_max, opts.n_z);
    rep.z_break = breakdown.z_break;
    rep.sign_condition_met = breakdown.sign_condition_met;

    rep.z_pump_est = z_pump_estimate(problem.q());
    double t_d = problem.pulses.is_sech() ? problem.pulses.sech_params().t_d : 0.0;
    rep.z_stirap_est = z_stirap_estimate(t_d, 1.0, problem.q());

    std::vector<double> scan = opts.z_pump_scan;
    if (scan.empty()) {
        for (int i = 1; i <= 48; ++i)
            scan.push_back(opts.z_scan_max * double(i) / 48.0);
    }
    rep.z_pump_measured = z_pump_measured(problem, opts.pump_threshold, scan);

    AdiabaticSolver solver(problem);
    for (double z : problem.grid.z_values) {
        try {
            rep.efficiency_curve.emplace_back(z, transfer_efficiency(solver, z));
        } catch (const FoldError&) {
            // undefined past a fold; omit the point
        }
    }

    FieldState fields = solver.evaluate();
    if (fields.z_values.size() >= 2)
        rep.conservation_residual = pointwise_conservation_residual(problem, fields);
    return rep;
}

}  // namespace tristate
