#pragma once

#include "tristate/adiabatic.hpp"
#include "tristate/oracle.hpp"

namespace tristate {

struct BreakdownResult {
    std::optional<double> z_break;
    /// Necessary condition (q_p - q_s) * dtheta0/dxi > 0 holds somewhere
    /// (signed couplings).
    bool sign_condition_met = false;
};

/// Smallest z in a refining scan at which any tau exhibits a characteristic
/// fold; absent when none occurs up to z_scan_max.
BreakdownResult breakdown_length(const DimensionlessProblem& problem,
                                 double z_scan_max, std::size_t n_z = 64);

/// Pump-depletion length estimate (2 + q) / q^2.
double z_pump_estimate(double q);

/// Smallest scanned z at which the pump peak drops below threshold times its
/// entrance peak.
std::optional<double> z_pump_measured(const DimensionlessProblem& problem,
                                      double threshold,
                                      const std::vector<double>& z_scan);

/// STIRAP penetration length estimate t_d / (2 T), optionally clamped to the
/// pump-depletion estimate (it cannot exceed the length at which the pump is
/// gone).
double z_stirap_estimate(double t_d, double T,
                         std::optional<double> q = std::nullopt);

/// Final-state population sin^2(theta(z, tau_end)) with tau_end at the grid
/// edge. Throws FoldError when the defining characteristic is folded.
double transfer_efficiency(const DimensionlessProblem& problem, double z);
double transfer_efficiency(const AdiabaticSolver& solver, double z);

/// Max over z slices of the relative drift of the tau-integrated conserved
/// photon combination (sum for Lambda/Vee, difference for Xi).
double conservation_residual(const DimensionlessProblem& problem,
                             const FieldState& history);

/// Max over z slices and tau of the relative pointwise drift of the conserved
/// photon density.
double pointwise_conservation_residual(const DimensionlessProblem& problem,
                                       const FieldState& history);

struct DiagnosticsReport {
    std::optional<double> z_break;
    double z_pump_est = 0.0;
    std::optional<double> z_pump_measured;
    double z_stirap_est = 0.0;
    std::vector<std::pair<double, double>> efficiency_curve;
    double conservation_residual = 0.0;
    bool sign_condition_met = false;

    std::string to_json() const;
};

struct DiagnosticsOptions {
    double z_scan_max = 10.0;
    std::size_t n_z = 64;
    double pump_threshold = 0.1;
    std::vector<double> z_pump_scan;  // empty -> derived from z_scan_max
};

DiagnosticsReport run_diagnostics(const DimensionlessProblem& problem,
                                  const DiagnosticsOptions& opts = {});

}  // namespace tristate
