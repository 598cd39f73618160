#pragma once

#include "tristate/characteristic.hpp"

namespace tristate {

struct Envelopes {
    double omega_p = 0.0;
    double omega_s = 0.0;
};

/// Exact solution of the reduced propagation equations by the method of
/// characteristics: theta is transported along the launch map, W follows from
/// photon-number conservation, envelopes are W sin(theta), W cos(theta).
/// Field phases stay at their entrance value (zero) in this approximation.
class AdiabaticSolver {
public:
    explicit AdiabaticSolver(const DimensionlessProblem& problem,
                             CharacteristicOptions opts = {});

    const DimensionlessProblem& problem() const { return prob_; }
    const CharacteristicSolver& characteristics() const { return chars_; }

    CharacteristicResult solve_characteristic(double z, double tau) const {
        return chars_.solve(z, tau);
    }

    /// Characteristics for a whole tau slice (parallel chunks, warm-started
    /// within each chunk where the launch map is monotone).
    std::vector<CharacteristicResult> solve_slice(double z,
                                                  const std::vector<double>& taus,
                                                  std::size_t jobs = 0) const;

    /// theta(z, tau) = theta0(xi(z, tau)).
    double theta(double z, double tau) const;
    double theta(const CharacteristicResult& r) const;

    /// Total Rabi frequency W from Eq.-(10)-style conservation.
    double total_rabi(double z, double tau) const;
    double total_rabi(const CharacteristicResult& r, double tau) const;

    Envelopes envelopes(double z, double tau) const;

    /// d theta/d tau at fixed z via implicit differentiation of the residual.
    double theta_dot(double z, double tau) const;
    double theta_dot(const CharacteristicResult& r, double tau) const;

    /// Level amplitudes with the first non-adiabatic correction.
    AmplitudeCell amplitudes(double z, double tau) const;

    /// Characteristic slope d tau/d z = a^2 f(theta)/W^2 (wave-frame delay
    /// rate per unit dimensionless length).
    double group_velocity_slope(double z, double tau) const;

    /// Evaluate the full (z, tau) grid; cells are independent and evaluated
    /// in parallel. Folded cells carry the largest-launch-time branch.
    FieldState evaluate(std::size_t jobs = 0) const;

    /// Count of cells whose characteristic is folded at a given z.
    std::size_t fold_cell_count(double z) const;

private:
    DimensionlessProblem prob_;
    CharacteristicSolver chars_;
    double tail_floor_ = 0.0;
};

}  // namespace tristate
