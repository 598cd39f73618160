#pragma once

#include <cmath>
#include <variant>
#include <vector>

#include "tristate/types.hpp"

namespace tristate {

/// Analytic hyperbolic-secant pulse pair. After normalization the width T is
/// the time unit, so internally T == 1 and amplitudes are in units of 1/T:
///   omega_p0(tau) = a / cosh(tau - t_d),  omega_s0(tau) = a / cosh(tau).
/// Counter-intuitive ordering corresponds to t_d > 0 (Stokes peaks first).
struct SechShape {
    double a   = 10.0;
    double t_d = 2.5;
};

/// Tabulated entrance envelopes on a strictly increasing time grid.
struct SampledShape {
    std::vector<double> times;
    std::vector<double> omega_p;
    std::vector<double> omega_s;
};

class EntrancePulses {
public:
    EntrancePulses() : shape_(SechShape{}) {}
    explicit EntrancePulses(SechShape s);
    explicit EntrancePulses(SampledShape s);

    bool is_sech() const { return std::holds_alternative<SechShape>(shape_); }
    const SechShape& sech_params() const { return std::get<SechShape>(shape_); }
    const SampledShape& sampled() const { return std::get<SampledShape>(shape_); }

    /// Peak amplitude scale (a for sech, max envelope for sampled).
    double peak() const { return peak_; }

    double omega_p0(double tau) const;
    double omega_s0(double tau) const;
    double w0_squared(double tau) const {
        double p = omega_p0(tau), s = omega_s0(tau);
        return p * p + s * s;
    }

    /// Entrance mixing angle theta0 = atan(omega_p0/omega_s0) in [0, pi/2].
    /// Evaluated in the log domain for sech pulses, so the deep tails hit the
    /// analytic limiting value atan(exp(+-t_d)) instead of 0/0.
    double theta0(double tau) const;

    /// d theta0 / d tau.
    double theta0_deriv(double tau) const;

    /// Limits theta0(-inf), theta0(+inf).
    double theta0_limit_lo() const;
    double theta0_limit_hi() const;

    /// Signed entrance flux density  s_s*omega_p0^2 + s_p*q*omega_s0^2,
    /// the integrand of the characteristic equation's left-hand side.
    double flux_density(double tau, double q, SignPair sg) const;

    /// Integral of flux_density over [xi, tau], closed form (tanh) for sech,
    /// trapezoid on the sample grid otherwise. xi > tau gives the signed
    /// (negative of the reversed) integral.
    double flux_integral(double xi, double tau, double q, SignPair sg) const;

private:
    std::variant<SechShape, SampledShape> shape_;
    double peak_ = 0.0;
    // precomputed tables for the sampled variant
    std::vector<double> theta0_samples_;
    std::vector<double> cum_p2_;  // cumulative trapezoid of omega_p^2
    std::vector<double> cum_s2_;
};

/// Sech pulse pair with peak Rabi a, width T and pump delay t_d (same units
/// as T). Normalizes to T = 1.
EntrancePulses make_sech_pulses(double a, double T, double t_d);

/// Photon-fluence form used by the spec: integral over [xi, tau] of
/// (q_s*omega_p0^2 + q_p*omega_s0^2) with q_s = 1, q_p = q. Requires xi <= tau.
double photon_fluence(const EntrancePulses& pulses, double xi, double tau,
                      double q, SignPair sg = {+1, +1});

/// Coupling-weighted factor f(theta) = Q_s sin^2(theta) + Q_p cos^2(theta)
/// with the signed couplings Q_s = s_s, Q_p = s_p*q (internal units q_s = 1).
inline double f_theta(double theta, double q_p_signed, double q_s_signed) {
    double s = std::sin(theta), c = std::cos(theta);
    return q_s_signed * s * s + q_p_signed * c * c;
}

/// d f / d theta = (Q_s - Q_p) sin(2 theta).
inline double f_theta_deriv(double theta, double q_p_signed, double q_s_signed) {
    return (q_s_signed - q_p_signed) * std::sin(2.0 * theta);
}

/// Self-contained dimensionless problem: time in units of T, Rabi
/// frequencies in 1/T, q_s = 1, q_p = q_ratio, lengths as z = x*q_s/(a^2*T).
struct DimensionlessProblem {
    MediumParams medium;
    EntrancePulses pulses;
    Grid grid;

    double q() const { return medium.q_ratio; }
    SignPair signs() const { return system_signs(medium.kind); }
    double q_p_signed() const { return signs().s_p * medium.q_ratio; }
    double q_s_signed() const { return double(signs().s_s); }
    double amplitude_scale() const { return pulses.peak(); }
};

DimensionlessProblem normalize(const MediumParams& medium,
                               const EntrancePulses& pulses,
                               const Grid& grid);

/// Dimensionless propagation length from physical inputs.
inline double z_from_physical(double x, double q_s, double a, double T) {
    return x * q_s / (a * a * T);
}

}  // namespace tristate
