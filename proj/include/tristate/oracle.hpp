#pragma once

#include <complex>

#include "tristate/pulses.hpp"

namespace tristate {

enum class InitialState {
    Trapped,  // (cos theta0, 0, -sin theta0) at the left grid edge
    Ground,   // (1, 0, 0)
};

struct OracleConfig {
    double dz = 0.0025;            // z step of the Heun march
    std::size_t store_stride = 0;  // keep every k-th slice; 0 = only z list
    InitialState init = InitialState::Trapped;
    double stability_limit = 0.1;  // dt * max(W, |delta_p|, gamma) bound
    double divergence_limit = 100.0;  // |E| in units of the entrance peak

    void validate() const {
        if (!(dz > 0.0)) throw InvalidParameterError("oracle: dz must be > 0");
    }
};

/// One stored z slice: complex envelopes and level amplitudes on the tau grid.
struct OracleSlice {
    double z = 0.0;
    std::vector<std::complex<double>> ep;
    std::vector<std::complex<double>> es;
    std::vector<AmplitudeCell> amps;
};

struct FieldHistory {
    std::vector<double> taus;
    std::vector<OracleSlice> slices;

    FieldState to_field_state() const;
};

struct SliceSources {
    std::vector<std::complex<double>> dep_dz;
    std::vector<std::complex<double>> des_dz;
};

/// Amplitude/phase view of the complex rates, with the phase rate floored to
/// zero wherever the corresponding envelope sits below the tail floor.
struct RateView {
    std::vector<double> d_omega_p, d_omega_s, d_phi_p, d_phi_s;
};

class OracleSolver {
public:
    OracleSolver(const DimensionlessProblem& problem, OracleConfig config = {});

    /// RK4 march of the three-level amplitudes along tau for one field slice.
    std::vector<AmplitudeCell> integrate_slice(
        const std::vector<std::complex<double>>& ep,
        const std::vector<std::complex<double>>& es) const;

    /// Right-hand sides of the reduced field equations at each tau node.
    SliceSources polarization_sources(
        const std::vector<AmplitudeCell>& amps,
        const std::vector<std::complex<double>>& ep,
        const std::vector<std::complex<double>>& es) const;

    RateView decompose_rates(const SliceSources& src,
                             const std::vector<std::complex<double>>& ep,
                             const std::vector<std::complex<double>>& es) const;

    /// Heun march in z up to z_max, storing the entrance slice, every slice
    /// matching the problem's z list, and (optionally) every store_stride-th
    /// step.
    FieldHistory propagate(double z_max) const;

    const OracleConfig& config() const { return cfg_; }
    const DimensionlessProblem& problem() const { return prob_; }

private:
    DimensionlessProblem prob_;
    OracleConfig cfg_;
    double dtau_ = 0.0;
    double tail_floor_ = 0.0;

    AmplitudeCell initial_amplitudes() const;
    void check_stability(const std::vector<std::complex<double>>& ep,
                         const std::vector<std::complex<double>>& es) const;
};

/// Per-slice error metrics between the adiabatic solution and an oracle run.
/// The primary envelope metrics are normalized by the slice's total-Rabi L2
/// norm (the field scale), which stays well conditioned while a pulse is
/// being depleted; the self_* variants divide by the envelope's own norm.
struct SliceErrors {
    double z = 0.0;
    double l2_omega_p = 0.0, linf_omega_p = 0.0;
    double l2_omega_s = 0.0, linf_omega_s = 0.0;
    double self_l2_omega_p = 0.0, self_l2_omega_s = 0.0;
    double l2_theta = 0.0;       // normalized by the pi/2 angle range
    double self_l2_theta = 0.0;
    double linf_pop2 = 0.0;
    bool fold_present = false;
};

class AdiabaticSolver;

std::vector<SliceErrors> compare(const AdiabaticSolver& adiabatic,
                                 const FieldHistory& history);

/// Relative L2 distance between two sampled fields on a shared grid.
double relative_l2(const std::vector<double>& test, const std::vector<double>& ref);

/// tau-integrated conserved photon combination of one oracle slice:
/// s_p*|Ep|^2/q_p + s_s*|Es|^2/q_s (sum for Lambda/Vee, difference for Xi).
double conserved_photon_integral(const DimensionlessProblem& prob,
                                 const std::vector<double>& taus,
                                 const std::vector<std::complex<double>>& ep,
                                 const std::vector<std::complex<double>>& es);

}  // namespace tristate
