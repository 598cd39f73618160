#pragma once

#include <complex>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace tristate {

// ---------------------------------------------------------------------------
// Errors
// ---------------------------------------------------------------------------

struct InvalidParameterError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct DomainError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// No sign change of the characteristic residual inside the scan window.
struct BracketError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Characteristic fold (multivalued launch map) where a unique value is required.
struct FoldError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// f(theta) = 0 makes the total Rabi frequency undefined (Xi/V sign patterns).
struct SingularityError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct AdiabaticityError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct StepSizeError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct DivergenceError : std::runtime_error {
    std::size_t last_stable_slice = 0;
    DivergenceError(const std::string& msg, std::size_t slice)
        : std::runtime_error(msg), last_stable_slice(slice) {}
};

struct AlignmentError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// ---------------------------------------------------------------------------
// Domain types
// ---------------------------------------------------------------------------

/// Three-level coupling topology.
enum class SystemKind { Lambda, Xi, Vee };

struct SignPair {
    int s_p = +1;
    int s_s = +1;
};

/// Sign substitutions applied to the couplings q_p, q_s in the propagation
/// equations: Lambda -> (+,+), Xi -> (+,-), Vee -> (-,-).
constexpr SignPair system_signs(SystemKind kind) {
    switch (kind) {
        case SystemKind::Lambda: return {+1, +1};
        case SystemKind::Xi:     return {+1, -1};
        case SystemKind::Vee:    return {-1, -1};
    }
    return {+1, +1};
}

const char* to_string(SystemKind kind);
std::optional<SystemKind> system_kind_from_string(const std::string& s);

struct MediumParams {
    SystemKind kind = SystemKind::Lambda;
    double q_ratio = 1.0;   // q = q_p / q_s, dimensionless, > 0
    double delta_p = 0.0;   // one-photon detuning, units 1/T
    double gamma   = 0.0;   // upper-level decay rate, units 1/T

    void validate() const {
        if (!(q_ratio > 0.0))
            throw InvalidParameterError("medium: q_ratio must be > 0");
        if (gamma < 0.0)
            throw InvalidParameterError("medium: gamma must be >= 0");
    }
};

/// Uniform time grid plus the ordered list of propagation lengths.
struct Grid {
    double tau_min = -8.0;
    double tau_max = 8.0;
    std::size_t n_tau = 2048;
    std::vector<double> z_values = {0.0};

    void validate() const;
    double dtau() const { return (tau_max - tau_min) / double(n_tau - 1); }
    double tau_at(std::size_t i) const { return tau_min + double(i) * dtau(); }
    std::vector<double> taus() const;
};

/// Per-cell field record of the adiabatic/oracle solution.
struct FieldCell {
    double omega_p = 0.0;
    double omega_s = 0.0;
    double w_total = 0.0;
    double theta   = 0.0;
    double phi_p   = 0.0;
    double phi_s   = 0.0;
};

/// Complex level amplitudes at one (z, tau) cell.
struct AmplitudeCell {
    std::complex<double> b1{1.0, 0.0};
    std::complex<double> b2{0.0, 0.0};
    std::complex<double> b3{0.0, 0.0};

    double norm() const {
        return std::norm(b1) + std::norm(b2) + std::norm(b3);
    }
};

/// Field grid over (z, tau); row-major, tau fastest.
struct FieldState {
    std::vector<double> z_values;
    std::vector<double> taus;
    std::vector<FieldCell> cells;

    const FieldCell& at(std::size_t iz, std::size_t it) const {
        return cells[iz * taus.size() + it];
    }
    FieldCell& at(std::size_t iz, std::size_t it) {
        return cells[iz * taus.size() + it];
    }
};

}  // namespace tristate
