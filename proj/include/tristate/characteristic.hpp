#pragma once

#include "tristate/pulses.hpp"

namespace tristate {

/// Result of inverting the implicit characteristic equation
///   F(xi, tau) = z * a^2 * f^2(theta0(xi)),
/// where F is the signed entrance photon fluence between launch time xi and
/// arrival time tau.
struct CharacteristicResult {
    double xi = 0.0;          // launch time, units of T
    bool fold_flag = false;   // >= 2 roots in the transport family
    bool saturated = false;   // root ran past the scan window (launch in the
                              // field-free tail); xi is clamped to the edge
    double denom = 1.0;       // fold denominator D at the root; theta_dot
                              // carries 1/D, folds have D -> 0
    int root_count = 1;
};

struct CharacteristicOptions {
    std::size_t prescan_points = 4096;
    double residual_tol = 1e-13;   // on |g| in units of a^2*T, an order
                                   // tighter than the 1e-12 contract
    std::size_t max_iter = 200;
    double window_lo = 0.0;        // scan window; defaults to the grid window
    double window_hi = 0.0;
};

/// Residual and root machinery for one dimensionless problem. All methods are
/// pure in (z, tau) and safe to call concurrently.
class CharacteristicSolver {
public:
    CharacteristicSolver(const DimensionlessProblem& problem,
                         CharacteristicOptions opts = {});

    /// Residual g(xi; z, tau) in units of a^2*T (divided through by a^2).
    double residual(double xi, double z, double tau) const;

    /// Fold denominator D(xi; z) = 1 + 2 z a^2 f f' theta0' / phi(xi). The
    /// arrival map tau(xi) folds exactly where D crosses zero.
    double fold_denominator(double xi, double z) const;

    /// Solve for the launch time at (z, tau). Bracketing prescan plus a
    /// bisection/secant hybrid. Multiple roots in the transport family set
    /// fold_flag and the largest xi wins.
    CharacteristicResult solve(double z, double tau) const;

    /// d(xi)/d(tau) at fixed z via implicit differentiation of the residual.
    double xi_partial_tau(const CharacteristicResult& r, double tau) const;

    /// Solve a whole tau slice at fixed z. Fold-free slices reuse the
    /// previous root as a bracket (the launch map is monotone in tau), which
    /// is much cheaper than a prescan per cell; anything else falls back to
    /// solve().
    std::vector<CharacteristicResult> solve_slice(
        double z, const std::vector<double>& taus) const;

    /// Smallest z at which the launch map folds anywhere in the window, if
    /// the coupling signs permit one. Dense scan over launch times.
    std::optional<double> first_fold_z(double z_max, std::size_t n_scan = 4096) const;

    /// True if no fold can occur at depth z (cheap dense check over launches).
    bool fold_free(double z, std::size_t n_scan = 2048) const;

    double window_lo() const { return lo_; }
    double window_hi() const { return hi_; }
    const DimensionlessProblem& problem() const { return prob_; }

private:
    DimensionlessProblem prob_;
    CharacteristicOptions opts_;
    double lo_ = 0.0, hi_ = 0.0;
    double qp_ = 1.0, qs_ = 1.0;  // signed couplings, q_s-normalized
    double a2_ = 1.0;

    double refine_root(double x0, double x1, double g0, double g1,
                       double z, double tau) const;
};

}  // namespace tristate
