#include "tristate/characteristic.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace tristate {

CharacteristicSolver::CharacteristicSolver(const DimensionlessProblem& problem,
                                           CharacteristicOptions opts)
    : prob_(problem), opts_(opts) {
    lo_ = opts_.window_lo;
    hi_ = opts_.window_hi;
    if (lo_ >= hi_) {
        lo_ = prob_.grid.tau_min;
        hi_ = prob_.grid.tau_max;
    }
    qp_ = prob_.q_p_signed();
    qs_ = prob_.q_s_signed();
    double a = prob_.amplitude_scale();
    a2_ = a * a;
}

double CharacteristicSolver::residual(double xi, double z, double tau) const {
    double f = f_theta(prob_.pulses.theta0(xi), qp_, qs_);
    double flux = prob_.pulses.flux_integral(xi, tau, prob_.q(), prob_.signs());
    return (flux - z * a2_ * f * f) / a2_;
}

double CharacteristicSolver::fold_denominator(double xi, double z) const {
    // phi = W0^2 f(theta0) identically, so D = 1 + 2 z a^2 f f' theta0'/phi
    // reduces to 1 + 2 z a^2 f' theta0' / W0^2
    double th = prob_.pulses.theta0(xi);
    double fp = f_theta_deriv(th, qp_, qs_);
    double dth = prob_.pulses.theta0_deriv(xi);
    double w02 = prob_.pulses.w0_squared(xi);
    if (w02 == 0.0) return std::numeric_limits<double>::infinity();
    return 1.0 + 2.0 * z * a2_ * fp * dth / w02;
}

double CharacteristicSolver::refine_root(double x0, double x1, double g0, double g1,
                                         double z, double tau) const {
    // bisection/secant hybrid on the bracket [x0, x1]
    double best = x0, gbest = g0;
    for (std::size_t it = 0; it < opts_.max_iter; ++it) {
        double mid;
        if (std::fabs(g1 - g0) > 1e-300) {
            mid = x1 - g1 * (x1 - x0) / (g1 - g0);  // secant
            double lo = std::min(x0, x1), hi = std::max(x0, x1);
            double guard = 0.01 * (hi - lo);
            if (!(mid > lo + guard && mid < hi - guard))
                mid = 0.5 * (x0 + x1);              // fall back to bisection
        } else {
            mid = 0.5 * (x0 + x1);
        }
        double gm = residual(mid, z, tau);
        if (std::fabs(gm) < std::fabs(gbest)) { best = mid; gbest = gm; }
        if (std::fabs(gm) < opts_.residual_tol) return mid;
        if ((g0 < 0.0) != (gm < 0.0)) {
            x1 = mid; g1 = gm;
        } else {
            x0 = mid; g0 = gm;
        }
        if (std::fabs(x1 - x0) < 1e-15 * (std::fabs(x0) + 1.0)) break;
    }
    return best;
}

CharacteristicResult CharacteristicSolver::solve(double z, double tau) const {
    if (z < 0.0)
        throw DomainError("solve_characteristic: z must be >= 0");
    CharacteristicResult res;
    if (z == 0.0) {
        // both sides vanish only at xi = tau; f^2 > 0 forces uniqueness
        res.xi = tau;
        res.denom = 1.0;
        return res;
    }

    const double f_tau = f_theta(prob_.pulses.theta0(tau), qp_, qs_);
    const bool family_positive = f_tau >= 0.0;

    const std::size_t n = opts_.prescan_points;
    const double h = (hi_ - lo_) / double(n);
    double x_prev = lo_;
    double g_prev = residual(x_prev, z, tau);

    struct Root { double xi; bool same_family; };
    std::vector<Root> roots;
    for (std::size_t i = 1; i <= n; ++i) {
        double x = lo_ + double(i) * h;
        double g = residual(x, z, tau);
        if ((g_prev < 0.0) != (g < 0.0) || g == 0.0) {
            double r = (g == 0.0) ? x : refine_root(x_prev, x, g_prev, g, z, tau);
            double fr = f_theta(prob_.pulses.theta0(r), qp_, qs_);
            roots.push_back({r, (fr >= 0.0) == family_positive});
        }
        x_prev = x;
        g_prev = g;
    }

    std::vector<double> family;
    for (const auto& r : roots)
        if (r.same_family) family.push_back(r.xi);

    if (family.empty()) {
        // no transport-family root: either the launch point lies beyond the
        // window (field-free tail, residual negative throughout) or the
        // bracket genuinely failed
        double phi_tau = prob_.pulses.flux_density(tau, prob_.q(), prob_.signs());
        double edge = (phi_tau >= 0.0) ? lo_ : hi_;
        if (residual(edge, z, tau) < 0.0 && roots.empty()) {
            res.xi = edge;
            res.saturated = true;
            res.denom = fold_denominator(edge, z);
            res.root_count = 0;
            return res;
        }
        std::ostringstream msg;
        msg << "solve_characteristic: no sign change in scan window ["
            << lo_ << ", " << hi_ << "] at z=" << z << ", tau=" << tau
            << "; g(lo)=" << residual(lo_, z, tau)
            << ", g(hi)=" << residual(hi_, z, tau);
        throw BracketError(msg.str());
    }

    res.xi = *std::max_element(family.begin(), family.end());
    res.fold_flag = family.size() >= 2;
    res.root_count = int(family.size());
    res.denom = fold_denominator(res.xi, z);
    return res;
}

double CharacteristicSolver::xi_partial_tau(const CharacteristicResult& r,
                                            double tau) const {
    if (r.saturated) return 0.0;
    double phi_xi = prob_.pulses.flux_density(r.xi, prob_.q(), prob_.signs());
    double phi_tau = prob_.pulses.flux_density(tau, prob_.q(), prob_.signs());
    if (std::fabs(r.denom) < 1e-9)
        throw FoldError("xi_partial_tau: fold denominator below 1e-9");
    return phi_tau / (phi_xi * r.denom);
}

std::vector<CharacteristicResult> CharacteristicSolver::solve_slice(
    double z, const std::vector<double>& taus) const {
    std::vector<CharacteristicResult> out(taus.size());
    if (taus.empty()) return out;
    if (z == 0.0) {
        for (std::size_t i = 0; i < taus.size(); ++i) out[i] = solve(z, taus[i]);
        return out;
    }
    // warm starts need a single monotone retarded branch
    bool fast = fold_free(z);
    if (fast) {
        for (double tau : {taus.front(), taus.back()})
            if (prob_.pulses.flux_density(tau, prob_.q(), prob_.signs()) < 0.0)
                fast = false;
    }
    if (!fast) {
        for (std::size_t i = 0; i < taus.size(); ++i) out[i] = solve(z, taus[i]);
        return out;
    }

    out[0] = solve(z, taus[0]);
    for (std::size_t i = 1; i < taus.size(); ++i) {
        double tau = taus[i];
        double lo = out[i - 1].saturated ? lo_ : out[i - 1].xi;
        double g_lo = residual(lo, z, tau);
        if (g_lo < 0.0) {
            if (lo == lo_) {
                // still saturated: launch point beyond the window
                CharacteristicResult r;
                r.xi = lo_;
                r.saturated = true;
                r.root_count = 0;
                r.denom = fold_denominator(lo_, z);
                out[i] = r;
            } else {
                out[i] = solve(z, tau);  // bracket hint failed, full scan
            }
            continue;
        }
        double g_hi = residual(tau, z, tau);
        CharacteristicResult r;
        r.xi = refine_root(lo, tau, g_lo, g_hi, z, tau);
        r.denom = fold_denominator(r.xi, z);
        out[i] = r;
    }
    return out;
}

std::optional<double> CharacteristicSolver::first_fold_z(double z_max,
                                                         std::size_t n_scan) const {
    // D(xi; z) = 1 + z*K(xi): the first fold over all launches is
    // z = -1/min K, provided that launch actually arrives inside the window.
    double best = std::numeric_limits<double>::infinity();
    const double h = (hi_ - lo_) / double(n_scan);
    for (std::size_t i = 0; i <= n_scan; ++i) {
        double xi = lo_ + double(i) * h;
        double th = prob_.pulses.theta0(xi);
        double f = f_theta(th, qp_, qs_);
        double fp = f_theta_deriv(th, qp_, qs_);
        double dth = prob_.pulses.theta0_deriv(xi);
        double w02 = prob_.pulses.w0_squared(xi);
        if (w02 == 0.0) continue;
        double k = 2.0 * a2_ * fp * dth / w02;
        if (k >= 0.0) continue;
        double z_here = -1.0 / k;
        if (z_here > z_max || z_here >= best) continue;
        // the folded characteristic must arrive before the window closes;
        // the fluence can be non-monotone in tau (Xi/V sign maps), so take
        // its maximum over the remaining window
        double need = z_here * f * f;
        double have = -std::numeric_limits<double>::infinity();
        const std::size_t m = 128;
        for (std::size_t j = 0; j <= m; ++j) {
            double tau = xi + (hi_ - xi) * double(j) / double(m);
            have = std::max(have,
                            prob_.pulses.flux_integral(xi, tau, prob_.q(), prob_.signs()) / a2_);
        }
        if (have >= need) best = z_here;
    }
    if (std::isfinite(best)) return best;
    return std::nullopt;
}

bool CharacteristicSolver::fold_free(double z, std::size_t n_scan) const {
    auto zb = first_fold_z(z, n_scan);
    return !zb.has_value() || *zb > z;
}

}  // namespace tristate
