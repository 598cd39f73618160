#include "tristate/adiabatic.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <sstream>

#include "tristate/parallel.hpp"

namespace tristate {

AdiabaticSolver::AdiabaticSolver(const DimensionlessProblem& problem,
                                 CharacteristicOptions opts)
    : prob_(problem), chars_(problem, opts) {
    tail_floor_ = 1e-12 * prob_.amplitude_scale();
}

double AdiabaticSolver::theta(const CharacteristicResult& r) const {
    return prob_.pulses.theta0(r.xi);
}

double AdiabaticSolver::theta(double z, double tau) const {
    return theta(chars_.solve(z, tau));
}

double AdiabaticSolver::total_rabi(const CharacteristicResult& r, double tau) const {
    double qp = prob_.q_p_signed(), qs = prob_.q_s_signed();
    double f0 = f_theta(prob_.pulses.theta0(tau), qp, qs);
    double f1 = f_theta(theta(r), qp, qs);
    double w02 = prob_.pulses.w0_squared(tau);
    if (f1 == 0.0 || (f0 > 0.0) != (f1 > 0.0)) {
        std::ostringstream msg;
        msg << "total_rabi: f(theta) vanishes between launch and arrival "
            << "(tau=" << tau << ", xi=" << r.xi << "); W^2 undefined";
        throw SingularityError(msg.str());
    }
    double w2 = w02 * f0 / f1;
    return std::sqrt(std::max(0.0, w2));
}

double AdiabaticSolver::total_rabi(double z, double tau) const {
    return total_rabi(chars_.solve(z, tau), tau);
}

Envelopes AdiabaticSolver::envelopes(double z, double tau) const {
    auto r = chars_.solve(z, tau);
    double w = total_rabi(r, tau);
    double th = theta(r);
    return {w * std::sin(th), w * std::cos(th)};
}

double AdiabaticSolver::theta_dot(const CharacteristicResult& r, double tau) const {
    if (r.saturated) return 0.0;
    if (std::fabs(r.denom) < 1e-9)
        throw FoldError("theta_dot: fold denominator below 1e-9");
    double j = chars_.xi_partial_tau(r, tau);
    return prob_.pulses.theta0_deriv(r.xi) * j;
}

double AdiabaticSolver::theta_dot(double z, double tau) const {
    return theta_dot(chars_.solve(z, tau), tau);
}

AmplitudeCell AdiabaticSolver::amplitudes(double z, double tau) const {
    auto r = chars_.solve(z, tau);
    double th = theta(r);
    double w = total_rabi(r, tau);
    double td = theta_dot(r, tau);
    double ratio = (w > tail_floor_) ? td / w : 0.0;
    if (std::fabs(ratio) >= 1.0)
        throw AdiabaticityError("amplitudes: |theta_dot/W| >= 1, adiabatic expansion invalid");
    // first non-adiabatic correction; 2/tan(2 psi) = delta_p / W
    double corr = (w > tail_floor_) ? prob_.medium.delta_p / w : 0.0;
    AmplitudeCell out;
    out.b1 = {std::cos(th), ratio * corr * std::sin(th)};
    out.b2 = {0.0, -ratio};
    out.b3 = {-std::sin(th), ratio * corr * std::cos(th)};
    return out;
}

double AdiabaticSolver::group_velocity_slope(double z, double tau) const {
    auto r = chars_.solve(z, tau);
    double w = total_rabi(r, tau);
    if (w <= tail_floor_)
        throw DomainError("group_velocity: W below the tail floor, slope undefined");
    double a = prob_.amplitude_scale();
    double f = f_theta(theta(r), prob_.q_p_signed(), prob_.q_s_signed());
    return a * a * f / (w * w);
}

std::vector<CharacteristicResult> AdiabaticSolver::solve_slice(
    double z, const std::vector<double>& taus, std::size_t jobs) const {
    std::vector<CharacteristicResult> out(taus.size());
    // fixed chunk layout so the warm-start path, and with it the last bits of
    // every root, cannot depend on the worker count
    const std::size_t chunk = 256;
    const std::size_t k = (taus.size() + chunk - 1) / chunk;
    parallel_for(k, [&](std::size_t w) {
        std::size_t lo = w * chunk;
        std::size_t hi = std::min(taus.size(), lo + chunk);
        if (lo >= hi) return;
        std::vector<double> part(taus.begin() + lo, taus.begin() + hi);
        auto res = chars_.solve_slice(z, part);
        std::copy(res.begin(), res.end(), out.begin() + lo);
    }, jobs);
    return out;
}

FieldState AdiabaticSolver::evaluate(std::size_t jobs) const {
    FieldState out;
    out.z_values = prob_.grid.z_values;
    out.taus = prob_.grid.taus();
    const std::size_t nt = out.taus.size();
    const std::size_t nz = out.z_values.size();
    out.cells.resize(nt * nz);
    for (std::size_t iz = 0; iz < nz; ++iz) {
        double z = out.z_values[iz];
        auto rs = solve_slice(z, out.taus, jobs);
        parallel_for(nt, [&](std::size_t it) {
            double th = theta(rs[it]);
            double w = total_rabi(rs[it], out.taus[it]);
            FieldCell& c = out.cells[iz * nt + it];
            c.theta = th;
            c.w_total = w;
            c.omega_p = w * std::sin(th);
            c.omega_s = w * std::cos(th);
            c.phi_p = 0.0;
            c.phi_s = 0.0;
        }, jobs);
    }
    return out;
}

std::size_t AdiabaticSolver::fold_cell_count(double z) const {
    if (chars_.fold_free(z)) return 0;
    const auto taus = prob_.grid.taus();
    std::atomic<std::size_t> n{0};
    parallel_for(taus.size(), [&](std::size_t i) {
        auto r = chars_.solve(z, taus[i]);
        if (r.fold_flag) n.fetch_add(1, std::memory_order_relaxed);
    });
    return n.load();
}

}  // namespace tristate
