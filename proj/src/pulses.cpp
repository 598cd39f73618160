#include "tristate/pulses.hpp"

#include <algorithm>
#include <cmath>

namespace tristate {

namespace {

// log(cosh(u)) without overflow for large |u|
double log_cosh(double u) {
    double au = std::fabs(u);
    return au + std::log1p(std::exp(-2.0 * au)) - M_LN2;
}

double sech(double u) {
    double e = std::exp(-std::fabs(u));
    return 2.0 * e / (1.0 + e * e);
}

// linear interpolation with clamped extrapolation
double interp(const std::vector<double>& xs, const std::vector<double>& ys, double x) {
    if (x <= xs.front()) return ys.front();
    if (x >= xs.back()) return ys.back();
    auto it = std::upper_bound(xs.begin(), xs.end(), x);
    std::size_t i = std::size_t(it - xs.begin());
    double w = (x - xs[i - 1]) / (xs[i] - xs[i - 1]);
    return ys[i - 1] + w * (ys[i] - ys[i - 1]);
}

}  // namespace

const char* to_string(SystemKind kind) {
    switch (kind) {
        case SystemKind::Lambda: return "lambda";
        case SystemKind::Xi:     return "xi";
        case SystemKind::Vee:    return "vee";
    }
    return "lambda";
}

std::optional<SystemKind> system_kind_from_string(const std::string& s) {
    if (s == "lambda" || s == "Lambda") return SystemKind::Lambda;
    if (s == "xi" || s == "Xi") return SystemKind::Xi;
    if (s == "vee" || s == "Vee" || s == "v" || s == "V") return SystemKind::Vee;
    return std::nullopt;
}

void Grid::validate() const {
    if (!(tau_min < tau_max))
        throw InvalidParameterError("grid: tau_min must be < tau_max");
    if (n_tau < 2)
        throw InvalidParameterError("grid: n_tau must be >= 2");
    double prev = -1.0;
    for (double z : z_values) {
        if (z < 0.0)
            throw InvalidParameterError("grid: z values must be nonnegative");
        if (z <= prev)
            throw InvalidParameterError("grid: z values must be strictly increasing");
        prev = z;
    }
}

std::vector<double> Grid::taus() const {
    std::vector<double> t(n_tau);
    for (std::size_t i = 0; i < n_tau; ++i) t[i] = tau_at(i);
    return t;
}

EntrancePulses::EntrancePulses(SechShape s) : shape_(s), peak_(s.a) {
    if (!(s.a > 0.0))
        throw InvalidParameterError("pulses: peak amplitude must be > 0");
}

EntrancePulses::EntrancePulses(SampledShape s) : shape_(std::move(s)) {
    const auto& sh = sampled();
    const std::size_t n = sh.times.size();
    if (n < 2 || sh.omega_p.size() != n || sh.omega_s.size() != n)
        throw InvalidParameterError("pulses: sampled arrays must share a length >= 2");
    for (std::size_t i = 0; i < n; ++i) {
        if (sh.omega_p[i] < 0.0 || sh.omega_s[i] < 0.0)
            throw InvalidParameterError("pulses: sampled envelopes must be nonnegative");
        if (i > 0 && !(sh.times[i] > sh.times[i - 1]))
            throw InvalidParameterError("pulses: sample times must be strictly increasing");
        peak_ = std::max({peak_, sh.omega_p[i], sh.omega_s[i]});
    }
    if (!(peak_ > 0.0))
        throw InvalidParameterError("pulses: sampled envelopes are identically zero");

    // theta0 on the sample grid; field-free stretches hold the nearest
    // well-defined value instead of evaluating 0/0
    const std::size_t nn = n;
    theta0_samples_.resize(nn);
    const double floor = 1e-12 * peak_;
    double held = 0.0;
    bool have = false;
    for (std::size_t i = 0; i < nn; ++i) {
        double p = sh.omega_p[i], q = sh.omega_s[i];
        if (p > floor || q > floor) {
            held = std::atan2(p, q);
            if (!have) {
                for (std::size_t j = 0; j < i; ++j) theta0_samples_[j] = held;
            }
            have = true;
        }
        theta0_samples_[i] = held;
    }

    cum_p2_.assign(nn, 0.0);
    cum_s2_.assign(nn, 0.0);
    for (std::size_t i = 1; i < nn; ++i) {
        double dt = sh.times[i] - sh.times[i - 1];
        cum_p2_[i] = cum_p2_[i - 1] +
            0.5 * dt * (sh.omega_p[i] * sh.omega_p[i] + sh.omega_p[i - 1] * sh.omega_p[i - 1]);
        cum_s2_[i] = cum_s2_[i - 1] +
            0.5 * dt * (sh.omega_s[i] * sh.omega_s[i] + sh.omega_s[i - 1] * sh.omega_s[i - 1]);
    }
}

double EntrancePulses::omega_p0(double tau) const {
    if (is_sech()) {
        const auto& s = sech_params();
        return s.a * sech(tau - s.t_d);
    }
    const auto& sh = sampled();
    return interp(sh.times, sh.omega_p, tau);
}

double EntrancePulses::omega_s0(double tau) const {
    if (is_sech()) {
        const auto& s = sech_params();
        return s.a * sech(tau);
    }
    const auto& sh = sampled();
    return interp(sh.times, sh.omega_s, tau);
}

double EntrancePulses::theta0(double tau) const {
    if (is_sech()) {
        // tan(theta0) = cosh(tau) / cosh(tau - t_d), computed in the log
        // domain so the ratio survives where both sech tails underflow
        const auto& s = sech_params();
        double lr = log_cosh(tau) - log_cosh(tau - s.t_d);
        return std::atan(std::exp(lr));
    }
    const auto& sh = sampled();
    return interp(sh.times, theta0_samples_, tau);
}

double EntrancePulses::theta0_deriv(double tau) const {
    if (is_sech()) {
        const auto& s = sech_params();
        double lr = log_cosh(tau) - log_cosh(tau - s.t_d);
        double r = std::exp(lr);
        double rp = r * (std::tanh(tau) - std::tanh(tau - s.t_d));
        return rp / (1.0 + r * r);
    }
    const auto& sh = sampled();
    // centered difference on the sample spacing
    double h = (sh.times.back() - sh.times.front()) / double(sh.times.size() - 1);
    return (theta0(tau + h) - theta0(tau - h)) / (2.0 * h);
}

double EntrancePulses::theta0_limit_lo() const {
    if (is_sech()) return std::atan(std::exp(-sech_params().t_d));
    return theta0_samples_.front();
}

double EntrancePulses::theta0_limit_hi() const {
    if (is_sech()) return std::atan(std::exp(sech_params().t_d));
    return theta0_samples_.back();
}

double EntrancePulses::flux_density(double tau, double q, SignPair sg) const {
    double p = omega_p0(tau), s = omega_s0(tau);
    return sg.s_s * p * p + sg.s_p * q * s * s;
}

double EntrancePulses::flux_integral(double xi, double tau, double q, SignPair sg) const {
    if (is_sech()) {
        const auto& s = sech_params();
        double a2 = s.a * s.a;
        double pump = std::tanh(tau - s.t_d) - std::tanh(xi - s.t_d);
        double stokes = std::tanh(tau) - std::tanh(xi);
        return a2 * (sg.s_s * pump + sg.s_p * q * stokes);
    }
    const auto& sh = sampled();
    auto cum = [&](const std::vector<double>& c, double t) {
        if (t <= sh.times.front()) return c.front();
        if (t >= sh.times.back()) return c.back();
        auto it = std::upper_bound(sh.times.begin(), sh.times.end(), t);
        std::size_t i = std::size_t(it - sh.times.begin());
        double t0 = sh.times[i - 1], t1 = sh.times[i];
        double w = (t - t0) / (t1 - t0);
        // trapezoid of the linearly interpolated square over the partial cell
        auto sq = [&](const std::vector<double>& ys) {
            double y0 = ys[i - 1], y1 = ys[i];
            double yt = y0 + w * (y1 - y0);
            return 0.5 * (t - t0) * (y0 * y0 + yt * yt);
        };
        if (&c == &cum_p2_) return cum_p2_[i - 1] + sq(sh.omega_p);
        return cum_s2_[i - 1] + sq(sh.omega_s);
    };
    double pump = cum(cum_p2_, tau) - cum(cum_p2_, xi);
    double stokes = cum(cum_s2_, tau) - cum(cum_s2_, xi);
    return sg.s_s * pump + sg.s_p * q * stokes;
}

EntrancePulses make_sech_pulses(double a, double T, double t_d) {
    if (!(a > 0.0)) throw InvalidParameterError("make_sech_pulses: a must be > 0");
    if (!(T > 0.0)) throw InvalidParameterError("make_sech_pulses: T must be > 0");
    // normalize to T = 1: times in units of T, amplitudes in 1/T
    return EntrancePulses(SechShape{a * T, t_d / T});
}

double photon_fluence(const EntrancePulses& pulses, double xi, double tau,
                      double q, SignPair sg) {
    if (xi > tau)
        throw DomainError("photon_fluence: xi must be <= tau");
    return pulses.flux_integral(xi, tau, q, sg);
}

DimensionlessProblem normalize(const MediumParams& medium,
                               const EntrancePulses& pulses,
                               const Grid& grid) {
    medium.validate();
    grid.validate();
    return DimensionlessProblem{medium, pulses, grid};
}

}  // namespace tristate
