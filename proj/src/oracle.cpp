#include "tristate/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "tristate/adiabatic.hpp"

namespace tristate {

using cplx = std::complex<double>;

FieldState FieldHistory::to_field_state() const {
    FieldState out;
    out.taus = taus;
    out.z_values.reserve(slices.size());
    out.cells.reserve(slices.size() * taus.size());
    for (const auto& s : slices) {
        out.z_values.push_back(s.z);
        for (std::size_t i = 0; i < taus.size(); ++i) {
            FieldCell c;
            double p = std::abs(s.ep[i]), q = std::abs(s.es[i]);
            c.omega_p = p;
            c.omega_s = q;
            c.w_total = std::hypot(p, q);
            c.theta = std::atan2(p, q);
            c.phi_p = std::arg(s.ep[i] == cplx{0.0, 0.0} ? cplx{1.0, 0.0} : s.ep[i]);
            c.phi_s = std::arg(s.es[i] == cplx{0.0, 0.0} ? cplx{1.0, 0.0} : s.es[i]);
            out.cells.push_back(c);
        }
    }
    return out;
}

OracleSolver::OracleSolver(const DimensionlessProblem& problem, OracleConfig config)
    : prob_(problem), cfg_(config) {
    cfg_.validate();
    dtau_ = prob_.grid.dtau();
    tail_floor_ = 1e-12 * prob_.amplitude_scale();
}

AmplitudeCell OracleSolver::initial_amplitudes() const {
    if (cfg_.init == InitialState::Ground) return AmplitudeCell{};
    double th = prob_.pulses.theta0(prob_.grid.tau_min);
    AmplitudeCell c;
    c.b1 = {std::cos(th), 0.0};
    c.b2 = {0.0, 0.0};
    c.b3 = {-std::sin(th), 0.0};
    return c;
}

void OracleSolver::check_stability(const std::vector<cplx>& ep,
                                   const std::vector<cplx>& es) const {
    double wmax = 0.0;
    for (std::size_t i = 0; i < ep.size(); ++i)
        wmax = std::max(wmax, std::norm(ep[i]) + std::norm(es[i]));
    wmax = std::sqrt(wmax);
    double rate = std::max({wmax, std::fabs(prob_.medium.delta_p), prob_.medium.gamma});
    if (dtau_ * rate >= cfg_.stability_limit) {
        std::ostringstream msg;
        msg << "oracle: dt*max(W,|delta_p|,gamma) = " << dtau_ * rate
            << " exceeds the stability guard " << cfg_.stability_limit
            << "; refine the tau grid";
        throw StepSizeError(msg.str());
    }
}

namespace {

struct Bvec {
    cplx b1, b2, b3;
};

inline Bvec operator+(Bvec a, Bvec b) { return {a.b1 + b.b1, a.b2 + b.b2, a.b3 + b.b3}; }
inline Bvec operator*(double s, Bvec a) { return {s * a.b1, s * a.b2, s * a.b3}; }

// Schroedinger right-hand side. The conjugation pattern (Ep* on the b1 row,
// Es* on the b3 row) is the one for which the reduced field equations
// dE/dz = -i C b2 conj(b1,3) conserve the photon combination arm by arm for
// complex envelopes. Decay enters as damping of b2.
inline Bvec rhs(const Bvec& y, cplx ep, cplx es, double delta_p, double gamma) {
    const cplx mi{0.0, -1.0};
    Bvec d;
    d.b1 = mi * std::conj(ep) * y.b2;
    d.b2 = mi * (ep * y.b1 + es * y.b3) + (mi * delta_p - gamma) * y.b2;
    d.b3 = mi * std::conj(es) * y.b2;
    return d;
}

// 4-point (cubic) midpoint interpolation, linear at the grid edges
inline cplx midpoint(const std::vector<cplx>& e, std::size_t i) {
    if (i == 0 || i + 2 >= e.size())
        return 0.5 * (e[i] + e[i + 1]);
    return (-e[i - 1] + 9.0 * e[i] + 9.0 * e[i + 1] - e[i + 2]) / 16.0;
}

}  // namespace

std::vector<AmplitudeCell> OracleSolver::integrate_slice(
    const std::vector<cplx>& ep, const std::vector<cplx>& es) const {
    const std::size_t n = prob_.grid.n_tau;
    if (ep.size() != n || es.size() != n)
        throw AlignmentError("integrate_slice: field arrays do not match the tau grid");
    check_stability(ep, es);

    const double dp = prob_.medium.delta_p;
    const double g = prob_.medium.gamma;
    const double h = dtau_;

    std::vector<AmplitudeCell> out(n);
    AmplitudeCell init = initial_amplitudes();
    Bvec y{init.b1, init.b2, init.b3};
    out[0] = init;
    for (std::size_t i = 0; i + 1 < n; ++i) {
        cplx ep0 = ep[i], es0 = es[i];
        cplx epm = midpoint(ep, i), esm = midpoint(es, i);
        cplx ep1 = ep[i + 1], es1 = es[i + 1];
        Bvec k1 = rhs(y, ep0, es0, dp, g);
        Bvec k2 = rhs(y + (0.5 * h) * k1, epm, esm, dp, g);
        Bvec k3 = rhs(y + (0.5 * h) * k2, epm, esm, dp, g);
        Bvec k4 = rhs(y + h * k3, ep1, es1, dp, g);
        y = y + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        out[i + 1] = {y.b1, y.b2, y.b3};
    }
    return out;
}

SliceSources OracleSolver::polarization_sources(
    const std::vector<AmplitudeCell>& amps,
    const std::vector<cplx>& ep, const std::vector<cplx>& es) const {
    const std::size_t n = amps.size();
    if (ep.size() != n || es.size() != n)
        throw AlignmentError("polarization_sources: mismatched grids");
    const auto sg = prob_.signs();
    const double a = prob_.amplitude_scale();
    const double cp = sg.s_p * prob_.q() * a * a;
    const double cs = sg.s_s * a * a;
    const cplx mi{0.0, -1.0};
    SliceSources src;
    src.dep_dz.resize(n);
    src.des_dz.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        src.dep_dz[i] = mi * cp * amps[i].b2 * std::conj(amps[i].b1);
        src.des_dz[i] = mi * cs * amps[i].b2 * std::conj(amps[i].b3);
    }
    return src;
}

RateView OracleSolver::decompose_rates(const SliceSources& src,
                                       const std::vector<cplx>& ep,
                                       const std::vector<cplx>& es) const {
    const std::size_t n = src.dep_dz.size();
    RateView v;
    v.d_omega_p.resize(n);
    v.d_omega_s.resize(n);
    v.d_phi_p.assign(n, 0.0);
    v.d_phi_s.assign(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        double wp = std::abs(ep[i]), ws = std::abs(es[i]);
        cplx up = wp > 0.0 ? ep[i] / wp : cplx{1.0, 0.0};
        cplx us = ws > 0.0 ? es[i] / ws : cplx{1.0, 0.0};
        cplx rp = std::conj(up) * src.dep_dz[i];
        cplx rs = std::conj(us) * src.des_dz[i];
        v.d_omega_p[i] = rp.real();
        v.d_omega_s[i] = rs.real();
        if (wp > tail_floor_) v.d_phi_p[i] = rp.imag() / wp;
        if (ws > tail_floor_) v.d_phi_s[i] = rs.imag() / ws;
    }
    return v;
}

FieldHistory OracleSolver::propagate(double z_max) const {
    if (z_max < 0.0)
        throw InvalidParameterError("oracle: z_max must be >= 0");
    const std::size_t n = prob_.grid.n_tau;
    const double a = prob_.amplitude_scale();

    FieldHistory hist;
    hist.taus = prob_.grid.taus();

    std::vector<cplx> ep(n), es(n);
    for (std::size_t i = 0; i < n; ++i) {
        double tau = hist.taus[i];
        ep[i] = {prob_.pulses.omega_p0(tau), 0.0};
        es[i] = {prob_.pulses.omega_s0(tau), 0.0};
    }

    const std::size_t steps = std::size_t(std::llround(z_max / cfg_.dz));
    // store points: entrance, requested z list (snapped to steps), strides
    std::vector<bool> store(steps + 1, false);
    store[0] = true;
    if (steps > 0) {
        for (double z : prob_.grid.z_values) {
            if (z < -0.5 * cfg_.dz || z > z_max + 0.5 * cfg_.dz) continue;
            std::size_t k = std::size_t(std::llround(z / cfg_.dz));
            store[std::min(k, steps)] = true;
        }
        if (cfg_.store_stride > 0)
            for (std::size_t k = 0; k <= steps; k += cfg_.store_stride) store[k] = true;
        store[steps] = true;
    }

    auto snapshot = [&](std::size_t k, const std::vector<AmplitudeCell>& amps) {
        OracleSlice s;
        s.z = double(k) * cfg_.dz;
        s.ep = ep;
        s.es = es;
        s.amps = amps;
        hist.slices.push_back(std::move(s));
    };

    auto guard = [&](std::size_t k) {
        for (std::size_t i = 0; i < n; ++i) {
            double m = std::max(std::abs(ep[i]), std::abs(es[i]));
            if (!std::isfinite(m) || m > cfg_.divergence_limit * a) {
                std::ostringstream msg;
                msg << "oracle: field divergence at z=" << double(k) * cfg_.dz
                    << ", tau=" << hist.taus[i];
                throw DivergenceError(msg.str(), hist.slices.size());
            }
        }
    };

    for (std::size_t k = 0; k <= steps; ++k) {
        guard(k);
        auto amps = integrate_slice(ep, es);
        if (store[k]) snapshot(k, amps);
        if (k == steps) break;

        // Heun: predictor with the slice sources, corrector with re-integrated
        // amplitudes on the predicted fields
        auto s0 = polarization_sources(amps, ep, es);
        std::vector<cplx> ep1(n), es1(n);
        for (std::size_t i = 0; i < n; ++i) {
            ep1[i] = ep[i] + cfg_.dz * s0.dep_dz[i];
            es1[i] = es[i] + cfg_.dz * s0.des_dz[i];
        }
        auto amps1 = integrate_slice(ep1, es1);
        auto s1 = polarization_sources(amps1, ep1, es1);
        for (std::size_t i = 0; i < n; ++i) {
            ep[i] += 0.5 * cfg_.dz * (s0.dep_dz[i] + s1.dep_dz[i]);
            es[i] += 0.5 * cfg_.dz * (s0.des_dz[i] + s1.des_dz[i]);
        }
    }
    return hist;
}

double relative_l2(const std::vector<double>& test, const std::vector<double>& ref) {
    if (test.size() != ref.size())
        throw AlignmentError("relative_l2: mismatched lengths");
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < ref.size(); ++i) {
        double d = test[i] - ref[i];
        num += d * d;
        den += ref[i] * ref[i];
    }
    if (den == 0.0) return num == 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
    return std::sqrt(num / den);
}

std::vector<SliceErrors> compare(const AdiabaticSolver& adiabatic,
                                 const FieldHistory& history) {
    std::vector<SliceErrors> out;
    out.reserve(history.slices.size());
    const auto& taus = history.taus;
    for (const auto& slice : history.slices) {
        SliceErrors e;
        e.z = slice.z;
        std::vector<double> op_a(taus.size()), os_a(taus.size());
        std::vector<double> op_o(taus.size()), os_o(taus.size());
        double linf_p = 0.0, linf_s = 0.0;
        double num_p = 0.0, num_s = 0.0, num_t = 0.0;
        double den_w = 0.0, den_t = 0.0;
        double scale = 0.0;
        auto rs = adiabatic.solve_slice(slice.z, taus);
        for (std::size_t i = 0; i < taus.size(); ++i) {
            const auto& r = rs[i];
            if (r.fold_flag) e.fold_present = true;
            double th = adiabatic.theta(r);
            double w = adiabatic.total_rabi(r, taus[i]);
            op_a[i] = w * std::sin(th);
            os_a[i] = w * std::cos(th);
            op_o[i] = std::abs(slice.ep[i]);
            os_o[i] = std::abs(slice.es[i]);
            linf_p = std::max(linf_p, std::fabs(op_a[i] - op_o[i]));
            linf_s = std::max(linf_s, std::fabs(os_a[i] - os_o[i]));
            scale = std::max({scale, op_o[i], os_o[i]});
            num_p += (op_a[i] - op_o[i]) * (op_a[i] - op_o[i]);
            num_s += (os_a[i] - os_o[i]) * (os_a[i] - os_o[i]);
            den_w += op_o[i] * op_o[i] + os_o[i] * os_o[i];
            double tho = std::atan2(op_o[i], os_o[i]);
            num_t += (th - tho) * (th - tho);
            den_t += (M_PI / 2) * (M_PI / 2);
            double pop2_an = 0.0;
            try {
                double td = adiabatic.theta_dot(r, taus[i]);
                double ratio = w > 0.0 ? td / w : 0.0;
                pop2_an = ratio * ratio;
            } catch (const FoldError&) {
                pop2_an = std::norm(slice.amps[i].b2);
            }
            e.linf_pop2 = std::max(e.linf_pop2,
                                   std::fabs(pop2_an - std::norm(slice.amps[i].b2)));
        }
        e.l2_omega_p = den_w > 0.0 ? std::sqrt(num_p / den_w) : 0.0;
        e.l2_omega_s = den_w > 0.0 ? std::sqrt(num_s / den_w) : 0.0;
        e.self_l2_omega_p = relative_l2(op_a, op_o);
        e.self_l2_omega_s = relative_l2(os_a, os_o);
        e.linf_omega_p = scale > 0.0 ? linf_p / scale : linf_p;
        e.linf_omega_s = scale > 0.0 ? linf_s / scale : linf_s;
        e.l2_theta = std::sqrt(num_t / den_t);
        {
            std::vector<double> th_a(taus.size()), th_o(taus.size());
            for (std::size_t i = 0; i < taus.size(); ++i) {
                th_a[i] = std::atan2(op_a[i], os_a[i]);
                th_o[i] = std::atan2(op_o[i], os_o[i]);
            }
            e.self_l2_theta = relative_l2(th_a, th_o);
        }
        out.push_back(e);
    }
    return out;
}

double conserved_photon_integral(const DimensionlessProblem& prob,
                                 const std::vector<double>& taus,
                                 const std::vector<cplx>& ep,
                                 const std::vector<cplx>& es) {
    const auto sg = prob.signs();
    const double q = prob.q();
    double acc = 0.0;
    for (std::size_t i = 0; i + 1 < taus.size(); ++i) {
        auto dens = [&](std::size_t k) {
            return sg.s_p * std::norm(ep[k]) / q + sg.s_s * std::norm(es[k]);
        };
        acc += 0.5 * (taus[i + 1] - taus[i]) * (dens(i) + dens(i + 1));
    }
    return acc;
}

}  // namespace tristate
