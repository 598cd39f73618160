#include <doctest.h>

#include <cmath>
#include <complex>

#include "tristate/adiabatic.hpp"
#include "tristate/oracle.hpp"

using namespace tristate;
using cplx = std::complex<double>;

namespace {

DimensionlessProblem lambda_problem(double q, double t_d = 2.5, double a = 10.0,
                                    std::size_t n_tau = 2048,
                                    std::vector<double> zs = {0.0}) {
    MediumParams m;
    m.q_ratio = q;
    Grid g;
    g.tau_min = -8.0;
    g.tau_max = 8.0 + std::max(0.0, t_d);
    g.n_tau = n_tau;
    g.z_values = std::move(zs);
    return normalize(m, make_sech_pulses(a, 1.0, t_d), g);
}

std::pair<std::vector<cplx>, std::vector<cplx>> entrance_fields(
    const DimensionlessProblem& prob) {
    auto taus = prob.grid.taus();
    std::vector<cplx> ep(taus.size()), es(taus.size());
    for (std::size_t i = 0; i < taus.size(); ++i) {
        ep[i] = prob.pulses.omega_p0(taus[i]);
        es[i] = prob.pulses.omega_s0(taus[i]);
    }
    return {ep, es};
}

}  // namespace

TEST_CASE("zero fields leave the ground state untouched") {
    auto prob = lambda_problem(1.0);
    OracleConfig cfg;
    cfg.init = InitialState::Ground;
    OracleSolver oracle(prob, cfg);
    std::vector<cplx> zero(prob.grid.n_tau, 0.0);
    auto amps = oracle.integrate_slice(zero, zero);
    for (const auto& a : amps) {
        CHECK(a.b1 == cplx{1.0, 0.0});
        CHECK(a.b2 == cplx{0.0, 0.0});
        CHECK(a.b3 == cplx{0.0, 0.0});
    }
}

TEST_CASE("level 1 is uncoupled while the pump is off") {
    auto prob = lambda_problem(1.0);
    OracleConfig cfg;
    cfg.init = InitialState::Ground;
    OracleSolver oracle(prob, cfg);
    std::vector<cplx> ep(prob.grid.n_tau, 0.0);
    std::vector<cplx> es(prob.grid.n_tau, cplx{3.0, 0.0});
    auto amps = oracle.integrate_slice(ep, es);
    for (const auto& a : amps) {
        CHECK(std::abs(a.b1 - cplx{1.0, 0.0}) < 1e-12);
        CHECK(std::abs(a.b2) < 1e-12);
        CHECK(std::abs(a.b3) < 1e-12);
    }
}

TEST_CASE("upper-level population tracks the first non-adiabatic correction") {
    auto prob = lambda_problem(1.0);
    OracleSolver oracle(prob, {});
    auto [ep, es] = entrance_fields(prob);
    auto amps = oracle.integrate_slice(ep, es);
    auto taus = prob.grid.taus();
    double max_b2 = 0.0, max_pred = 0.0;
    for (std::size_t i = 0; i < taus.size(); ++i) {
        max_b2 = std::max(max_b2, std::norm(amps[i].b2));
        double w = std::sqrt(prob.pulses.w0_squared(taus[i]));
        if (w > 1e-3) {
            double r = prob.pulses.theta0_deriv(taus[i]) / w;
            max_pred = std::max(max_pred, r * r);
        }
    }
    CHECK(max_b2 > 0.5 * max_pred);
    CHECK(max_b2 < 2.0 * max_pred);
}

TEST_CASE("norm is conserved without decay") {
    // dt small enough that the RK4 norm defect stays below 1e-8
    auto prob = lambda_problem(1.0, 2.5, 5.0, 4096);
    OracleSolver oracle(prob, {});
    auto [ep, es] = entrance_fields(prob);
    auto amps = oracle.integrate_slice(ep, es);
    for (const auto& a : amps) CHECK(std::fabs(a.norm() - 1.0) < 1e-8);
}

TEST_CASE("detuned slice integration stays unitary and transfers population") {
    auto prob = lambda_problem(1.0, 2.5, 10.0, 4096);
    prob.medium.delta_p = 5.0;
    OracleSolver oracle(prob, {});
    auto [ep, es] = entrance_fields(prob);
    auto amps = oracle.integrate_slice(ep, es);
    for (const auto& a : amps) CHECK(std::fabs(a.norm() - 1.0) < 1e-7);
    CHECK(std::norm(amps.back().b3) > 0.9);
}

TEST_CASE("polarization sources follow the reduced field equations") {
    auto prob = lambda_problem(0.5);
    OracleSolver oracle(prob, {});
    const std::size_t n = prob.grid.n_tau;
    std::vector<AmplitudeCell> amps(n);
    std::vector<cplx> ep(n, cplx{2.0, 0.0}), es(n, cplx{1.0, 0.0});

    SUBCASE("b2 = 0 freezes both fields") {
        for (auto& a : amps) a = {cplx{0.6, 0.0}, cplx{0.0, 0.0}, cplx{-0.8, 0.0}};
        auto src = oracle.polarization_sources(amps, ep, es);
        for (std::size_t i = 0; i < n; ++i) {
            CHECK(std::abs(src.dep_dz[i]) == 0.0);
            CHECK(std::abs(src.des_dz[i]) == 0.0);
        }
    }
    SUBCASE("real b1, imaginary b2: amplitude rates only") {
        for (auto& a : amps) a = {cplx{0.6, 0.0}, cplx{0.0, -0.1}, cplx{-0.8, 0.0}};
        auto src = oracle.polarization_sources(amps, ep, es);
        auto rates = oracle.decompose_rates(src, ep, es);
        for (std::size_t i = 0; i < n; i += 97) {
            CHECK(rates.d_omega_p[i] != 0.0);
            CHECK(rates.d_omega_s[i] != 0.0);
            CHECK(rates.d_phi_p[i] == 0.0);
            CHECK(rates.d_phi_s[i] == 0.0);
        }
    }
    SUBCASE("manufactured amplitudes reproduce the formula") {
        const cplx b1{0.5, 0.2}, b2{-0.1, 0.3}, b3{-0.7, 0.1};
        for (auto& a : amps) a = {b1, b2, b3};
        auto src = oracle.polarization_sources(amps, ep, es);
        const double a2 = 100.0;
        cplx want_p = cplx{0.0, -1.0} * (0.5 * a2) * b2 * std::conj(b1);
        cplx want_s = cplx{0.0, -1.0} * a2 * b2 * std::conj(b3);
        CHECK(std::abs(src.dep_dz[0] - want_p) < 1e-12 * std::abs(want_p));
        CHECK(std::abs(src.des_dz[0] - want_s) < 1e-12 * std::abs(want_s));
    }
}

TEST_CASE("phase rates are floored in the dead tails") {
    auto prob = lambda_problem(1.0);
    OracleSolver oracle(prob, {});
    const std::size_t n = prob.grid.n_tau;
    std::vector<AmplitudeCell> amps(n);
    for (auto& a : amps) a = {cplx{0.6, 0.1}, cplx{0.2, 0.3}, cplx{-0.7, 0.0}};
    std::vector<cplx> ep(n, cplx{0.0, 0.0}), es(n, cplx{1e-15, 0.0});
    auto src = oracle.polarization_sources(amps, ep, es);
    auto rates = oracle.decompose_rates(src, ep, es);
    for (std::size_t i = 0; i < n; i += 111) {
        CHECK(rates.d_phi_p[i] == 0.0);
        CHECK(rates.d_phi_s[i] == 0.0);
    }
}

TEST_CASE("propagation to z = 0 returns the entrance slice alone") {
    auto prob = lambda_problem(1.0);
    OracleSolver oracle(prob, {});
    auto hist = oracle.propagate(0.0);
    REQUIRE(hist.slices.size() == 1);
    CHECK(hist.slices[0].z == 0.0);
    auto taus = prob.grid.taus();
    for (std::size_t i = 0; i < taus.size(); ++i) {
        CHECK(std::abs(hist.slices[0].ep[i] - cplx{prob.pulses.omega_p0(taus[i]), 0.0}) == 0.0);
        CHECK(std::abs(hist.slices[0].es[i] - cplx{prob.pulses.omega_s0(taus[i]), 0.0}) == 0.0);
    }
}

TEST_CASE("oracle depletes the pump by z = 3 at equal couplings") {
    auto prob = lambda_problem(1.0, 2.5, 10.0, 2048, {3.0});
    OracleConfig cfg;
    cfg.dz = 0.005;
    OracleSolver oracle(prob, cfg);
    auto hist = oracle.propagate(3.0);
    double peak = 0.0;
    for (const auto& e : hist.slices.back().ep) peak = std::max(peak, std::abs(e));
    CHECK(peak < 0.15 * 10.0);

    // the transported mixing angle stays within 5% of atan2 of the oracle
    AdiabaticSolver solver(prob);
    auto cmp = compare(solver, hist);
    CHECK(cmp.back().l2_theta < 0.05);
}

TEST_CASE("unequal couplings reshape W as conservation dictates") {
    auto prob = lambda_problem(0.5, 2.5, 10.0, 4096, {3.0});
    OracleConfig cfg;
    cfg.dz = 0.0025;
    OracleSolver oracle(prob, cfg);
    auto hist = oracle.propagate(3.0);
    AdiabaticSolver solver(prob);
    const auto& sl = hist.slices.back();
    auto rs = solver.solve_slice(3.0, hist.taus);
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < hist.taus.size(); ++i) {
        double w_a = solver.total_rabi(rs[i], hist.taus[i]);
        double w_o = std::hypot(std::abs(sl.ep[i]), std::abs(sl.es[i]));
        num += (w_a - w_o) * (w_a - w_o);
        den += w_o * w_o;
    }
    CHECK(std::sqrt(num / den) < 0.05);
}

TEST_CASE("first-order upper-level population holds at depth") {
    auto prob = lambda_problem(1.0, 2.5, 10.0, 2048, {1.0});
    OracleConfig cfg;
    cfg.dz = 0.005;
    OracleSolver oracle(prob, cfg);
    auto hist = oracle.propagate(1.0);
    AdiabaticSolver solver(prob);
    const auto& sl = hist.slices.back();
    double max_or = 0.0, max_an = 0.0;
    for (std::size_t i = 0; i < hist.taus.size(); ++i) {
        double tau = hist.taus[i];
        if (prob.pulses.omega_p0(tau) < 1.0 || prob.pulses.omega_s0(tau) < 1.0)
            continue;  // overlap region only
        max_or = std::max(max_or, std::norm(sl.amps[i].b2));
        auto amp = solver.amplitudes(1.0, tau);
        max_an = std::max(max_an, std::norm(amp.b2));
    }
    CHECK(max_or > 0.5 * max_an);
    CHECK(max_or < 2.0 * max_an);
}

TEST_CASE("photon combination is conserved through propagation") {
    auto prob = lambda_problem(1.0, 2.5, 10.0, 2048, {0.0, 1.0, 2.0, 3.0});
    OracleConfig cfg;
    cfg.dz = 0.005;
    OracleSolver oracle(prob, cfg);
    auto hist = oracle.propagate(3.0);
    double n0 = conserved_photon_integral(prob, hist.taus, hist.slices[0].ep,
                                          hist.slices[0].es);
    for (const auto& s : hist.slices) {
        double n = conserved_photon_integral(prob, hist.taus, s.ep, s.es);
        CHECK(std::fabs(n - n0) / std::fabs(n0) < 1e-3);
    }
}

TEST_CASE("decay drains the photon integral monotonically") {
    auto prob = lambda_problem(1.0, 2.5, 10.0, 2048, {0.0, 0.5, 1.0, 1.5, 2.0});
    prob.medium.gamma = 0.5;
    OracleConfig cfg;
    cfg.dz = 0.005;
    OracleSolver oracle(prob, cfg);
    auto hist = oracle.propagate(2.0);
    double n0 = conserved_photon_integral(prob, hist.taus, hist.slices[0].ep,
                                          hist.slices[0].es);
    double prev = n0;
    for (std::size_t i = 1; i < hist.slices.size(); ++i) {
        double n = conserved_photon_integral(prob, hist.taus, hist.slices[i].ep,
                                             hist.slices[i].es);
        CHECK(n < prev);
        prev = n;
    }
    CHECK((n0 - prev) / n0 > 1e-3);  // the loss is resolvable, not roundoff
}

TEST_CASE("slice integrator converges at fourth order in dt") {
    // small amplitude keeps every resolution inside the stability guard
    auto run_last = [&](std::size_t n) {
        auto prob = lambda_problem(1.0, 2.5, 2.0, n);
        OracleSolver oracle(prob, {});
        auto [ep, es] = entrance_fields(prob);
        auto amps = oracle.integrate_slice(ep, es);
        return amps.back();
    };
    auto ref = run_last(16384);
    std::vector<double> errs;
    for (std::size_t n : {512u, 1024u, 2048u}) {
        auto got = run_last(n);
        errs.push_back(std::sqrt(std::norm(got.b1 - ref.b1) + std::norm(got.b2 - ref.b2) +
                                 std::norm(got.b3 - ref.b3)));
    }
    double p1 = std::log2(errs[0] / errs[1]);
    double p2 = std::log2(errs[1] / errs[2]);
    CHECK(p1 > 3.5);
    CHECK(p1 < 4.5);
    CHECK(p2 > 3.5);
    CHECK(p2 < 4.5);
}

TEST_CASE("field march converges at second order in dz") {
    auto run = [&](double dz) {
        auto prob = lambda_problem(1.0, 2.5, 5.0, 1024, {0.5});
        OracleConfig cfg;
        cfg.dz = dz;
        OracleSolver oracle(prob, cfg);
        auto hist = oracle.propagate(0.5);
        return hist.slices.back();
    };
    auto ref = run(0.0003125);
    std::vector<double> errs;
    for (double dz : {0.01, 0.005, 0.0025}) {
        auto s = run(dz);
        double num = 0.0, den = 0.0;
        for (std::size_t i = 0; i < s.ep.size(); ++i) {
            num += std::norm(s.ep[i] - ref.ep[i]) + std::norm(s.es[i] - ref.es[i]);
            den += std::norm(ref.ep[i]) + std::norm(ref.es[i]);
        }
        errs.push_back(std::sqrt(num / den));
    }
    double p1 = std::log2(errs[0] / errs[1]);
    double p2 = std::log2(errs[1] / errs[2]);
    CHECK(p1 > 1.5);
    CHECK(p1 < 2.5);
    CHECK(p2 > 1.5);
    CHECK(p2 < 2.5);
    CHECK(errs.back() < 1e-3);  // halving studies sit well inside the asymptotic range
}

TEST_CASE("discrepancy against the analytic solution shrinks as aT grows") {
    struct Case { double a; std::size_t n; double dz; };
    std::vector<double> errs;
    for (auto c : {Case{10.0, 2048, 0.005}, Case{20.0, 4096, 0.002},
                   Case{40.0, 8192, 0.001}}) {
        auto prob = lambda_problem(1.0, 2.5, c.a, c.n, {1.0});
        OracleConfig cfg;
        cfg.dz = c.dz;
        OracleSolver oracle(prob, cfg);
        auto hist = oracle.propagate(1.0);
        AdiabaticSolver solver(prob);
        auto cmp = compare(solver, hist);
        errs.push_back(std::max(cmp.back().l2_omega_p, cmp.back().l2_omega_s));
    }
    CHECK(errs[0] > errs[1]);
    CHECK(errs[1] > errs[2]);
}

TEST_CASE("comparing the analytic solution against itself gives zero error") {
    auto prob = lambda_problem(0.8, 2.5, 10.0, 1024, {0.0, 0.7});
    AdiabaticSolver solver(prob);
    FieldHistory hist;
    hist.taus = prob.grid.taus();
    for (double z : prob.grid.z_values) {
        OracleSlice s;
        s.z = z;
        auto rs = solver.solve_slice(z, hist.taus);
        s.ep.resize(hist.taus.size());
        s.es.resize(hist.taus.size());
        s.amps.resize(hist.taus.size());
        for (std::size_t i = 0; i < hist.taus.size(); ++i) {
            double th = solver.theta(rs[i]);
            double w = solver.total_rabi(rs[i], hist.taus[i]);
            s.ep[i] = w * std::sin(th);
            s.es[i] = w * std::cos(th);
            double td = solver.theta_dot(rs[i], hist.taus[i]);
            s.amps[i].b2 = cplx{0.0, -td / std::max(w, 1e-300)};
        }
        hist.slices.push_back(std::move(s));
    }
    auto cmp = compare(solver, hist);
    for (const auto& e : cmp) {
        CHECK(e.l2_omega_p < 1e-12);
        CHECK(e.l2_omega_s < 1e-12);
        CHECK(e.linf_omega_p < 1e-12);
        CHECK(e.l2_theta < 1e-12);
        CHECK(e.linf_pop2 < 1e-12);
    }
}

TEST_CASE("breakdown regime shows large errors with a fold annotation") {
    auto prob = lambda_problem(2.0, 2.5, 10.0, 4096, {0.45, 0.55});
    OracleConfig cfg;
    cfg.dz = 0.001;
    OracleSolver oracle(prob, cfg);
    auto hist = oracle.propagate(0.55);
    AdiabaticSolver solver(prob);
    auto cmp = compare(solver, hist);
    bool seen = false;
    for (const auto& e : cmp) {
        if (e.z < 0.4) continue;
        CHECK(e.fold_present);
        if (e.linf_omega_p > 0.2) seen = true;
    }
    CHECK(seen);
}

TEST_CASE("stability guard rejects a too-coarse tau grid") {
    auto prob = lambda_problem(1.0, 2.5, 10.0, 256);
    OracleSolver oracle(prob, {});
    auto [ep, es] = entrance_fields(prob);
    CHECK_THROWS_AS(oracle.integrate_slice(ep, es), StepSizeError);
}

TEST_CASE("mismatched grids are rejected") {
    auto prob = lambda_problem(1.0);
    OracleSolver oracle(prob, {});
    std::vector<cplx> ep(100), es(100);
    CHECK_THROWS_AS(oracle.integrate_slice(ep, es), AlignmentError);
    CHECK_THROWS_AS(relative_l2({1.0, 2.0}, {1.0}), AlignmentError);
}

TEST_CASE("history stores the entrance, the z list and stride slices") {
    auto prob = lambda_problem(1.0, 2.5, 5.0, 1024, {0.25, 0.5});
    OracleConfig cfg;
    cfg.dz = 0.0025;
    cfg.store_stride = 100;  // every 0.25 in z
    OracleSolver oracle(prob, cfg);
    auto hist = oracle.propagate(0.5);
    REQUIRE(hist.slices.size() == 3);
    CHECK(hist.slices[0].z == 0.0);
    CHECK(hist.slices[1].z == doctest::Approx(0.25));
    CHECK(hist.slices[2].z == doctest::Approx(0.5));
    auto fs = hist.to_field_state();
    CHECK(fs.z_values.size() == 3);
    CHECK(fs.cells.size() == 3 * hist.taus.size());
}
