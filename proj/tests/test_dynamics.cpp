#include "lab_fixture.hpp"

#include "kglab/dynamics.hpp"

#include <random>

using namespace kglab;
using kglab::testing::lab;
using kglab::testing::Lab;

namespace {

FieldState linear_mode(const Lab& l, int j) {
    FieldState s = FieldState::zero(l.disc);
    s.u = l.sd.eigenfunctions.col(j).cast<cdouble>();
    s.v = cdouble(0.0, l.sd.omegas[j]) * s.u;
    return s;
}

FieldState smooth_random_state(const Lab& l, double eps, unsigned seed) {
    std::mt19937 rng(seed);
    std::uniform_real_distribution<double> ph(0.0, 2.0 * kPi);
    const RVec r = l.disc.nodes();
    FieldState s = FieldState::zero(l.disc);
    for (int m = 1; m <= 4; ++m) {
        const cdouble cu = std::polar(eps / m, ph(rng));
        const cdouble cv = std::polar(eps / m, ph(rng));
        for (int i = 0; i < l.disc.n_points; ++i) {
            const double env = r[i] * std::exp(-r[i] * r[i] / 50.0);
            const double osc = std::sin(m * kPi * r[i] / l.disc.domain_radius);
            s.u[i] += cu * env * osc;
            s.v[i] += cv * env * osc;
        }
    }
    return s;
}

}  // namespace

TEST_CASE("linear flow is exact: standing linear mode over 100 periods") {
    const Lab& l = lab();
    FieldState s = linear_mode(l, 0);
    const double w = l.sd.omegas[0];
    const double period = 2.0 * kPi / w;
    const int per_period = 16;
    const double dt = period / per_period;
    const double e0 = inner(l.disc, CVec(l.op.H * s.u + s.u), s.u) + inner(l.disc, s.v, s.v);
    double emax = 0.0;
    for (int k = 0; k < 100 * per_period; ++k) {
        nlkg_step(l.sd, s, dt, RVec(), false);
        const double e = inner(l.disc, CVec(l.op.H * s.u + s.u), s.u) + inner(l.disc, s.v, s.v);
        emax = std::max(emax, std::abs(e - e0));
    }
    // after an integer number of periods the mode returns to itself
    const CVec expect = l.sd.eigenfunctions.col(0).cast<cdouble>();
    CHECK((s.u - expect).norm() < 1e-10 * expect.norm());
    CHECK(emax / std::abs(e0) < 1e-12 * 100 * per_period);  // < 1e-12 per step
}

TEST_CASE("nonlinear standing wave keeps |z_J| constant over 50 periods") {
    const Lab& l = lab();
    const double a = 0.15;
    const auto sw = standing_wave(l.fams[0], 0, cdouble(a, 0.0), 2);
    FieldState s = sw.field();
    const double w = sw.signed_omega;
    const double t_final = 50.0 * 2.0 * kPi / std::abs(w);
    const double dt = 0.05;
    const int n_steps = int(t_final / dt);
    double dev = 0.0;
    for (int k = 1; k <= n_steps; ++k) {
        nlkg_step(l.sd, s, dt);
        if (k % 500 == 0 || k == n_steps) {
            auto dec = decompose(s, l.fams);
            REQUIRE(dec.converged);
            dev = std::max(dev, std::abs(std::abs(dec.z[0]) - a));
            // other branch stays empty
            dev = std::max(dev, std::abs(dec.z[1]));
        }
    }
    CHECK(dev < 1e-4);
}

TEST_CASE("energy conserved at integrator order") {
    const Lab& l = lab();
    std::vector<double> drift;
    for (double dtv : {0.08, 0.04, 0.02}) {
        FieldState s = smooth_random_state(l, 0.1, 3);
        const double e0 = energy(l.sd, s);
        double emax = 0.0;
        for (int k = 0; k < int(10.0 / dtv); ++k) {
            nlkg_step(l.sd, s, dtv);
            emax = std::max(emax, std::abs(energy(l.sd, s) - e0));
        }
        drift.push_back(emax / std::abs(e0) / 10.0);  // relative per unit time
    }
    INFO("drift " << drift[0] << " " << drift[1] << " " << drift[2]);
    CHECK(drift[1] < 1e-6);
    const double order = std::log2(drift[0] / drift[2]) / 2.0;
    CHECK(order == Catch::Approx(2.0).margin(0.6));
    // the two energy implementations agree
    FieldState s = smooth_random_state(l, 0.1, 4);
    CHECK(energy(l.sd, s) == Catch::Approx(energy(l.op, l.sd.mass, s)).epsilon(1e-10));
}

TEST_CASE("gauge equivariance of the full step") {
    const Lab& l = lab();
    FieldState a = smooth_random_state(l, 0.2, 7);
    const cdouble phase = std::polar(1.0, 1.3);
    FieldState b = a;
    b.u *= phase;
    b.v *= phase;
    const RVec sponge = radial_sponge_profile(l.disc);
    for (int k = 0; k < 40; ++k) {
        nlkg_step(l.sd, a, 0.05, sponge);
        nlkg_step(l.sd, b, 0.05, sponge);
    }
    CHECK((b.u - phase * a.u).norm() < 1e-12 * (1.0 + a.u.norm()));
    CHECK((b.v - phase * a.v).norm() < 1e-12 * (1.0 + a.v.norm()));
}

TEST_CASE("sponge-free integrator is time reversible") {
    const Lab& l = lab();
    FieldState s = smooth_random_state(l, 0.2, 11);
    const FieldState s0 = s;
    for (int k = 0; k < 200; ++k) nlkg_step(l.sd, s, 0.05);
    for (int k = 0; k < 200; ++k) nlkg_step(l.sd, s, -0.05);
    CHECK((s.u - s0.u).norm() < 1e-6 * (1.0 + s0.u.norm()));
    CHECK((s.v - s0.v).norm() < 1e-6 * (1.0 + s0.v.norm()));
    CHECK(std::abs(s.time) < 1e-12);
}

TEST_CASE("linear flow preserves the symplectic form") {
    const Lab& l = lab();
    FieldState X = smooth_random_state(l, 0.3, 13);
    FieldState Y = smooth_random_state(l, 0.3, 17);
    const double before = symplectic_form(l.disc, X, Y);
    for (int k = 0; k < 20; ++k) {
        nlkg_step(l.sd, X, 0.1, RVec(), false);
        nlkg_step(l.sd, Y, 0.1, RVec(), false);
    }
    CHECK(std::abs(symplectic_form(l.disc, X, Y) - before) < 1e-10 * (1.0 + std::abs(before)));
}

TEST_CASE("nlkg_run trajectory and diagnostics on near-standing data") {
    const Lab& l = lab();
    const double a = 0.08;
    FieldState s = standing_wave(l.fams[1], 1, cdouble(a, 0.0), 2).field();
    // small continuum perturbation
    FieldState pert = smooth_random_state(l, 0.01, 19);
    pert.u = continuous_projection(l.sd, pert.u);
    pert.v = continuous_projection(l.sd, pert.v);
    s += pert;

    const RVec sponge = radial_sponge_profile(l.disc);
    const double dt = 0.05;
    RVec wt(4);
    for (int J = 0; J < 4; ++J) wt[J] = l.sd.signed_omegas[J];
    auto traj = nlkg_run(l.sd, l.fams, s, 40.0, 2, dt, sponge);
    REQUIRE_FALSE(traj.truncated);
    REQUIRE(traj.times.size() > 100);
    for (size_t i = 1; i < traj.times.size(); ++i)
        REQUIRE(traj.times[i] > traj.times[i - 1]);
    REQUIRE(traj.z_series.size() == traj.times.size());
    REQUIRE(traj.Zprod_series.size() == traj.times.size());
    REQUIRE(traj.energy_series.size() == traj.times.size());

    auto diag = analyze_trajectory(traj, wt);
    CHECK(diag.survival_index == 1);
    CHECK(diag.offdiag_tail_max < 0.1 * a);
    CHECK(diag.sup_zdot_residual < 10.0 * a * a);
    // energy moves only through the sponge: small for interior data
    const double e0 = traj.energy_series.front();
    for (double e : traj.energy_series) CHECK(std::abs(e - e0) < 0.05 * std::abs(e0));
}

TEST_CASE("mode trajectory commutes with time reversal over short horizons") {
    const Lab& l = lab();
    FieldState s = standing_wave(l.fams[0], 0, cdouble(0.1, 0.0), 2).field();
    auto d0 = decompose(s, l.fams);
    for (int k = 0; k < 100; ++k) nlkg_step(l.sd, s, 0.04);
    for (int k = 0; k < 100; ++k) nlkg_step(l.sd, s, -0.04);
    auto d1 = decompose(s, l.fams);
    CHECK((d1.z - d0.z).cwiseAbs().maxCoeff() < 1e-6);
}
