// Acceptance gate: every criterion below prints one PASS/FAIL line at its
// stated tolerance and is wired into ctest as its own invocation (tags [c1]
// through [c8]).  Criterion 6 is checked against the reduced-ODE oracle
// y' = -2 pi c y^3 (late-time exponent -1/2); the printed closed form with a
// -1/3 power is dimensionally inconsistent with that generator, so the oracle
// is authoritative (see README).

#include <catch2/catch_amalgamated.hpp>

#include "kglab/config.hpp"
#include "kglab/dynamics.hpp"
#include "kglab/io.hpp"
#include "kglab/sobol.hpp"
#include "resonance_oracle.hpp"

#include <chrono>
#include <cstdlib>
#include <iostream>
#include <random>

using namespace kglab;
namespace oracle = kglab::testing;
using clk = std::chrono::steady_clock;

namespace {

void verdict_line(int crit, bool pass, const std::string& detail) {
    std::cout << "CRITERION " << crit << ": " << (pass ? "PASS" : "FAIL") << " — " << detail
              << std::endl;
    CHECK(pass);
}

double elapsed(clk::time_point t0) {
    return std::chrono::duration<double>(clk::now() - t0).count();
}

RVec synthetic_wt(const std::vector<double>& omegas) {
    const int n = int(omegas.size());
    RVec wt(2 * n);
    for (int j = 0; j < n; ++j) {
        wt[j] = omegas[j];
        wt[j + n] = -omegas[j];
    }
    return wt;
}

CVec random_ball(int d, std::mt19937& rng) {
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    CVec z(d);
    for (int i = 0; i < d; ++i) {
        cdouble c;
        do {
            c = cdouble(u(rng), u(rng));
        } while (std::abs(c) > 1.0);
        z[i] = c;
    }
    return z;
}

// two-mode fixture shared by criteria 3 and 4
struct TwoModeLab {
    Discretization disc;
    Operator op;
    SpectralData sd;
    std::vector<BoundStateFamily> fams;
};

const TwoModeLab& two_mode_lab() {
    static const TwoModeLab L = [] {
        TwoModeLab l;
        l.disc = Discretization{Geometry::radial3d, 384, 40.0, std::nullopt};
        PotentialSpec pot;
        pot.wells = {GaussianWell{-1.4, 5.0, 0.0}};
        l.op = assemble_operator(l.disc, pot);
        l.sd = point_spectrum(l.op, 1.0);
        REQUIRE(l.sd.n() == 2);
        const auto path = default_z_path(0.5, 1e-3, 24);
        for (int j = 0; j < l.sd.n(); ++j) l.fams.push_back(continue_branch(l.sd, l.op, j, path));
        return l;
    }();
    return L;
}

// one-mode fixture for criterion 7: omega ~ 0.395, radiating at 3*omega
struct OneModeLab {
    Discretization disc;
    Operator op;
    SpectralData sd;
    std::vector<BoundStateFamily> fams;
    RVec wt;
};

const OneModeLab& one_mode_lab() {
    static const OneModeLab L = [] {
        OneModeLab l;
        l.disc = Discretization{Geometry::radial3d, 256, 40.0, std::nullopt};
        PotentialSpec pot;
        pot.wells = {GaussianWell{-5.0, 1.2, 0.0}};
        l.op = assemble_operator(l.disc, pot);
        l.sd = point_spectrum(l.op, 1.0);
        REQUIRE(l.sd.n() == 1);
        l.fams.push_back(continue_branch(l.sd, l.op, 0, default_z_path(0.6, 1e-3, 24)));
        l.wt.resize(2);
        l.wt << l.sd.signed_omegas[0], l.sd.signed_omegas[1];
        return l;
    }();
    return L;
}

FieldState one_mode_generic_data(const OneModeLab& l, double amp) {
    CVec z0(2);
    z0 << std::polar(amp, 0.3), std::polar(amp / 3.0, 2.0);
    FieldState s = phi_total(l.fams, z0);
    const RVec r = l.disc.nodes();
    CVec bump(l.disc.n_points);
    for (int i = 0; i < l.disc.n_points; ++i)
        bump[i] = cdouble(0.02, 0.008) * r[i] * std::exp(-r[i] * r[i] / 20.0);
    s.u += continuous_projection(l.sd, bump);
    s.v += continuous_projection(l.sd, CVec(cdouble(0, 1) * bump));
    return s;
}

}  // namespace

TEST_CASE("combinatorics oracle equivalence, n = 1..3, r = 8", "[c1]") {
    const auto t0 = clk::now();
    const std::vector<std::vector<double>> omega_sets = {
        {0.8}, {0.62, 0.93}, {0.57, 0.74, 0.98}};
    bool ok = true;
    std::size_t total_M = 0;
    for (const auto& om : omega_sets) {
        const RVec wt = synthetic_wt(om);
        const ResonanceTable tab = build_table(wt, 1.0, 2);  // r = 2N+4 = 8
        REQUIRE(tab.r == 8);

        const auto M_expect = oracle::oracle_M(wt, 1.0, 8);
        const auto Mmin_expect = oracle::oracle_M_min(M_expect);
        ok = ok && tab.M.size() == M_expect.size() &&
             std::equal(tab.M.begin(), tab.M.end(), M_expect.begin());
        ok = ok && tab.M_min.size() == Mmin_expect.size() &&
             std::equal(tab.M_min.begin(), tab.M_min.end(), Mmin_expect.begin());
        total_M += tab.M.size();

        for (const auto& p : tab.M) ok = ok && p.order_nu() == p.order_mu() + 1;
        for (const auto& p : tab.M_min)
            for (int J = 0; J < tab.two_n; ++J) ok = ok && int(p.mu[J]) * int(p.nu[J]) == 0;

        std::size_t covered = 0;
        for (std::size_t i = 0; i < tab.Lambda.size(); ++i) {
            covered += tab.M_L[i].size();
            for (int idx : tab.M_L[i])
                ok = ok && std::abs(tab.M_min[idx].frequency(wt) - tab.Lambda[i]) < 1e-9;
        }
        ok = ok && covered == tab.M_min.size();
    }
    const double secs = elapsed(t0);
    ok = ok && secs < 30.0;
    verdict_line(1, ok,
                 "build_table == brute force for n in {1,2,3}, |M| total " +
                     std::to_string(total_M) + ", " + std::to_string(secs) + " s (< 30 s)");
}

TEST_CASE("splitting lemma on 500 random monomials", "[c2]") {
    const auto t0 = clk::now();
    // omega~ = W/100 with integer W makes the comb5 inequalities exact
    const std::array<long, 4> W = {62, 93, -62, -93};
    const long massW = 100;
    const RVec wt = synthetic_wt({0.62, 0.93});
    const int N = 7, two_n = 4;  // ceil(2m / 0.31)

    std::mt19937 rng(2026);
    std::uniform_int_distribution<int> slot(0, two_n * (two_n - 1) - 1);
    std::uniform_int_distribution<int> j0pick(0, two_n - 1);
    int failures = 0;
    const int n_fold = two_n / 2;
    for (int trial = 0; trial < 500; ++trial) {
        PairIndex m(two_n);
        for (int k = 0; k < 2 * N + 3 + trial % 4; ++k) m.m[slot(rng)] += 1;
        const int J0 = j0pick(rng);
        MonomialSplit sp;
        try {
            sp = split_monomial(wt, 1.0, N, J0, m);
        } catch (const std::exception&) {
            ++failures;
            continue;
        }
        // comb4 structure: folded slots only, both halves of order N+1
        for (const PairIndex* f : {&sp.a, &sp.b}) {
            int restricted = 0;
            for (int L = 0; L < two_n; ++L)
                for (int J = 0; J < two_n; ++J) {
                    if (J == L || f->at(L, J) == 0) continue;
                    if (!((L < J && J <= n_fold - 1) || (L > J))) ++failures;
                    restricted += f->at(L, J);
                }
            if (restricted != N + 1) ++failures;
        }
        // comb5 in exact integer arithmetic
        auto int_freq = [&](const PairIndex& f) {
            long s = 0;
            for (int L = 0; L < two_n; ++L)
                for (int J = 0; J < two_n; ++J)
                    if (J != L) s += long(f.at(L, J)) * (W[L] - W[J]);
            return s;
        };
        const long dotA = int_freq(sp.a), dotB = int_freq(sp.b);
        if (!(dotA - W[sp.K] < -massW)) ++failures;
        if (!(dotB - W[sp.S] < -massW)) ++failures;
        if (!(std::labs(dotA - W[sp.K]) > massW)) ++failures;
        if (!(std::labs(dotB - W[sp.S]) > massW)) ++failures;
        // comb6 at 100 random z in the unit ball
        std::mt19937 zrng(5000 + trial);
        for (int zt = 0; zt < 100; ++zt) {
            const CVec z = random_ball(two_n, zrng);
            const cdouble left = z[J0] * monomial_Z(z, m);
            const double rhs = std::abs(z[J0]) * std::abs(z[sp.K] * monomial_Z(z, sp.a)) *
                               std::abs(z[sp.S] * monomial_Z(z, sp.b));
            if (std::abs(left) > rhs + 1e-12) ++failures;
        }
    }
    const double secs = elapsed(t0);
    const bool ok = failures == 0 && secs < 30.0;
    verdict_line(2, ok,
                 "500 splits, comb4 + exact comb5 + comb6 x100, " + std::to_string(failures) +
                     " failures, " + std::to_string(secs) + " s (< 30 s)");
}

TEST_CASE("bound-state scalings and stationary residual", "[c3]") {
    const auto t0 = clk::now();
    const TwoModeLab& l = two_mode_lab();
    bool ok = true;
    std::string detail;
    for (const auto& fam : l.fams) {
        std::vector<double> lx, lq, le;
        for (std::size_t s = 1; s < fam.zs.size(); ++s) {
            lx.push_back(std::log(fam.zs[s]));
            lq.push_back(std::log(norm(l.disc, RVec(fam.q_samples.col(int(s))))));
            le.push_back(std::log(std::abs(fam.E_samples[int(s)] - fam.e_lin)));
        }
        const double decades = (lx.back() - lx.front()) / std::log(10.0);
        auto slope = [&](const std::vector<double>& y) {
            double sx = 0, sy = 0, sxx = 0, sxy = 0;
            for (std::size_t i = 0; i < lx.size(); ++i) {
                sx += lx[i];
                sy += y[i];
                sxx += lx[i] * lx[i];
                sxy += lx[i] * y[i];
            }
            const double n = double(lx.size());
            return (n * sxy - sx * sy) / (n * sxx - sx * sx);
        };
        const double s_q = slope(lq), s_e = slope(le);
        ok = ok && decades >= 1.5 && std::abs(s_q - 3.0) < 0.1 && std::abs(s_e - 2.0) < 0.05;
        detail += "branch " + std::to_string(fam.branch) + ": slopes " + std::to_string(s_q) +
                  " / " + std::to_string(s_e) + "; ";
    }
    double res_max = 0.0;
    for (int J = 0; J < 2 * l.sd.n(); ++J)
        for (double a : {0.1, 0.3, 0.5}) {
            const auto sw = standing_wave(l.fams[J % l.sd.n()], J, std::polar(a, 0.4 * J),
                                          l.sd.n());
            res_max = std::max(res_max, standing_wave_residual(l.op, l.sd.mass, sw));
        }
    ok = ok && res_max < 1e-8;
    const double secs = elapsed(t0);
    ok = ok && secs < 120.0;
    verdict_line(3, ok,
                 detail + "residual " + std::to_string(res_max) + ", " + std::to_string(secs) +
                     " s (< 120 s)");
}

TEST_CASE("gauge equivariance of Phi, decompose, nlkg_step, assemble_G_L", "[c4]") {
    const auto t0 = clk::now();
    const TwoModeLab& l = two_mode_lab();
    const int two_n = 2 * l.sd.n();
    const cdouble phase = std::polar(1.0, 1.1);
    std::mt19937 rng(77);
    double worst = 0.0;

    for (int rep = 0; rep < 5; ++rep) {
        const CVec z = 0.3 * random_ball(two_n, rng);
        const FieldState A = phi_total(l.fams, z);
        const FieldState B = phi_total(l.fams, CVec(phase * z));
        worst = std::max(worst, (B.u - phase * A.u).norm() + (B.v - phase * A.v).norm());

        const auto da = decompose(A, l.fams);
        const auto db = decompose(B, l.fams);
        if (!da.converged || !db.converged) worst = 1.0;
        else
            worst = std::max(worst, (db.z - phase * da.z).cwiseAbs().maxCoeff());

        FieldState sa = A, sb = B;
        const RVec sponge = radial_sponge_profile(l.disc);
        for (int k = 0; k < 20; ++k) {
            nlkg_step(l.sd, sa, 0.05, sponge);
            nlkg_step(l.sd, sb, 0.05, sponge);
        }
        worst = std::max(worst, (sb.u - phase * sa.u).norm() / (1.0 + sa.u.norm()));
    }

    const ResonanceTable tab = build_table(l.sd, 5, 6);
    const auto profiles = cubic_leading_profiles(l.sd, tab);
    double L_big = 0.0;
    for (double L : tab.Lambda)
        if (std::abs(L) > l.sd.mass) L_big = L;
    for (int rep = 0; rep < 5; ++rep) {
        const CVec zeta = 0.6 * random_ball(two_n, rng);
        const auto g1 = assemble_G_L(tab, profiles, L_big, zeta);
        const auto g2 = assemble_G_L(tab, profiles, L_big, CVec(phase * zeta));
        const cdouble ip = std::conj(phase);  // |nu| = |mu| + 1 pulls out e^{-i theta}
        worst = std::max(worst,
                         (g2.comp1 - ip * g1.comp1).norm() + (g2.comp2 - ip * g1.comp2).norm());
    }
    const double secs = elapsed(t0);
    const bool ok = worst < 1e-8 && secs < 60.0;
    verdict_line(4, ok,
                 "max gauge deviation " + std::to_string(worst) + " (< 1e-8), " +
                     std::to_string(secs) + " s (< 60 s)");
}

TEST_CASE("spectral-measure positivity and free-sphere formula", "[c5]") {
    const auto t0 = clk::now();
    // positivity over a trapping well
    const OneModeLab& l = one_mode_lab();
    std::mt19937 rng(3);
    std::uniform_real_distribution<double> u(-1.0, 1.0), lp(1.05, 2.95);
    double worst = 1e300;
    const RVec r = l.disc.nodes();
    for (int t = 0; t < 100; ++t) {
        CVec w(l.disc.n_points);
        const double width = 1.0 + 3.0 * (t % 7);
        for (int i = 0; i < l.disc.n_points; ++i)
            w[i] = cdouble(u(rng), u(rng)) * r[i] * std::exp(-r[i] * r[i] / (2 * width * width));
        w /= norm(l.disc, w);
        worst = std::min(worst, spectral_density_form(l.sd, w, lp(rng)).value);
    }

    // free case against the Fourier-sphere quadrature
    Discretization fd{Geometry::radial3d, 1200, 120.0, std::nullopt};
    const Operator fop = assemble_operator(fd, PotentialSpec::free_potential());
    const SpectralData fsd = point_spectrum(fop, 1.0);
    const RVec fr = fd.nodes();
    CVec packet(fd.n_points);
    for (int i = 0; i < fd.n_points; ++i) packet[i] = fr[i] * std::exp(-fr[i] * fr[i] / 2.0);
    double rel_max = 0.0;
    for (double lam : {1.25, 1.5, 1.85, 2.2, 2.6}) {
        const double got = spectral_density_form(fsd, packet, lam).value;
        const double want = free_sphere_form_radial(fd, packet, 1.0, lam);
        rel_max = std::max(rel_max, std::abs(got / want - 1.0));
    }
    const double secs = elapsed(t0);
    const bool ok = worst >= -1e-8 && rel_max < 0.02 && secs < 120.0;
    verdict_line(5, ok,
                 "min form " + std::to_string(worst) + " (>= -1e-8), free-case max rel err " +
                     std::to_string(rel_max) + " (< 2%), " + std::to_string(secs) +
                     " s (< 120 s)");
}

TEST_CASE("toy-model decay against the reduced-ODE oracle at 512^2", "[c6]") {
    const auto t0 = clk::now();
    ToyState s = make_toy_state(512, 200.0, cdouble(0.1, 0.0), 1.0, 8.0);
    const ToyDecayReport rep = toy_run(s, 2500.0, 25, 0.1);
    const double secs = elapsed(t0);
    // the generator integrates to y0 (1 + 4 pi c y0^2 t)^{-1/2}: exponent -1/2,
    // and d y / dt regressed on -2 pi y^3 recovers the quadrature c
    const bool ok = !rep.inconclusive && std::abs(rep.exponent + 0.5) < 0.05 &&
                    std::abs(rep.c_fit / rep.c_frak - 1.0) < 0.25 && rep.ode_max_rel_dev < 0.05 &&
                    secs < 600.0;
    verdict_line(6, ok,
                 "exponent " + std::to_string(rep.exponent) + " (-0.5 +- 0.05), c_fit/c " +
                     std::to_string(rep.c_fit / rep.c_frak) + " (1 +- 0.25), oracle dev " +
                     std::to_string(rep.ode_max_rel_dev) + " (< 0.05), " + std::to_string(secs) +
                     " s (< 600 s)");
}

TEST_CASE("full equation: drift, single-mode survival, real-data decay, scaling", "[c7]") {
    const auto t0 = clk::now();
    const OneModeLab& l = one_mode_lab();
    const RVec sponge = radial_sponge_profile(l.disc);

    // (a) sponge-free relative energy drift per unit time
    FieldState sa = one_mode_generic_data(l, 0.3);
    const double e0 = energy(l.sd, sa);
    double drift = 0.0;
    for (int k = 0; k < 200; ++k) {
        nlkg_step(l.sd, sa, 0.05);
        drift = std::max(drift, std::abs(energy(l.sd, sa) - e0));
    }
    drift /= std::abs(e0) * 10.0;
    const bool ok_a = drift < 1e-6;

    // (b) generic complex data relaxes onto a single branch
    FieldState sb = one_mode_generic_data(l, 0.5);
    const auto traj = nlkg_run(l.sd, l.fams, sb, 45000.0, 200, 0.1, sponge);
    const auto diag = analyze_trajectory(traj, l.wt);
    const std::size_t nt = traj.times.size();
    bool ok_b = !traj.truncated && nt > 100;
    double off_ratio = 1.0, flat = 1.0;
    if (ok_b) {
        const double off0 = traj.Zprod_series.front().maxCoeff();
        off_ratio = diag.offdiag_tail_max / off0;
        double smin = 1e300, smax = 0.0;
        for (std::size_t i = nt - nt / 4; i < nt; ++i) {
            const double a = std::abs(traj.z_series[i][diag.survival_index]);
            smin = std::min(smin, a);
            smax = std::max(smax, a);
        }
        flat = (smax - smin) / smax;
        ok_b = off_ratio < 0.10 && flat < 0.05;
    }

    // (c) real data: every |z_J| decays in trend (block averages decreasing)
    FieldState sc = FieldState::zero(l.disc);
    sc.u = 0.45 * l.sd.eigenfunctions.col(0).cast<cdouble>();
    const auto traj_c = nlkg_run(l.sd, l.fams, sc, 10000.0, 200, 0.1, sponge);
    bool ok_c = !traj_c.truncated && traj_c.times.size() > 100;
    if (ok_c) {
        const int blocks = 8;
        const std::size_t bn = traj_c.times.size() / blocks;
        for (int J = 0; J < 2; ++J) {
            double prev = 1e300;
            for (int b = 0; b < blocks; ++b) {
                double acc = 0.0;
                for (std::size_t i = b * bn; i < (b + 1) * bn; ++i)
                    acc += std::abs(traj_c.z_series[i][J]);
                acc /= double(bn);
                if (acc >= prev) ok_c = false;
                prev = acc;
            }
        }
    }

    // (d) two-point scaling of the flow-residual sup |dz/dt - i omega~ z|:
    // the mode amplitude is scaled while the small radiation seed stays fixed,
    // so the dominant z^2 xi coupling makes the residual quadratic in eps.
    // (Scaling the seed too would leave only purely cubic terms.)
    double res_lo = 0.0, res_hi = 0.0;
    for (double eps : {0.1, 0.2}) {
        FieldState sd_ = one_mode_generic_data(l, eps);
        const auto tj = nlkg_run(l.sd, l.fams, sd_, 20.0, 1, 0.02, sponge);
        const auto dg = analyze_trajectory(tj, l.wt);
        (eps < 0.15 ? res_lo : res_hi) = dg.sup_zdot_residual;
    }
    const double exponent = std::log2(res_hi / res_lo);
    const bool ok_d = std::abs(exponent - 2.0) <= 0.6;

    const double secs = elapsed(t0);
    const bool ok = ok_a && ok_b && ok_c && ok_d && secs < 900.0;
    verdict_line(7, ok,
                 "drift " + std::to_string(drift) + "/t (< 1e-6); offdiag tail/initial " +
                     std::to_string(off_ratio) + " (< 0.10), survivor flat " +
                     std::to_string(flat) + " (< 0.05); real-data trend decay " +
                     std::string(ok_c ? "yes" : "no") + "; residual exponent " +
                     std::to_string(exponent) + " (2 +- 0.6); " +
                     std::to_string(secs) + " s (< 900 s)");
}

TEST_CASE("fullrun determinism: byte-identical verdicts", "[c8]") {
    const auto t0 = clk::now();
    const std::string cli = KGLAB_CLI_PATH;
    const std::string cfg = std::string(KGLAB_CONFIG_DIR) + "/toy_only.cfg";
    const auto dir1 = std::filesystem::temp_directory_path() / "kglab_acc_det1";
    const auto dir2 = std::filesystem::temp_directory_path() / "kglab_acc_det2";
    std::filesystem::remove_all(dir1);
    std::filesystem::remove_all(dir2);
    auto run = [&](const std::filesystem::path& d) {
        const std::string cmd = "\"" + cli + "\" fullrun --threads 1 --config \"" + cfg +
                                "\" --out \"" + d.string() + "\" > /dev/null 2>&1";
        return std::system(cmd.c_str());
    };
    const int rc1 = run(dir1);
    const int rc2 = run(dir2);
    auto slurp = [](const std::filesystem::path& p) {
        std::ifstream in(p, std::ios::binary);
        return std::string(std::istreambuf_iterator<char>(in), {});
    };
    const std::string v1 = slurp(dir1 / "verdict.json");
    const std::string v2 = slurp(dir2 / "verdict.json");
    const bool ok = rc1 == 0 && rc2 == 0 && !v1.empty() && v1 == v2;
    const double secs = elapsed(t0);
    verdict_line(8, ok,
                 "two --threads 1 fullruns, verdicts " +
                     std::string(v1 == v2 && !v1.empty() ? "byte-identical" : "DIFFER") + ", " +
                     std::to_string(secs) + " s");
    std::filesystem::remove_all(dir1);
    std::filesystem::remove_all(dir2);
}
