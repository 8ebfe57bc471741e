#pragma once

// Time integration of the full discretized equation
//   du/dt = v,  dv/dt = -(H + m^2) u - |u|^2 u
// by Strang splitting: exact linear half-steps through the eigenbasis of
// H + m^2, a full nonlinear kick, and an absorbing layer near the grid edge.
// nlkg_run snapshots the flow through the mode decomposition and accumulates
// the trajectory diagnostics the relaxation claims are read from.

#include "kglab/bound_states.hpp"
#include "kglab/decomposition.hpp"
#include "kglab/resonance.hpp"

namespace kglab {

// energy functional evaluated through the cached eigenbasis (no operator matrix
// needed at run time); same quantity as energy(op, mass, state)
inline double energy(const SpectralData& sd, const FieldState& s) {
    const EigenBasis& eb = *sd.basis;
    const double m2 = sd.mass * sd.mass;
    const CVec a = eb.evecs.transpose() * s.u;
    double quad = 0.0;
    for (int k = 0; k < eb.evals.size(); ++k) quad += (eb.evals[k] + m2) * std::norm(a[k]);
    quad = sd.disc.measure() * quad + inner(sd.disc, s.v, s.v);
    double quart = 0.0;
    if (sd.disc.geometry == Geometry::radial3d) {
        const RVec r = sd.disc.nodes();
        for (int i = 0; i < sd.disc.n_points; ++i)
            quart += std::pow(std::norm(s.u[i]), 2) / (r[i] * r[i]);
    } else {
        for (int i = 0; i < sd.disc.n_points; ++i) quart += std::pow(std::norm(s.u[i]), 2);
    }
    return quad + 0.5 * sd.disc.measure() * quart;
}

// absorption rate profile sigma(r): cubic ramp over the outer layer
inline RVec radial_sponge_profile(const Discretization& d, double start_frac = 0.7,
                                  double strength = 2.0) {
    const RVec r = d.nodes();
    const double r0 = start_frac * d.domain_radius;
    RVec sigma = RVec::Zero(d.n_points);
    for (int i = 0; i < d.n_points; ++i) {
        const double t = (r[i] - r0) / (d.domain_radius - r0);
        if (t > 0.0) sigma[i] = strength * t * t * t;
    }
    return sigma;
}

inline void nlkg_step(const SpectralData& sd, FieldState& s, double dt,
                      const RVec& sponge_sigma = RVec(), bool with_nonlinearity = true) {
    const EigenBasis& eb = *sd.basis;
    const double m2 = sd.mass * sd.mass;
    if (!s.u.allFinite() || !s.v.allFinite()) throw std::runtime_error("nlkg_step: NaN");

    RVec omega(eb.evals.size());
    for (int k = 0; k < eb.evals.size(); ++k) {
        const double lam = eb.evals[k] + m2;
        if (lam <= 0.0) throw std::domain_error("nlkg_step: B^2 not positive");
        omega[k] = std::sqrt(lam);
    }

    auto half_linear = [&](double h) {
        CVec a = eb.evecs.transpose() * s.u;
        CVec b = eb.evecs.transpose() * s.v;
        for (int k = 0; k < omega.size(); ++k) {
            const double c = std::cos(omega[k] * h), sn = std::sin(omega[k] * h);
            const cdouble an = c * a[k] + sn / omega[k] * b[k];
            b[k] = -omega[k] * sn * a[k] + c * b[k];
            a[k] = an;
        }
        s.u = eb.evecs * a;
        s.v = eb.evecs * b;
    };

    half_linear(dt / 2.0);
    if (with_nonlinearity) {
        // radial fields store w = r u, so |u|^2 u reads |w|^2 w / r^2
        if (sd.disc.geometry == Geometry::radial3d) {
            const RVec r2 = sd.disc.nodes().cwiseAbs2();
            s.v.array() -= dt * s.u.array().abs2() * s.u.array() / r2.array();
        } else {
            s.v.array() -= dt * s.u.array().abs2() * s.u.array();
        }
    }
    half_linear(dt / 2.0);

    if (sponge_sigma.size() > 0) {
        const RVec damp = (-std::abs(dt) * sponge_sigma).array().exp();
        s.u.array() *= damp.array();
        s.v.array() *= damp.array();
    }
    s.time += dt;
}

struct ModeTrajectory {
    std::vector<double> times;
    std::vector<CVec> z_series;               // 2n-vector per snapshot
    std::vector<RVec> Zprod_series;           // |z_J conj(z_K)|, J < K, flattened
    std::vector<double> radiation_local_norm; // <r>^{-2}-weighted L2 of the remainder
    std::vector<double> energy_series;
    bool truncated = false;                   // decomposition left the ansatz basin
    std::string truncation_note;
};

struct TrajectoryDiagnostics {
    int survival_index = -1;           // argmax of final |z_J|
    double offdiag_tail_max = 0.0;     // max over J != K of tail-averaged |z_J z_K|
    double sup_zdot_residual = 0.0;    // sup_t max_J |dz_J/dt - i omega~_J z_J|
    std::vector<double> l2_monomials;  // sqrt(int |z^mu zbar^nu|^2 dt) per M_min entry
};

inline ModeTrajectory nlkg_run(const SpectralData& sd,
                               const std::vector<BoundStateFamily>& families,
                               FieldState s, double t_final, int snap_stride, double dt,
                               const RVec& sponge_sigma = RVec(),
                               const DecomposeOptions& dopt = {}) {
    ModeTrajectory traj;
    const int n_steps = int(std::llround(t_final / dt));
    const RVec r = sd.disc.nodes();
    const RVec wloc = (1.0 + r.array().abs2()).inverse();  // <r>^{-2} weight

    auto snapshot = [&]() -> bool {
        ModeDecomposition dec;
        try {
            dec = decompose(s, families, dopt);
        } catch (const std::exception& e) {
            traj.truncated = true;
            traj.truncation_note = e.what();
            return false;
        }
        traj.times.push_back(s.time);
        traj.z_series.push_back(dec.z);
        const int two_n = int(dec.z.size());
        RVec zp(two_n * (two_n - 1) / 2);
        int idx = 0;
        for (int J = 0; J < two_n; ++J)
            for (int K = J + 1; K < two_n; ++K)
                zp[idx++] = std::abs(dec.z[J] * std::conj(dec.z[K]));
        traj.Zprod_series.push_back(zp);
        const CVec& xu = dec.xi.u;
        const CVec& xv = dec.xi.v;
        double loc = 0.0;
        for (int i = 0; i < xu.size(); ++i)
            loc += wloc[i] * (std::norm(xu[i]) + std::norm(xv[i]));
        traj.radiation_local_norm.push_back(std::sqrt(sd.disc.measure() * loc));
        traj.energy_series.push_back(energy(sd, s));
        return true;
    };

    if (!snapshot()) return traj;
    for (int step = 1; step <= n_steps; ++step) {
        nlkg_step(sd, s, dt, sponge_sigma);
        if (step % snap_stride == 0 && !snapshot()) break;
    }
    return traj;
}

inline TrajectoryDiagnostics analyze_trajectory(const ModeTrajectory& traj,
                                                const RVec& signed_omegas,
                                                const ResonanceTable* tab = nullptr) {
    TrajectoryDiagnostics d;
    const size_t n = traj.times.size();
    if (n < 3) return d;
    const int two_n = int(traj.z_series.front().size());

    double best = -1.0;
    for (int J = 0; J < two_n; ++J)
        if (std::abs(traj.z_series.back()[J]) > best) {
            best = std::abs(traj.z_series.back()[J]);
            d.survival_index = J;
        }

    // tail average of the pair products over the last quarter of the run
    const size_t tail0 = n - std::max<size_t>(1, n / 4);
    RVec acc = RVec::Zero(traj.Zprod_series.front().size());
    for (size_t i = tail0; i < n; ++i) acc += traj.Zprod_series[i];
    acc /= double(n - tail0);
    d.offdiag_tail_max = acc.size() > 0 ? acc.maxCoeff() : 0.0;

    for (size_t i = 1; i + 1 < n; ++i) {
        const double h2 = traj.times[i + 1] - traj.times[i - 1];
        for (int J = 0; J < two_n; ++J) {
            const cdouble fd = (traj.z_series[i + 1][J] - traj.z_series[i - 1][J]) / h2;
            const cdouble res = fd - cdouble(0, signed_omegas[J]) * traj.z_series[i][J];
            d.sup_zdot_residual = std::max(d.sup_zdot_residual, std::abs(res));
        }
    }

    if (tab) {
        d.l2_monomials.assign(tab->M_min.size(), 0.0);
        for (size_t k = 0; k < tab->M_min.size(); ++k) {
            double acc2 = 0.0;
            for (size_t i = 0; i + 1 < n; ++i) {
                const double w = traj.times[i + 1] - traj.times[i];
                acc2 += w * std::norm(monomial_munu(traj.z_series[i], tab->M_min[k]));
            }
            d.l2_monomials[k] = std::sqrt(acc2);
        }
    }
    return d;
}

}  // namespace kglab
