#pragma once

// Nonlinear bound-state families Q_{jz}: for each discrete branch j, continue
// solutions of  H Q + |Q|^2 Q = E Q,  Q = z*phi_j + q,  <q|phi_j> = 0
// in the real amplitude z by a bordered Newton iteration.  Phases come for
// free from gauge covariance (Q at e^{i theta} z is e^{i theta} times Q at z),
// so the whole family lives on the real ray and is interpolated in |z| by
// natural cubic splines.

#include "kglab/spectral.hpp"

namespace kglab {

// natural cubic spline second derivatives; x strictly increasing, y has one
// row per node (columns are independent data channels)
inline RMat spline_second_derivatives(const std::vector<double>& x, const RMat& y) {
    const int m = static_cast<int>(x.size());
    if (y.rows() != m || m < 3)
        throw std::invalid_argument("spline_second_derivatives: need >= 3 nodes, one row each");
    RMat y2 = RMat::Zero(m, y.cols());
    RMat u = RMat::Zero(m, y.cols());
    RVec diag = RVec::Zero(m);
    for (int i = 1; i + 1 < m; ++i) {
        const double h0 = x[i] - x[i - 1], h1 = x[i + 1] - x[i];
        const double sig = h0 / (h0 + h1);
        const double p = sig * diag[i - 1] + 2.0;
        diag[i] = (sig - 1.0) / p;
        u.row(i) = (6.0 * ((y.row(i + 1) - y.row(i)) / h1 - (y.row(i) - y.row(i - 1)) / h0) /
                        (h0 + h1) -
                    sig * u.row(i - 1)) /
                   p;
    }
    for (int i = m - 2; i >= 1; --i) y2.row(i) = diag[i] * y2.row(i + 1) + u.row(i);
    return y2;
}

inline Eigen::RowVectorXd spline_eval(const std::vector<double>& x, const RMat& y,
                                      const RMat& y2, double at) {
    const int m = static_cast<int>(x.size());
    int lo = static_cast<int>(std::upper_bound(x.begin(), x.end(), at) - x.begin()) - 1;
    lo = std::clamp(lo, 0, m - 2);
    const double h = x[lo + 1] - x[lo];
    const double a = (x[lo + 1] - at) / h, b = (at - x[lo]) / h;
    return a * y.row(lo) + b * y.row(lo + 1) +
           ((a * a * a - a) * y2.row(lo) + (b * b * b - b) * y2.row(lo + 1)) * (h * h) / 6.0;
}

struct ContinuationOptions {
    double tol = 1e-11;  // weighted residual target (contract asks < 1e-10)
    int max_iter = 50;
};

struct BoundStateFamily {
    int branch = 0;  // 0-based branch index j
    Discretization disc;
    double mass = 1.0;
    double e_lin = 0.0;  // linear eigenvalue e_j
    RVec phi;            // weighted-normalized linear eigenfunction

    std::vector<double> zs;  // real amplitudes, ascending, zs[0] == 0
    RMat q_samples;          // n_points rows x sample columns... stored node-major below
    RVec E_samples;

    // spline tables: node per row, channel per column (q_i channels then E)
    RMat spl_y, spl_y2;

    double max_z() const { return zs.back(); }

    void build_splines() {
        const int m = static_cast<int>(zs.size());
        const int n = disc.n_points;
        spl_y.resize(m, n + 1);
        for (int s = 0; s < m; ++s) {
            spl_y.block(s, 0, 1, n) = q_samples.col(s).transpose();
            spl_y(s, n) = E_samples[s];
        }
        spl_y2 = spline_second_derivatives(zs, spl_y);
    }

    // interpolated (q, E) at real amplitude a in [0, max_z()]
    void interpolate(double a, RVec& q, double& E) const {
        if (a < 0.0 || a > max_z() + 1e-14 * std::max(1.0, max_z()))
            throw std::out_of_range("BoundStateFamily: amplitude " + std::to_string(a) +
                                    " outside continued range [0, " + std::to_string(max_z()) + "]");
        const Eigen::RowVectorXd row = spline_eval(zs, spl_y, spl_y2, std::min(a, max_z()));
        q = row.head(disc.n_points).transpose();
        E = row[disc.n_points];
    }

    double energy_shift(double a) const {
        RVec q;
        double E;
        interpolate(a, q, E);
        return E;
    }
};

// amplitude path: >= per_decade samples per decade of |z|, with the absolute
// step additionally capped near the top so the cubic interpolation of the
// family stays well below the PDE-residual tolerance
inline std::vector<double> default_z_path(double z_max, double z_min = 1e-3,
                                          int per_decade = 24) {
    if (!(z_max > z_min && z_min > 0.0))
        throw std::invalid_argument("default_z_path: need z_max > z_min > 0");
    const double ratio = std::pow(10.0, 1.0 / per_decade);
    const double dz_max = z_max / 100.0;
    std::vector<double> path = {z_min};
    while (path.back() < z_max) {
        const double next = std::min({path.back() * ratio, path.back() + dz_max, z_max});
        path.push_back(next);
    }
    return path;
}

// residual of the stationary equation at real (q, E):  H(z phi + q) + Q^3 - E Q
inline RVec stationary_residual(const Operator& op, const RVec& phi, double z, const RVec& q,
                                double E) {
    const RVec Q = z * phi + q;
    return op.H * Q + Q.array().cube().matrix() - E * Q;
}

inline BoundStateFamily continue_branch(const SpectralData& sd, const Operator& op, int branch,
                                        const std::vector<double>& z_path,
                                        const ContinuationOptions& opt = {}) {
    if (branch < 0 || branch >= sd.n())
        throw std::invalid_argument("continue_branch: branch index out of range");
    if (!sd.disc.same_grid(op.disc))
        throw std::invalid_argument("continue_branch: spectral data / operator grid mismatch");

    const int n = sd.disc.n_points;
    BoundStateFamily fam;
    fam.branch = branch;
    fam.disc = sd.disc;
    fam.mass = sd.mass;
    fam.e_lin = sd.eigenvalues[branch];
    fam.phi = sd.eigenfunctions.col(branch);

    std::vector<double> zs = {0.0};
    std::vector<RVec> qs = {RVec::Zero(n)};
    std::vector<double> Es = {fam.e_lin};

    const RVec& phi = fam.phi;
    RMat M(n + 1, n + 1);
    Eigen::VectorXd rhs(n + 1);
    RVec q = RVec::Zero(n);
    double E = fam.e_lin;

    for (double z : z_path) {
        if (z <= zs.back()) throw std::invalid_argument("continue_branch: z_path must increase");
        // secant predictor from the last two accepted samples
        RVec q_try = q;
        double E_try = E;
        if (zs.size() >= 2) {
            const double dz = (z - zs.back()) / (zs.back() - zs[zs.size() - 2]);
            q_try += dz * (qs.back() - qs[qs.size() - 2]);
            E_try += dz * (Es.back() - Es[Es.size() - 2]);
        }

        bool ok = false;
        double prev_res = std::numeric_limits<double>::infinity();
        int grow = 0;
        for (int it = 0; it < opt.max_iter; ++it) {
            const RVec Q = z * phi + q_try;
            const RVec R = op.H * Q + Q.array().cube().matrix() - E_try * Q;
            const double c = inner(sd.disc, q_try, phi);
            const double res = norm(sd.disc, R);
            if (res < opt.tol && std::abs(c) < opt.tol) {
                ok = true;
                break;
            }
            if (res > 2.0 * prev_res && ++grow >= 2) break;  // divergence
            prev_res = std::min(prev_res, res);

            M.topLeftCorner(n, n) = op.H;
            M.topLeftCorner(n, n).diagonal() += (3.0 * Q.array().square() - E_try).matrix();
            M.topRightCorner(n, 1) = -Q;
            M.bottomLeftCorner(1, n) = phi.transpose();
            M(n, n) = 0.0;
            rhs.head(n) = -R;
            rhs[n] = -c / sd.disc.measure();
            const Eigen::VectorXd step = M.partialPivLu().solve(rhs);
            if (!step.allFinite()) break;  // singular bordered system
            q_try += step.head(n);
            E_try += step[n];
        }
        if (!ok) break;  // branch terminates; zs.back() is the empirical a0
        q = q_try;
        E = E_try;
        zs.push_back(z);
        qs.push_back(q);
        Es.push_back(E);
    }

    if (zs.size() < 4)
        throw std::runtime_error("continue_branch: fewer than 4 converged samples on branch " +
                                 std::to_string(branch));

    fam.zs = std::move(zs);
    fam.q_samples.resize(n, static_cast<int>(fam.zs.size()));
    fam.E_samples.resize(static_cast<int>(fam.zs.size()));
    for (size_t s = 0; s < fam.zs.size(); ++s) {
        fam.q_samples.col(static_cast<int>(s)) = qs[s];
        fam.E_samples[static_cast<int>(s)] = Es[s];
    }
    fam.build_splines();
    return fam;
}

struct StandingWavePair {
    CVec upper;          // Q_{Jz}
    CVec lower;          // i * signed_omega * Q_{Jz}
    double energy = 0.0; // E_{Jz}
    double signed_omega = 0.0;
    int index = 0;       // J in 0..2n-1

    FieldState field() const {
        FieldState s;
        s.u = upper;
        s.v = lower;
        return s;
    }
};

// Phi_J[z]: J in 0..2n-1; J >= n folds onto branch J-n with negative frequency
inline StandingWavePair standing_wave(const BoundStateFamily& fam, int J, cdouble z,
                                      int n_branches) {
    const int j = (J < n_branches) ? J : J - n_branches;
    if (j != fam.branch)
        throw std::invalid_argument("standing_wave: family is branch " +
                                    std::to_string(fam.branch) + ", index J needs " +
                                    std::to_string(j));
    StandingWavePair sw;
    sw.index = J;
    const double a = std::abs(z);
    RVec q;
    double E;
    if (a == 0.0) {
        q = RVec::Zero(fam.disc.n_points);
        E = fam.e_lin;
    } else {
        fam.interpolate(a, q, E);
    }
    const double omega = std::sqrt(fam.mass * fam.mass + E);
    sw.energy = E;
    sw.signed_omega = (J < n_branches) ? omega : -omega;
    const cdouble phase = (a == 0.0) ? cdouble(0.0) : z / a;
    sw.upper = phase * (a * fam.phi + q).cast<cdouble>();
    sw.lower = cdouble(0.0, sw.signed_omega) * sw.upper;
    return sw;
}

// weighted norm of the discrete PDE residual of u(t) = e^{i omega t} Q
inline double standing_wave_residual(const Operator& op, double mass,
                                     const StandingWavePair& sw) {
    const double E = sw.signed_omega * sw.signed_omega - mass * mass;
    const CVec r = op.H * sw.upper +
                   sw.upper.array().abs2().matrix().cwiseProduct(sw.upper).eval() - E * sw.upper;
    return norm(op.disc, r);
}

// Phi[z] = sum_J Phi_J[z_J]; families indexed by branch, z has length 2n
inline FieldState phi_total(const std::vector<BoundStateFamily>& families, const CVec& z) {
    const int n = static_cast<int>(families.size());
    if (z.size() != 2 * n)
        throw std::invalid_argument("phi_total: z must have length 2n");
    FieldState out = FieldState::zero(families[0].disc);
    for (int J = 0; J < 2 * n; ++J) {
        if (z[J] == cdouble(0.0)) continue;
        const StandingWavePair sw = standing_wave(families[J % n], J, z[J], n);
        out.u += sw.upper;
        out.v += sw.lower;
    }
    return out;
}

// central finite-difference derivatives d Phi / d z_{JA}, A in {R, I}; output
// order is (J=0,R), (J=0,I), (J=1,R), ...  step defaults to the contract value.
inline std::vector<FieldState> phi_derivatives(const std::vector<BoundStateFamily>& families,
                                               const CVec& z, double step = -1.0) {
    const int n = static_cast<int>(families.size());
    if (z.size() != 2 * n)
        throw std::invalid_argument("phi_derivatives: z must have length 2n");
    if (step <= 0.0) {
        double zmax = 0.0;
        for (int J = 0; J < 2 * n; ++J) zmax = std::max(zmax, std::abs(z[J]));
        step = 1e-5 * std::max(zmax, 1e-3);
    }
    std::vector<FieldState> out;
    out.reserve(4 * n);
    for (int J = 0; J < 2 * n; ++J) {
        for (int A = 0; A < 2; ++A) {
            const cdouble dz = (A == 0) ? cdouble(step, 0.0) : cdouble(0.0, step);
            CVec zp = z, zm = z;
            zp[J] += dz;
            zm[J] -= dz;
            const FieldState fp = phi_total(families, zp);
            const FieldState fm = phi_total(families, zm);
            out.push_back((fp - fm) * cdouble(1.0 / (2.0 * step)));
        }
    }
    return out;
}

}  // namespace kglab
