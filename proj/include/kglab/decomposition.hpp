#pragma once

// Mode decomposition: write a state (u,v) as Phi[z] + Xi with Xi symplectically
// orthogonal to the tangent fields d_{JA} Phi[z].  The constraint system
// F_{JA}(u,v,z) = Omega(d_{JA} Phi[z] | (u,v) - Phi[z]) = 0 is solved by Newton
// in the 4n real coordinates z_{JA}, seeded by the linear projection (the
// leading term of F is -4 omega_J z_{JA}).

#include "kglab/bound_states.hpp"

namespace kglab {

// Omega(X|Y) = 2 <J^-1 X | Y>, J^-1 (u,v) = (v,-u)
inline double symplectic_form(const Discretization& d, const FieldState& X,
                              const FieldState& Y) {
    if (X.u.size() != Y.u.size() || X.u.size() != d.n_points)
        throw std::invalid_argument("symplectic_form: mismatched grids");
    return 2.0 * (inner(d, X.v, Y.u) - inner(d, X.u, Y.v));
}

struct ModeDecomposition {
    CVec z;          // length 2n
    FieldState xi;   // remainder, in the constrained subspace
    RVec residuals;  // final F_{JA}, length 4n
    int iterations = 0;
    bool converged = false;
};

struct DecomposeOptions {
    double tol = 1e-10;
    int max_iter = 50;
    bool allow_linear_fallback = false;  // on Newton failure return the seed
};

namespace detail {

inline CVec unpack_z(const RVec& x) {
    CVec z(x.size() / 2);
    for (int J = 0; J < z.size(); ++J) z[J] = cdouble(x[2 * J], x[2 * J + 1]);
    return z;
}

inline RVec constraint_values(const std::vector<BoundStateFamily>& fams,
                              const FieldState& state, const RVec& x) {
    const Discretization& d = fams[0].disc;
    const CVec z = unpack_z(x);
    const FieldState rem = state - phi_total(fams, z);
    const auto der = phi_derivatives(fams, z);
    RVec F(x.size());
    for (int k = 0; k < x.size(); ++k) F[k] = symplectic_form(d, der[k], rem);
    return F;
}

}  // namespace detail

inline ModeDecomposition decompose(const FieldState& state,
                                   const std::vector<BoundStateFamily>& fams,
                                   const DecomposeOptions& opt = {}) {
    const int n = static_cast<int>(fams.size());
    const Discretization& d = fams[0].disc;
    const double m = fams[0].mass;

    // linear seed from the leading structure of F: with d_JR Phi[0] =
    // (phi_J, i omega_J phi_J), d_JI = i d_JR, and Omega(d_JR|d_JI) = 4 omega_J,
    // the linearization is F_JR = Omega(d_JR|state) - 4 omega_J z_JI,
    // F_JI = Omega(d_JI|state) + 4 omega_J z_JR
    RVec x(4 * n);
    for (int J = 0; J < 2 * n; ++J) {
        const BoundStateFamily& fam = fams[J % n];
        const double wt = ((J < n) ? 1.0 : -1.0) * std::sqrt(m * m + fam.e_lin);
        FieldState dR;
        dR.u = fam.phi.cast<cdouble>();
        dR.v = cdouble(0.0, wt) * dR.u;
        FieldState dI = dR * cdouble(0.0, 1.0);
        x[2 * J] = -symplectic_form(d, dI, state) / (4.0 * wt);
        x[2 * J + 1] = symplectic_form(d, dR, state) / (4.0 * wt);
    }

    ModeDecomposition out;
    RVec F = detail::constraint_values(fams, state, x);
    for (int it = 0; it < opt.max_iter && F.lpNorm<Eigen::Infinity>() >= opt.tol; ++it) {
        // finite-difference Jacobian; system is tiny (4n x 4n)
        const double h = 1e-6 * std::max(x.lpNorm<Eigen::Infinity>(), 1e-3);
        RMat Jac(4 * n, 4 * n);
        for (int k = 0; k < 4 * n; ++k) {
            RVec xp = x, xm = x;
            xp[k] += h;
            xm[k] -= h;
            Jac.col(k) = (detail::constraint_values(fams, state, xp) -
                          detail::constraint_values(fams, state, xm)) /
                         (2.0 * h);
        }
        const RVec step = Jac.partialPivLu().solve(-F);
        if (!step.allFinite()) break;
        x += step;
        F = detail::constraint_values(fams, state, x);
        out.iterations = it + 1;
    }
    out.converged = F.lpNorm<Eigen::Infinity>() < opt.tol;
    if (!out.converged && !opt.allow_linear_fallback)
        throw std::runtime_error("decompose: Newton failed (state beyond the ansatz radius?)");
    out.z = detail::unpack_z(x);
    out.xi = state - phi_total(fams, out.z);
    out.residuals = F;
    return out;
}

// conserved energy  <B^2 u|u> + <v|v> + (1/2) int |u|^4
inline double energy(const Operator& op, double mass, const FieldState& s) {
    const Discretization& d = op.disc;
    const double quad = inner(d, CVec(op.H * s.u + mass * mass * s.u), s.u) +
                        inner(d, s.v, s.v);
    double quart = 0.0;
    if (d.geometry == Geometry::radial3d) {
        // u = w/r: int |u|^4 4 pi r^2 dr = 4 pi h sum |w_i|^4 / r_i^2
        const RVec r = d.nodes();
        for (int i = 0; i < d.n_points; ++i)
            quart += std::pow(std::abs(s.u[i]), 4) / (r[i] * r[i]);
    } else {
        for (int i = 0; i < d.n_points; ++i) quart += std::pow(std::abs(s.u[i]), 4);
    }
    quart *= d.measure();
    return quad + 0.5 * quart;
}

}  // namespace kglab
