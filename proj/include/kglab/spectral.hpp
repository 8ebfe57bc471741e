#pragma once

// Discrete H = -Laplacian + V: assembly, point spectrum, functions of
// B = sqrt(H + m^2), the continuous-spectrum projector P_c, and the
// hypothesis checks on the frequency set.

#include "kglab/grid.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <functional>
#include <memory>

namespace kglab {

// Largest grid for which we keep the dense eigendecomposition.
inline constexpr int kDenseCap = 4096;

struct Operator {
    Discretization disc;
    RMat H;  // symmetric, acts on w (radial) or u (line)
};

// 4th-order -d^2/dx^2 with Dirichlet ends. In radial geometry w(r) = r*u(r)
// is odd through r = 0, so the ghost node at -h folds back with a sign; at
// the outer boundary (and both ends of the line) ghosts are dropped.
inline Operator assemble_operator(const Discretization& disc, const PotentialSpec& pot) {
    disc.validate();
    pot.validate(disc);
    const int n = disc.n_points;
    const double h = disc.spacing();
    const double ih2 = 1.0 / (h * h);
    const RVec v = pot.evaluate(disc);

    RMat H = RMat::Zero(n, n);
    const double c0 = 5.0 / 2.0, c1 = -4.0 / 3.0, c2 = 1.0 / 12.0;
    for (int i = 0; i < n; ++i) {
        H(i, i) += c0 * ih2 + v[i];
        if (i >= 1) H(i, i - 1) += c1 * ih2;
        if (i + 1 < n) H(i, i + 1) += c1 * ih2;
        if (i >= 2) H(i, i - 2) += c2 * ih2;
        if (i + 2 < n) H(i, i + 2) += c2 * ih2;
    }
    if (disc.geometry == Geometry::radial3d) {
        // w(-h) = -w(h): the i=0 row's second-neighbor ghost folds onto the diagonal
        H(0, 0) += -c2 * ih2;
    }

    const double asym = (H - H.transpose()).cwiseAbs().maxCoeff();
    if (asym > 1e-12 * H.cwiseAbs().maxCoeff())
        throw std::logic_error("assemble_operator: non-symmetric assembly");
    return Operator{disc, std::move(H)};
}

// Full dense eigendecomposition of H (Euclidean-orthonormal columns).
struct EigenBasis {
    RVec evals;
    RMat evecs;
};

inline EigenBasis diagonalize(const Operator& op) {
    if (op.disc.n_points > kDenseCap)
        throw std::invalid_argument("diagonalize: grid exceeds dense eigendecomposition cap");
    Eigen::SelfAdjointEigenSolver<RMat> es(op.H);
    if (es.info() != Eigen::Success) throw std::runtime_error("diagonalize: eigensolver failed");
    return EigenBasis{es.eigenvalues(), es.eigenvectors()};
}

struct SpectralData {
    Discretization disc;
    double mass = 1.0;
    std::vector<double> eigenvalues;  // e_1 < ... < e_n in (-m^2, 0)
    RMat eigenfunctions;              // columns phi_j, orthonormal in the weighted inner product
    std::vector<double> omegas;       // omega_j = sqrt(m^2 + e_j)
    std::vector<double> signed_omegas;  // length 2n, eq-folded: +omega_j then -omega_j
    std::vector<double> hypothesis_violations;  // eigenvalues at/below -m^2 or near 0
    std::shared_ptr<const EigenBasis> basis;    // cached full decomposition

    int n() const { return static_cast<int>(eigenvalues.size()); }
};

struct H2ViolationError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

inline SpectralData point_spectrum(const Operator& op, double mass,
                                   double degeneracy_tol = 1e-8) {
    if (mass <= 0.0) throw std::invalid_argument("point_spectrum: mass must be > 0");
    auto basis = std::make_shared<EigenBasis>(diagonalize(op));

    SpectralData sd;
    sd.disc = op.disc;
    sd.mass = mass;
    sd.basis = basis;
    const double m2 = mass * mass;
    const double near_zero = 1e-3 * m2;

    std::vector<int> kept;
    for (int k = 0; k < basis->evals.size(); ++k) {
        const double e = basis->evals[k];
        if (e >= 0.0) break;
        if (e <= -m2 || -e < near_zero) {
            sd.hypothesis_violations.push_back(e);
            continue;
        }
        kept.push_back(k);
    }
    for (size_t a = 0; a + 1 < kept.size(); ++a)
        if (basis->evals[kept[a + 1]] - basis->evals[kept[a]] < degeneracy_tol)
            throw H2ViolationError("point_spectrum: degenerate eigenvalue pair at e = " +
                                   std::to_string(basis->evals[kept[a]]));

    const int n = static_cast<int>(kept.size());
    sd.eigenfunctions.resize(op.disc.n_points, n);
    const double scale = 1.0 / std::sqrt(op.disc.measure());
    for (int j = 0; j < n; ++j) {
        sd.eigenvalues.push_back(basis->evals[kept[j]]);
        sd.eigenfunctions.col(j) = basis->evecs.col(kept[j]) * scale;
        sd.omegas.push_back(std::sqrt(m2 + sd.eigenvalues[j]));
    }
    for (int j = 0; j < n; ++j) sd.signed_omegas.push_back(sd.omegas[j]);
    for (int j = 0; j < n; ++j) sd.signed_omegas.push_back(-sd.omegas[j]);
    return sd;
}

struct H3Report {
    int N = 0;
    double min_gap = 0.0;           // min positive element of {omega_j +- omega_l : j >= l}
    int scanned_order = 0;          // min(4N+6, order_cap)
    std::vector<std::vector<int>> violations;  // integer vectors with ||sum m.omega| - m| < tol
};

// smallest N with N*g >= 2m, g = min positive of {omega_j +- omega_l : j >= l};
// then scan |m|_1 <= min(4N+6, order_cap) for |sum m_j omega_j| == m collisions.
inline H3Report check_h3(const SpectralData& sd, int order_cap = 64,
                         double resonance_tol = -1.0) {
    const int n = sd.n();
    if (n < 1) throw std::invalid_argument("check_h3: no point spectrum");
    if (resonance_tol < 0.0) resonance_tol = 1e-6 * sd.mass;

    double g = std::numeric_limits<double>::infinity();
    for (int j = 0; j < n; ++j)
        for (int l = 0; l <= j; ++l) {
            const double s = sd.omegas[j] + sd.omegas[l];
            const double d = sd.omegas[j] - sd.omegas[l];
            if (s > 0.0) g = std::min(g, s);
            if (d > 0.0) g = std::min(g, d);
        }
    if (!std::isfinite(g) || g <= 0.0) throw std::logic_error("check_h3: empty positive set");

    H3Report rep;
    rep.min_gap = g;
    rep.N = static_cast<int>(std::ceil(2.0 * sd.mass / g - 1e-12));
    rep.scanned_order = std::min(4 * rep.N + 6, order_cap);

    std::vector<int> mvec(n, 0);
    std::function<void(int, int, double)> scan = [&](int j, int budget, double acc) {
        if (j == n) {
            if (std::abs(std::abs(acc) - sd.mass) < resonance_tol)
                rep.violations.push_back(mvec);
            return;
        }
        for (int m = -budget; m <= budget; ++m) {
            mvec[j] = m;
            scan(j + 1, budget - std::abs(m), acc + m * sd.omegas[j]);
        }
        mvec[j] = 0;
    };
    scan(0, rep.scanned_order, 0.0);
    return rep;
}

// f(B) u via the cached dense eigendecomposition; f takes the B-eigenvalue
// sqrt(e + m^2) and may be complex-valued (e.g. exp(i t b)).
inline CVec apply_B_function(const SpectralData& sd, const std::function<cdouble(double)>& f,
                             const CVec& u) {
    const EigenBasis& eb = *sd.basis;
    const double m2 = sd.mass * sd.mass;
    CVec w(eb.evals.size());
    for (int k = 0; k < eb.evals.size(); ++k) {
        const double lam = eb.evals[k] + m2;
        if (lam < 0.0)
            throw std::domain_error("apply_B_function: H + m^2 has negative spectrum");
        w[k] = f(std::sqrt(lam));
    }
    const CVec coeff = eb.evecs.transpose() * u;
    return eb.evecs * coeff.cwiseProduct(w);
}

// real-valued f applied to a real field
inline RVec apply_B_function(const SpectralData& sd, const std::function<double(double)>& f,
                             const RVec& u) {
    CVec r = apply_B_function(sd, [&](double b) { return cdouble(f(b), 0.0); }, u.cast<cdouble>());
    return r.real();
}

// P_c u = u - sum_j (<u,phi_j> phi_j + <u,i phi_j> i phi_j)   (real inner product)
inline CVec continuous_projection(const SpectralData& sd, const CVec& u) {
    CVec r = u;
    for (int j = 0; j < sd.n(); ++j) {
        const CVec phi = sd.eigenfunctions.col(j).cast<cdouble>();
        const double a = inner(sd.disc, u, phi);
        const double b = inner(sd.disc, u, CVec(cdouble(0, 1) * phi));
        r -= (a + cdouble(0, 1) * b) * phi;
    }
    return r;
}
inline RVec continuous_projection(const SpectralData& sd, const RVec& u) {
    RVec r = u;
    for (int j = 0; j < sd.n(); ++j) {
        const RVec phi = sd.eigenfunctions.col(j);
        r -= inner(sd.disc, u, phi) * phi;
    }
    return r;
}

}  // namespace kglab
