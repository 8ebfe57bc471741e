#pragma once

// Spectral-density quadratic form <delta(B - lambda) u | u> evaluated as the
// limiting-absorption boundary value (1/pi) lim Im <(H + m^2 - lambda^2 - i eps)^-1 u|u>
// times the 2*lambda Jacobian of b = sqrt(e + m^2), with Richardson
// extrapolation over a geometric eps schedule.  A Gaussian-mollified spectral
// sum is provided as an independent cross-check route.

#include "kglab/spectral.hpp"

namespace kglab {

struct DensityEstimate {
    double value = 0.0;
    double error_estimate = 0.0;
    bool low_confidence = false;
    std::vector<double> raw;  // value at each eps before extrapolation
};

inline std::vector<double> default_eps_schedule(double mass) {
    std::vector<double> s;
    for (int k = 0; k < 6; ++k) s.push_back(0.8 * mass * std::pow(2.0, -k));
    return s;
}

// local spacing of the discrete continuum of H + m^2 near sigma
inline double continuum_spacing(const SpectralData& sd, double sigma) {
    const RVec& ev = sd.basis->evals;
    double best = std::numeric_limits<double>::infinity();
    double gap = 0.0;
    for (int k = 0; k + 1 < ev.size(); ++k) {
        const double mid = 0.5 * (ev[k] + ev[k + 1]);
        if (std::abs(mid - sigma) < best) {
            best = std::abs(mid - sigma);
            gap = ev[k + 1] - ev[k];
        }
    }
    return gap;
}

inline DensityEstimate spectral_density_form(const SpectralData& sd, const CVec& u_in,
                                             double lam,
                                             std::vector<double> eps_schedule = {}) {
    if (lam <= sd.mass)
        throw std::domain_error("spectral_density_form: lambda must exceed the mass");
    if (eps_schedule.empty()) eps_schedule = default_eps_schedule(sd.mass);
    for (size_t k = 0; k + 1 < eps_schedule.size(); ++k)
        if (eps_schedule[k + 1] >= eps_schedule[k])
            throw std::invalid_argument("spectral_density_form: eps schedule must decrease");

    const CVec u = continuous_projection(sd, u_in);
    const EigenBasis& eb = *sd.basis;
    const double m2 = sd.mass * sd.mass;
    const double sigma = lam * lam - m2;

    const CVec coeff = eb.evecs.transpose() * u;
    RVec c2(coeff.size());
    for (int k = 0; k < coeff.size(); ++k) c2[k] = std::norm(coeff[k]);

    // eps floor tied to the discrete continuum level spacing near sigma: below
    // ~1.5 spacings the Lorentzian resolves individual levels instead of the density
    const double floor_eps = 1.5 * continuum_spacing(sd, sigma);

    DensityEstimate out;
    std::vector<double> vals, nodes;
    for (double eps : eps_schedule) {
        if (eps < floor_eps) break;
        double im = 0.0;
        for (int k = 0; k < eb.evals.size(); ++k) {
            const double d = eb.evals[k] - sigma;
            im += c2[k] * eps / (d * d + eps * eps);
        }
        vals.push_back((2.0 * lam / kPi) * sd.disc.measure() * im);
        nodes.push_back(eps);
    }
    out.raw = vals;
    if (vals.size() < 2) {
        out.value = vals.empty() ? 0.0 : vals.back();
        out.error_estimate = std::abs(out.value);
        out.low_confidence = true;
        return out;
    }
    // Neville polynomial extrapolation to eps = 0 over the last few nodes
    const size_t use = std::min<size_t>(4, vals.size());
    const size_t off = vals.size() - use;
    std::vector<double> t(vals.begin() + off, vals.end());
    double prev_order = t.back();
    for (size_t lvl = 1; lvl < use; ++lvl) {
        for (size_t k = 0; k + lvl < use; ++k) {
            const double e0 = nodes[off + k], e1 = nodes[off + k + lvl];
            t[k] = (e0 * t[k + 1] - e1 * t[k]) / (e0 - e1);
        }
        if (lvl + 1 < use) prev_order = t[0];
    }
    out.value = t[0];
    out.error_estimate = std::abs(t[0] - prev_order);
    const double scale = std::max(std::abs(out.value), 1e-300);
    out.low_confidence = out.error_estimate > 0.25 * scale + 1e-12;
    return out;
}

// Gaussian-mollified route: sum_k |c_k|^2 g_sigma(e_k + m^2 - (lam^2 - m^2)) * 2 lam,
// bandwidth tied to the continuum spacing.
inline double mollified_density_form(const SpectralData& sd, const CVec& u_in, double lam,
                                     double bandwidth = -1.0) {
    if (lam <= sd.mass) throw std::domain_error("mollified_density_form: lambda must exceed mass");
    const CVec u = continuous_projection(sd, u_in);
    const EigenBasis& eb = *sd.basis;
    const double m2 = sd.mass * sd.mass;
    const double sigma = lam * lam - m2;
    if (bandwidth <= 0.0) bandwidth = 4.0 * continuum_spacing(sd, sigma);
    const CVec coeff = eb.evecs.transpose() * u;
    double acc = 0.0;
    for (int k = 0; k < eb.evals.size(); ++k) {
        const double d = eb.evals[k] - sigma;
        acc += std::norm(coeff[k]) *
               std::exp(-0.5 * d * d / (bandwidth * bandwidth)) /
               (bandwidth * std::sqrt(2.0 * kPi));
    }
    return 2.0 * lam * sd.disc.measure() * acc;
}

// Free-case oracle (V == 0, radial3d): with unitary Fourier normalization,
// <delta(B - lam) u|u> = (lam/k) * int_{|xi|=k} |uhat|^2 dS = 8 lam |I|^2 / k,
// k = sqrt(lam^2 - m^2), I = int_0^inf w(r) sin(k r) dr.
inline double free_sphere_form_radial(const Discretization& d, const CVec& w, double mass,
                                      double lam) {
    const double k = std::sqrt(lam * lam - mass * mass);
    const RVec r = d.nodes();
    cdouble I = 0.0;
    for (int i = 0; i < d.n_points; ++i) I += w[i] * std::sin(k * r[i]);
    I *= d.spacing();
    return 8.0 * lam * std::norm(I) / k;
}

// 2D free normalization constant of the toy model:
// c = (1/2) int_{|xi|=1} |Ghat|^2 dsigma = pi |Ghat(1)|^2 for radial G,
// Ghat(k) = int_0^inf G(rho) J0(k rho) rho drho.
inline double toy_c_quadrature(const std::function<double(double)>& g_radial, double rho_max,
                               int n_quad = 4096) {
    const double h = rho_max / n_quad;
    double acc = 0.0;
    for (int i = 1; i <= n_quad; ++i) {
        const double rho = (i - 0.5) * h;
        acc += g_radial(rho) * std::cyl_bessel_j(0, rho) * rho;
    }
    acc *= h;
    return kPi * acc * acc;
}

}  // namespace kglab
