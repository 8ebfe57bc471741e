#pragma once

// Fermi-Golden-Rule quadratic forms: the coupling fields G_L(zeta), the
// damping coefficients L <G_L | delta(.)| G_L> with the component selection of
// the master reduction, and the sampled certification of the (H4) lower bound.
//
// The true coupling profiles come from a normal-form expansion that is out of
// scope here; callers either supply their own or use the clearly-flagged
// cubic leading-order surrogate built from eigenfunction products.

#include "kglab/resolvent.hpp"
#include "kglab/resonance.hpp"
#include "kglab/sobol.hpp"

namespace kglab {

// two-component coupling field for one (mu, nu) in M_min
struct CouplingProfile {
    CVec comp1, comp2;
    bool surrogate = false;  // true when built by cubic_leading_profiles
};

struct TwoComponentField {
    CVec comp1, comp2;
};

// G_L(zeta) = sum_{(mu,nu) in M_L} zeta^mu conj(zeta)^nu G_{mu nu}
inline TwoComponentField assemble_G_L(const ResonanceTable& tab,
                                      const std::vector<CouplingProfile>& profiles,
                                      double L, const CVec& zeta) {
    if (profiles.size() != tab.M_min.size())
        throw std::invalid_argument("assemble_G_L: one profile per M_min element required");
    int li = -1;
    for (size_t i = 0; i < tab.Lambda.size(); ++i)
        if (std::abs(tab.Lambda[i] - L) <= 1e-9) li = static_cast<int>(i);
    if (li < 0) throw std::invalid_argument("assemble_G_L: L is not in Lambda");

    const int np = static_cast<int>(profiles.empty() ? 0 : profiles[0].comp1.size());
    TwoComponentField g{CVec::Zero(np), CVec::Zero(np)};
    for (int idx : tab.M_L[li]) {
        const cdouble w = monomial_munu(zeta, tab.M_min[idx]);
        g.comp1 += w * profiles[idx].comp1;
        g.comp2 += w * profiles[idx].comp2;
    }
    return g;
}

// the master-reduction damping term for one L: the delta form is evaluated on
// the second component for L > m and on the first for L < -m
inline DensityEstimate fgr_coefficient(const SpectralData& sd, const TwoComponentField& g,
                                       double L, bool mollified = false) {
    if (std::abs(L) <= sd.mass)
        throw std::domain_error("fgr_coefficient: |L| must exceed the mass");
    const CVec& comp = (L > 0) ? g.comp2 : g.comp1;
    DensityEstimate d;
    if (mollified) {
        d.value = mollified_density_form(sd, comp, std::abs(L));
    } else {
        d = spectral_density_form(sd, comp, std::abs(L));
    }
    d.value *= std::abs(L);
    d.error_estimate *= std::abs(L);
    return d;
}

struct FgrReport {
    std::vector<double> Lambda;    // |L| > m entries only (gap entries skipped)
    std::vector<double> gamma;     // min over sampled zeta of the per-L term
    double total = 0.0;            // sum of the gamma entries
    double c_certified = 0.0;      // largest c with (H4) holding on the samples
    double h4_margin = 0.0;        // min over zeta of lhs - (4c/pi) sum|zeta^(mu+nu)|^2
    bool degenerate = false;       // all monomial weights vanished on every sample
    bool low_confidence = false;   // propagated from the density extrapolation
};

inline FgrReport check_h4(const SpectralData& sd, const ResonanceTable& tab,
                          const std::vector<CouplingProfile>& profiles,
                          const std::vector<CVec>& zeta_samples, bool mollified = false) {
    FgrReport rep;
    std::vector<int> lam_idx;
    for (size_t i = 0; i < tab.Lambda.size(); ++i)
        if (std::abs(tab.Lambda[i]) > sd.mass) {
            rep.Lambda.push_back(tab.Lambda[i]);
            lam_idx.push_back(static_cast<int>(i));
        }
    rep.gamma.assign(rep.Lambda.size(), std::numeric_limits<double>::infinity());

    double ratio_min = std::numeric_limits<double>::infinity();
    double lhs_max = 0.0;
    bool any_weight = false;
    for (const CVec& zeta : zeta_samples) {
        double lhs = 0.0;
        for (size_t k = 0; k < lam_idx.size(); ++k) {
            const double L = rep.Lambda[k];
            const TwoComponentField g = assemble_G_L(tab, profiles, L, zeta);
            const DensityEstimate d = fgr_coefficient(sd, g, L, mollified);
            rep.low_confidence |= d.low_confidence;
            rep.gamma[k] = std::min(rep.gamma[k], d.value);
            lhs += d.value;
        }
        lhs_max = std::max(lhs_max, std::abs(lhs));
        double rhs = 0.0;
        for (const auto& p : tab.M_min) rhs += std::norm(monomial_munu(zeta, p));
        if (rhs > 1e-14) {
            any_weight = true;
            ratio_min = std::min(ratio_min, lhs / rhs);
        }
    }
    if (!any_weight || lhs_max < 1e-300) {
        // no monomial weight anywhere, or identically vanishing coupling
        rep.degenerate = true;
        rep.c_certified = 0.0;
    } else {
        rep.c_certified = std::max(0.0, kPi / 4.0 * ratio_min);
    }
    for (double g : rep.gamma) rep.total += std::isfinite(g) ? g : 0.0;

    // margin against the certified constant
    rep.h4_margin = std::numeric_limits<double>::infinity();
    for (const CVec& zeta : zeta_samples) {
        double rhs = 0.0;
        for (const auto& p : tab.M_min) rhs += std::norm(monomial_munu(zeta, p));
        if (rhs > 1e-14)
            rep.h4_margin =
                std::min(rep.h4_margin, (ratio_min - 4.0 * rep.c_certified / kPi) * rhs);
    }
    if (!std::isfinite(rep.h4_margin)) rep.h4_margin = 0.0;
    return rep;
}

// cubic leading-order surrogate profiles: for each (mu,nu) in M_min of total
// cubic order, the pointwise eigenfunction product phi^(mu+nu) projected on
// the continuous subspace, placed in the component the sign of L selects.
// In radial geometry the product of stored radial profiles w_k = r u_k is
// w = r u1 u2 u3 = w1 w2 w3 / r^2.
inline std::vector<CouplingProfile> cubic_leading_profiles(const SpectralData& sd,
                                                           const ResonanceTable& tab) {
    const int n = sd.n(), np = sd.disc.n_points;
    std::vector<CouplingProfile> out(tab.M_min.size());
    const RVec r = sd.disc.nodes();
    for (size_t i = 0; i < tab.M_min.size(); ++i) {
        CouplingProfile& cp = out[i];
        cp.comp1 = CVec::Zero(np);
        cp.comp2 = CVec::Zero(np);
        cp.surrogate = true;
        const MonomialPair& p = tab.M_min[i];
        if (p.order_mu() + p.order_nu() != 3) continue;  // higher orders: no surrogate

        RVec prod = RVec::Ones(np);
        for (int J = 0; J < tab.two_n; ++J) {
            const int reps = int(p.mu[J]) + int(p.nu[J]);
            for (int k = 0; k < reps; ++k)
                prod = prod.cwiseProduct(sd.eigenfunctions.col(J % n));
        }
        if (sd.disc.geometry == Geometry::radial3d)
            prod = prod.cwiseQuotient(r.cwiseProduct(r));
        const CVec proj = continuous_projection(sd, CVec(prod.cast<cdouble>()));
        const double L = p.frequency(tab.signed_omegas);
        if (L > sd.mass)
            cp.comp2 = proj;
        else
            cp.comp1 = proj;
    }
    return out;
}

}  // namespace kglab
