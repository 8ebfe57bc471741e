#pragma once

// Brute-force oracles for the resonance combinatorics, kept deliberately
// independent of the library's construction: M is scanned directly over
// exponent pairs (mu, nu) with |nu| = |mu| + 1 using the transportation
// characterization of representability, and the minimal set is extracted by
// a plain domination sweep over the full M (no disjoint-support reduction).

#include "kglab/resonance.hpp"

namespace kglab::testing {

// (mu, nu) is the image of some zbar_K Z^m iff a zero-diagonal nonnegative
// integer matrix with row sums mu and column sums nu - e_K exists for some K
// with nu_K >= 1.  With one forbidden cell per row/column the Gale-Hoffman
// conditions collapse to the singleton cuts mu_I + (nu - e_K)_I <= |mu|.
inline bool oracle_representable(const std::vector<int>& mu, const std::vector<int>& nu) {
    int smu = 0;
    for (int v : mu) smu += v;
    for (size_t K = 0; K < nu.size(); ++K) {
        if (nu[K] < 1) continue;
        bool ok = true;
        for (size_t I = 0; I < mu.size(); ++I)
            if (mu[I] + nu[I] - (I == K ? 1 : 0) > smu) {
                ok = false;
                break;
            }
        if (ok) return true;
    }
    return false;
}

// exhaustive search over actual matrices; exponential, tiny inputs only
inline bool matrix_search_representable(const std::vector<int>& mu,
                                        const std::vector<int>& nu) {
    const int d = static_cast<int>(mu.size());
    for (int K = 0; K < d; ++K) {
        if (nu[K] < 1) continue;
        std::vector<int> cols(nu.begin(), nu.end());
        cols[K] -= 1;
        const std::vector<int> rows(mu.begin(), mu.end());
        // place row by row, cell by cell, skipping the diagonal
        auto place = [&](auto&& self, int L, int J, int left) -> bool {
            if (L == d) return true;
            if (J == d)
                return left == 0 && self(self, L + 1, 0, L + 1 < d ? rows[L + 1] : 0);
            if (J == L) return self(self, L, J + 1, left);
            const int cap = std::min(left, cols[J]);
            for (int v = 0; v <= cap; ++v) {
                cols[J] -= v;
                if (self(self, L, J + 1, left - v)) {
                    cols[J] += v;
                    return true;
                }
                cols[J] += v;
            }
            return false;
        };
        if (place(place, 0, 0, rows[0])) return true;
    }
    return false;
}

// direct scan: all (mu, nu), |mu| <= r, |nu| = |mu| + 1, representable, and
// |(mu - nu) . wt| > mass + tol
inline std::vector<MonomialPair> oracle_M(const RVec& wt, double mass, int r,
                                          double tol = 1e-9) {
    const int d = static_cast<int>(wt.size());
    std::vector<MonomialPair> out;
    std::vector<int> mu(d, 0), nu(d, 0);
    auto scan_nu = [&](auto&& self, int J, int left) -> void {
        if (J == d) {
            if (left != 0) return;
            double dot = 0.0;
            for (int I = 0; I < d; ++I) dot += (mu[I] - nu[I]) * wt[I];
            if (std::abs(dot) - mass <= tol) return;
            if (!oracle_representable(mu, nu)) return;
            MonomialPair p;
            for (int I = 0; I < d; ++I) {
                p.mu[I] = static_cast<std::uint8_t>(mu[I]);
                p.nu[I] = static_cast<std::uint8_t>(nu[I]);
            }
            out.push_back(p);
            return;
        }
        for (int v = 0; v <= left; ++v) {
            nu[J] = v;
            self(self, J + 1, left - v);
        }
        nu[J] = 0;
    };
    // enumerate mu with |mu| <= r; nu then gets the exact budget |mu| + 1
    auto rec_mu = [&](auto&& self, int J, int used, int budget) -> void {
        if (J == d) {
            scan_nu(scan_nu, 0, used + 1);
            return;
        }
        for (int v = 0; v + used <= budget; ++v) {
            mu[J] = v;
            self(self, J + 1, used + v, budget);
        }
        mu[J] = 0;
    };
    rec_mu(rec_mu, 0, 0, r);
    std::sort(out.begin(), out.end());
    return out;
}

// plain domination sweep: ascending |mu| shells, check against minimals found
// so far (same-shell elements cannot strictly dominate)
inline std::vector<MonomialPair> oracle_M_min(std::vector<MonomialPair> M) {
    std::sort(M.begin(), M.end());
    std::vector<MonomialPair> out;
    for (const auto& p : M) {
        bool dominated = false;
        for (const auto& q : out) {
            bool le = true;
            for (int I = 0; I < 8; ++I)
                if (q.mu[I] > p.mu[I] || q.nu[I] > p.nu[I]) {
                    le = false;
                    break;
                }
            if (le) {
                dominated = true;
                break;
            }
        }
        if (!dominated) out.push_back(p);
    }
    return out;
}

}  // namespace kglab::testing
