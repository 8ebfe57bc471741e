#pragma once

// Integer combinatorics of the resonance structure: multi-indices over the
// ordered mode pairs (L,J), L != J, the sets M_K(r) / M(r) / M_min, the
// frequency partition Lambda, and the constructive monomial splitting.
//
// Internally every mode index is 0-based: J in 0..2n-1, the first n indices
// carrying +omega_j and the last n carrying -omega_j.  The K argument of
// enumerate_M_K keeps the 0..2n convention of the defining display: K = 0 is
// the exact-cancellation set, K >= 1 refers to signed_omegas[K-1].

#include "kglab/spectral.hpp"

#include <array>
#include <bit>
#include <cstdint>
#include <unordered_map>

namespace kglab {

// multi-index over ordered pairs (L,J), L != J, flattened row-major
struct PairIndex {
    int two_n = 0;
    std::vector<int> m;  // size two_n*(two_n-1)

    explicit PairIndex(int twon = 0) : two_n(twon), m(twon * (twon - 1), 0) {}

    int flat(int L, int J) const {
        if (L == J) throw std::invalid_argument("PairIndex: diagonal pair (L,J) with L == J");
        return L * (two_n - 1) + (J > L ? J - 1 : J);
    }
    int& at(int L, int J) { return m[flat(L, J)]; }
    int at(int L, int J) const { return m[flat(L, J)]; }

    int order() const {
        int s = 0;
        for (int v : m) s += v;
        return s;
    }
    // mu_L = sum_J m_LJ
    std::vector<int> row_sums() const {
        std::vector<int> mu(two_n, 0);
        for (int L = 0; L < two_n; ++L)
            for (int J = 0; J < two_n; ++J)
                if (J != L) mu[L] += at(L, J);
        return mu;
    }
    // nu_J = sum_L m_LJ
    std::vector<int> col_sums() const {
        std::vector<int> nu(two_n, 0);
        for (int L = 0; L < two_n; ++L)
            for (int J = 0; J < two_n; ++J)
                if (J != L) nu[J] += at(L, J);
        return nu;
    }
    double frequency_sum(const RVec& wt) const {
        double s = 0.0;
        for (int L = 0; L < two_n; ++L)
            for (int J = 0; J < two_n; ++J)
                if (J != L) s += at(L, J) * (wt[L] - wt[J]);
        return s;
    }
    bool operator==(const PairIndex& o) const { return two_n == o.two_n && m == o.m; }
    bool operator<(const PairIndex& o) const { return m < o.m; }
};

// compact exponent pair; entries are capped at 127 so componentwise
// comparisons can run on the packed 64-bit images
struct MonomialPair {
    std::array<std::uint8_t, 8> mu{}, nu{};
    std::uint8_t jtilde = 0;  // smallest K of the correspondence z^mu zbar^nu = zbar_K Z^m

    int order_mu() const {
        int s = 0;
        for (auto v : mu) s += v;
        return s;
    }
    int order_nu() const {
        int s = 0;
        for (auto v : nu) s += v;
        return s;
    }
    std::uint64_t packed_mu() const { return std::bit_cast<std::uint64_t>(mu); }
    std::uint64_t packed_nu() const { return std::bit_cast<std::uint64_t>(nu); }
    double frequency(const RVec& wt) const {  // L = (nu - mu) . wt
        double s = 0.0;
        for (int J = 0; J < wt.size(); ++J) s += (double(nu[J]) - double(mu[J])) * wt[J];
        return s;
    }
    bool operator==(const MonomialPair& o) const { return mu == o.mu && nu == o.nu; }
    bool operator<(const MonomialPair& o) const {
        const int a = order_mu(), b = o.order_mu();
        if (a != b) return a < b;
        if (mu != o.mu) return mu < o.mu;
        return nu < o.nu;
    }
};

// bytewise a <= b on packed exponent vectors (entries < 128, no borrows)
inline bool bytes_le(std::uint64_t a, std::uint64_t b) {
    constexpr std::uint64_t H = 0x8080808080808080ull;
    return (((b | H) - a) & H) == H;
}
inline bool dominates_le(const MonomialPair& small, const MonomialPair& big) {
    return bytes_le(small.packed_mu(), big.packed_mu()) &&
           bytes_le(small.packed_nu(), big.packed_nu());
}

inline cdouble monomial_Z(const CVec& z, const PairIndex& m) {
    cdouble p = 1.0;
    for (int L = 0; L < m.two_n; ++L)
        for (int J = 0; J < m.two_n; ++J)
            if (J != L)
                for (int k = 0; k < m.at(L, J); ++k) p *= z[L] * std::conj(z[J]);
    return p;
}
inline cdouble monomial_munu(const CVec& z, const MonomialPair& p) {
    cdouble v = 1.0;
    for (int J = 0; J < z.size(); ++J) {
        for (int k = 0; k < p.mu[J]; ++k) v *= z[J];
        for (int k = 0; k < p.nu[J]; ++k) v *= std::conj(z[J]);
    }
    return v;
}

namespace detail {

inline std::uint64_t enumeration_size(int slots, int r) {
    // C(r + slots, slots), saturating
    long double c = 1.0L;
    for (int k = 1; k <= slots; ++k) c *= static_cast<long double>(r + k) / k;
    return c > 1e18L ? std::uint64_t(-1) : static_cast<std::uint64_t>(c);
}

// minimal open-addressing set for packed (mu, nu) images; the enumeration
// visits every multi-index once, so insert throughput dominates build_table
class FlatSet128 {
  public:
    explicit FlatSet128(std::size_t expected) { rehash(std::max<std::size_t>(1024, expected * 2)); }

    bool insert(std::uint64_t a, std::uint64_t b) {
        if (size_ * 5 >= cap_ * 3) rehash(cap_ * 2);
        std::size_t i = slot(a, b);
        while (keys_[i].first != kEmpty || keys_[i].second != kEmpty) {
            if (keys_[i].first == a && keys_[i].second == b) return false;
            i = (i + 1) & (cap_ - 1);
        }
        keys_[i] = {a, b};
        ++size_;
        return true;
    }
    template <class F>
    void for_each(F&& f) const {
        for (const auto& k : keys_)
            if (k.first != kEmpty || k.second != kEmpty) f(k.first, k.second);
    }
    std::size_t size() const { return size_; }

  private:
    static constexpr std::uint64_t kEmpty = ~0ull;
    std::vector<std::pair<std::uint64_t, std::uint64_t>> keys_;
    std::size_t cap_ = 0, size_ = 0;

    std::size_t slot(std::uint64_t a, std::uint64_t b) const {
        std::uint64_t h = (a ^ (b * 0x9e3779b97f4a7c15ull));
        h ^= h >> 29;
        h *= 0xbf58476d1ce4e5b9ull;
        h ^= h >> 32;
        return static_cast<std::size_t>(h) & (cap_ - 1);
    }
    void rehash(std::size_t ncap) {
        std::size_t p = 1024;
        while (p < ncap) p <<= 1;
        std::vector<std::pair<std::uint64_t, std::uint64_t>> old = std::move(keys_);
        keys_.assign(p, {kEmpty, kEmpty});
        cap_ = p;
        size_ = 0;
        for (const auto& k : old)
            if (k.first != kEmpty || k.second != kEmpty) insert(k.first, k.second);
    }
};

}  // namespace detail

// M_K(r) for K in 0..2n (K = 0: exact cancellation within tol)
inline std::vector<PairIndex> enumerate_M_K(const RVec& signed_omegas, double mass, int K,
                                            int r, double tol = 1e-9) {
    const int two_n = static_cast<int>(signed_omegas.size());
    if (K < 0 || K > two_n) throw std::invalid_argument("enumerate_M_K: K out of 0..2n");
    const int n0 = two_n * (two_n - 1);
    if (detail::enumeration_size(n0, r) > 200'000'000ull)
        throw std::invalid_argument("enumerate_M_K: enumeration too large, reduce r");

    // per-slot frequency increments in flat order
    std::vector<double> dw(n0);
    {
        PairIndex probe(two_n);
        for (int L = 0; L < two_n; ++L)
            for (int J = 0; J < two_n; ++J)
                if (J != L) dw[probe.flat(L, J)] = signed_omegas[L] - signed_omegas[J];
    }

    std::vector<PairIndex> out;
    PairIndex cur(two_n);
    const double target = (K == 0) ? 0.0 : signed_omegas[K - 1];
    auto rec = [&](auto&& self, int slot, int budget, double dot) -> void {
        if (slot == n0) {
            const bool hit = (K == 0) ? (std::abs(dot) <= tol)
                                      : (std::abs(dot - target) > mass + tol);
            if (hit) out.push_back(cur);
            return;
        }
        for (int v = 0; v <= budget; ++v) {
            cur.m[slot] = v;
            self(self, slot + 1, budget - v, dot + v * dw[slot]);
        }
        cur.m[slot] = 0;
    };
    rec(rec, 0, r, 0.0);
    std::sort(out.begin(), out.end());
    return out;
}

struct ResonanceTable {
    int two_n = 0;
    double mass = 1.0;
    RVec signed_omegas;
    int N = 0;
    int r = 0;  // enumeration order, 2N+4 unless overridden
    double tol = 1e-9;

    std::vector<MonomialPair> M;           // full M(r), sorted
    std::vector<MonomialPair> M_min;       // domination-minimal subset, sorted
    std::vector<MonomialPair> quarantine;  // |.|-m within tol: not classified
    std::vector<double> Lambda;            // distinct L = (nu-mu).wt over M_min
    std::vector<std::vector<int>> M_L;     // per Lambda value, indices into M_min
};

// M(r) assembled from U_K M_K through the correspondence
// z^mu zbar^nu = zbar_K Z^m:  mu_L = sum_J m_LJ, nu_J = sum_L m_LJ + delta_JK.
inline ResonanceTable build_table(const RVec& signed_omegas, double mass, int N,
                                  int r_override = -1, double tol = 1e-9) {
    ResonanceTable tab;
    tab.two_n = static_cast<int>(signed_omegas.size());
    tab.mass = mass;
    tab.signed_omegas = signed_omegas;
    tab.N = N;
    tab.r = (r_override > 0) ? r_override : 2 * N + 4;
    tab.tol = tol;
    const int two_n = tab.two_n, r = tab.r;
    if (two_n > 8 || r > 100)
        throw std::invalid_argument("build_table: packed storage requires 2n <= 8, r <= 100");
    const int n0 = two_n * (two_n - 1);
    if (detail::enumeration_size(n0, r) > 200'000'000ull)
        throw std::invalid_argument("build_table: enumeration too large, override r downward");

    std::vector<double> dw(n0);
    std::vector<int> rowof(n0), colof(n0);
    {
        PairIndex probe(two_n);
        for (int L = 0; L < two_n; ++L)
            for (int J = 0; J < two_n; ++J)
                if (J != L) {
                    const int f = probe.flat(L, J);
                    dw[f] = signed_omegas[L] - signed_omegas[J];
                    rowof[f] = L;
                    colof[f] = J;
                }
    }

    // Stage 1: dedupe the correspondence images.  The marginals (mu, nu') of
    // a multi-index determine its frequency sum, so it suffices to record the
    // distinct (mu, nu') pairs reached by some admissible m and to apply the
    // K predicates once per distinct image afterwards.
    detail::FlatSet128 images(1u << 16);
    std::array<std::uint8_t, 8> mu{}, nu{};
    auto rec = [&](auto&& self, int slot, int budget) -> void {
        if (slot == n0) {
            images.insert(std::bit_cast<std::uint64_t>(mu), std::bit_cast<std::uint64_t>(nu));
            return;
        }
        const int L = rowof[slot], J = colof[slot];
        for (int v = 0; v <= budget; ++v) {
            self(self, slot + 1, budget - v);
            mu[L] += 1;
            nu[J] += 1;
        }
        mu[L] -= std::uint8_t(budget + 1);
        nu[J] -= std::uint8_t(budget + 1);
    };
    rec(rec, 0, r);

    // Stage 2: each image (mu, nu') and each K with the strict predicate on
    // dot = (mu - nu') . wt contributes (mu, nu' + e_K); a given final pair can
    // arise from several (nu', K), so dedupe again and keep the smallest K
    struct KeyHash {
        std::size_t operator()(const std::pair<std::uint64_t, std::uint64_t>& k) const {
            return std::hash<std::uint64_t>()(k.first * 0x9e3779b97f4a7c15ull ^ k.second);
        }
    };
    std::unordered_map<std::pair<std::uint64_t, std::uint64_t>, std::uint8_t, KeyHash> seen;
    seen.reserve(images.size());
    std::unordered_map<std::pair<std::uint64_t, std::uint64_t>, std::uint8_t, KeyHash> near;
    images.for_each([&](std::uint64_t mukey, std::uint64_t nukey) {
        const auto mua = std::bit_cast<std::array<std::uint8_t, 8>>(mukey);
        auto nua = std::bit_cast<std::array<std::uint8_t, 8>>(nukey);
        double dot = 0.0;
        for (int J = 0; J < two_n; ++J) dot += (double(mua[J]) - double(nua[J])) * signed_omegas[J];
        for (int K = 0; K < two_n; ++K) {
            const double gap = std::abs(dot - signed_omegas[K]) - mass;
            if (gap <= -tol) continue;
            nua[K] += 1;
            const std::pair key{mukey, std::bit_cast<std::uint64_t>(nua)};
            nua[K] -= 1;
            if (std::abs(gap) <= tol) {
                near.emplace(key, std::uint8_t(K));
            } else {
                auto [it, fresh] = seen.emplace(key, std::uint8_t(K));
                if (!fresh && K < it->second) it->second = std::uint8_t(K);
            }
        }
    });

    auto unpack_into = [](const auto& src, std::vector<MonomialPair>& dst) {
        dst.reserve(src.size());
        for (const auto& [key, K] : src) {
            MonomialPair p;
            p.mu = std::bit_cast<std::array<std::uint8_t, 8>>(key.first);
            p.nu = std::bit_cast<std::array<std::uint8_t, 8>>(key.second);
            p.jtilde = K;
            dst.push_back(p);
        }
        std::sort(dst.begin(), dst.end());
    };
    unpack_into(seen, tab.M);
    unpack_into(near, tab.quarantine);

    // Minimality filter.  Every element of M is dominated by its
    // disjoint-support reduction (subtract min(mu_J, nu_J) from both sides:
    // the frequency (nu-mu).wt is unchanged, |nu| = |mu|+1 survives, and any
    // disjoint pair with |nu| = |mu|+1 is representable as zbar_K Z^m), so the
    // minimal elements all live in the disjoint-support subset, and an element
    // is minimal iff no smaller *disjoint* element of M sits below it.
    std::vector<MonomialPair> cand;
    for (const auto& p : tab.M) {
        bool disjoint = true;
        for (int J = 0; J < two_n; ++J)
            if (p.mu[J] && p.nu[J]) {
                disjoint = false;
                break;
            }
        if (disjoint) cand.push_back(p);
    }
    // cand is sorted by |mu| shell; same-shell elements cannot strictly
    // dominate each other, so a sweep against minimal-so-far suffices
    for (const auto& p : cand) {
        bool dominated = false;
        for (const auto& q : tab.M_min)
            if (dominates_le(q, p)) {
                dominated = true;
                break;
            }
        if (!dominated) tab.M_min.push_back(p);
    }

    // frequency partition over M_min
    std::vector<std::pair<double, int>> freq;
    for (int i = 0; i < static_cast<int>(tab.M_min.size()); ++i)
        freq.emplace_back(tab.M_min[i].frequency(signed_omegas), i);
    std::sort(freq.begin(), freq.end());
    for (const auto& [L, idx] : freq) {
        if (tab.Lambda.empty() || L - tab.Lambda.back() > 1e-9) {
            tab.Lambda.push_back(L);
            tab.M_L.emplace_back();
        }
        tab.M_L.back().push_back(idx);
    }
    return tab;
}

inline ResonanceTable build_table(const SpectralData& sd, int N, int r_override = -1,
                                  double tol = 1e-9) {
    RVec wt(2 * sd.n());
    for (int J = 0; J < 2 * sd.n(); ++J) wt[J] = sd.signed_omegas[J];
    return build_table(wt, sd.mass, N, r_override, tol);
}

// constructive splitting of a high-order monomial z_J0 Z^m into
// |z_J0| |z_K Z^a| |z_S Z^b| (leftover factors have modulus <= 1 on the ball)
struct MonomialSplit {
    PairIndex a, b;     // folded halves, each of total order N+1
    int K = 0, S = 0;   // extra factor indices (0-based)
    PairIndex c, d;     // the raw halves picked from m (c + d <= m)
    std::vector<int> leftover_mu, leftover_nu;  // row/col sums of m - c - d
};

inline MonomialSplit split_monomial(const RVec& signed_omegas, double mass, int N, int J0,
                                    const PairIndex& bfm) {
    const int two_n = bfm.two_n;
    const int n = two_n / 2;
    if (J0 < 0 || J0 >= two_n) throw std::invalid_argument("split_monomial: J0 out of range");
    if (bfm.order() < 2 * N + 3)
        throw std::invalid_argument("split_monomial: need |m| >= 2N+3");

    MonomialSplit out{PairIndex(two_n), PairIndex(two_n), 0, 0,
                      PairIndex(two_n), PairIndex(two_n), {}, {}};

    // greedy: fill c then d in lexicographic flat order, N+1 units each
    PairIndex rem = bfm;
    auto take = [&](PairIndex& dst) {
        int need = N + 1;
        for (size_t s = 0; s < rem.m.size() && need > 0; ++s) {
            const int t = std::min(rem.m[s], need);
            dst.m[s] = t;
            rem.m[s] -= t;
            need -= t;
        }
        if (need > 0) throw std::logic_error("split_monomial: exhausted budget");
    };
    take(out.c);
    take(out.d);

    // fold (L,J) with s = min, t = max: both indices in the first block keep
    // the ascending slot (s,t); otherwise the unit goes to the slot (t,s)
    auto fold = [&](const PairIndex& src, PairIndex& dst) {
        for (int L = 0; L < two_n; ++L)
            for (int J = 0; J < two_n; ++J) {
                if (J == L || src.at(L, J) == 0) continue;
                const int s = std::min(L, J), t = std::max(L, J);
                if (t <= n - 1)
                    dst.at(s, t) += src.at(L, J);
                else
                    dst.at(t, s) += src.at(L, J);
            }
    };
    fold(out.c, out.a);
    fold(out.d, out.b);

    out.leftover_mu = rem.row_sums();
    out.leftover_nu = rem.col_sums();
    const auto pick_first = [](const std::vector<int>& v) {
        for (size_t i = 0; i < v.size(); ++i)
            if (v[i] > 0) return static_cast<int>(i);
        throw std::logic_error("split_monomial: empty leftover");
    };
    out.K = pick_first(out.leftover_mu);
    out.S = pick_first(out.leftover_nu);

    // both halves must land strictly below -mass against their extra index
    const double dotA = out.a.frequency_sum(signed_omegas);
    const double dotB = out.b.frequency_sum(signed_omegas);
    if (!(dotA - signed_omegas[out.K] < -mass) || !(dotB - signed_omegas[out.S] < -mass))
        throw std::logic_error("split_monomial: frequency inequality violated");
    return out;
}

inline MonomialSplit split_monomial(const ResonanceTable& tab, int J0, const PairIndex& bfm) {
    return split_monomial(tab.signed_omegas, tab.mass, tab.N, J0, bfm);
}

}  // namespace kglab
