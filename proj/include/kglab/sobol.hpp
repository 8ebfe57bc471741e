#pragma once

// Gray-code Sobol sequence (direction numbers from the standard Joe-Kuo
// table, first 16 dimensions) and the polydisk sampler used by the (H4)
// certification.

#include "kglab/grid.hpp"

#include <cstdint>

namespace kglab {

class Sobol {
  public:
    explicit Sobol(int dim) : dim_(dim), state_(dim, 0), v_(dim) {
        if (dim < 1 || dim > 16) throw std::invalid_argument("Sobol: 1 <= dim <= 16");
        // {degree s, coefficient a, initial m_1..m_s} per dimension >= 2
        struct Row {
            int s, a;
            std::array<std::uint32_t, 6> m;
        };
        static const Row rows[15] = {
            {1, 0, {1}},           {2, 1, {1, 3}},         {3, 1, {1, 3, 1}},
            {3, 2, {1, 1, 1}},     {4, 1, {1, 1, 3, 3}},   {4, 4, {1, 3, 5, 13}},
            {5, 2, {1, 1, 5, 5, 17}}, {5, 4, {1, 1, 5, 5, 5}}, {5, 7, {1, 1, 7, 11, 19}},
            {5, 11, {1, 1, 5, 1, 1}}, {5, 13, {1, 1, 1, 3, 11}}, {5, 14, {1, 3, 5, 5, 31}},
            {6, 1, {1, 3, 3, 9, 7, 49}}, {6, 13, {1, 1, 1, 15, 21, 21}},
            {6, 16, {1, 3, 1, 13, 27, 49}}};
        for (int d = 0; d < dim_; ++d) {
            auto& v = v_[d];
            v.resize(kBits);
            if (d == 0) {
                for (int i = 0; i < kBits; ++i) v[i] = 1u << (31 - i);
                continue;
            }
            const Row& row = rows[d - 1];
            std::vector<std::uint32_t> m(row.m.begin(), row.m.begin() + row.s);
            for (int i = row.s; i < kBits; ++i) {
                std::uint32_t x = m[i - row.s] ^ (m[i - row.s] << row.s);
                for (int k = 1; k < row.s; ++k)
                    if ((row.a >> (row.s - 1 - k)) & 1) x ^= m[i - k] << k;
                m.push_back(x);
            }
            for (int i = 0; i < kBits; ++i) v[i] = m[i] << (31 - i);
        }
    }

    // next point in [0,1)^dim
    std::vector<double> next() {
        const std::uint64_t c = lowest_zero_bit(count_++);
        std::vector<double> out(dim_);
        for (int d = 0; d < dim_; ++d) {
            state_[d] ^= v_[d][c];
            out[d] = state_[d] * 0x1p-32;
        }
        return out;
    }

  private:
    static constexpr int kBits = 32;
    static int lowest_zero_bit(std::uint64_t n) {
        int i = 0;
        while (n & 1) {
            n >>= 1;
            ++i;
        }
        return i;
    }
    int dim_;
    std::uint64_t count_ = 0;
    std::vector<std::uint32_t> state_;
    std::vector<std::vector<std::uint32_t>> v_;
};

// deterministic zeta samples in the unit polydisk: every coordinate axis at
// unit amplitude, then `count` Sobol points (radius^2 / angle per coordinate)
inline std::vector<CVec> polydisk_samples(int two_n, int count = 200) {
    std::vector<CVec> out;
    for (int J = 0; J < two_n; ++J) {
        CVec axis = CVec::Zero(two_n);
        axis[J] = 1.0;
        out.push_back(axis);
    }
    Sobol sob(2 * two_n);
    for (int k = 0; k < count; ++k) {
        const auto u = sob.next();
        CVec z(two_n);
        for (int J = 0; J < two_n; ++J)
            z[J] = std::polar(std::sqrt(u[2 * J]), 2.0 * kPi * u[2 * J + 1]);
        out.push_back(z);
    }
    return out;
}

}  // namespace kglab
