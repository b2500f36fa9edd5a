#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "surrocal/common.hpp"

namespace surrocal {

// Joe-Kuo style primitive polynomials and initial direction numbers for the
// first 21 dimensions (dimension 1 is the base-2 van der Corput sequence).
// Each row: polynomial degree s, interior coefficient bits a, and the odd
// initial values m_1..m_s with m_i < 2^i.
namespace sobol_detail {

struct DirRow {
    int degree;
    std::uint32_t coeffs;
    std::array<std::uint32_t, 8> m;
};

inline constexpr int kMaxDim = 21;
inline constexpr int kBits = 32;

inline constexpr DirRow kTable[kMaxDim - 1] = {
    {1, 0, {1}},
    {2, 1, {1, 3}},
    {3, 1, {1, 3, 1}},
    {3, 2, {1, 1, 1}},
    {4, 1, {1, 1, 3, 3}},
    {4, 4, {1, 3, 5, 13}},
    {5, 2, {1, 1, 5, 5, 17}},
    {5, 4, {1, 1, 5, 5, 5}},
    {5, 7, {1, 1, 7, 11, 19}},
    {5, 11, {1, 1, 5, 1, 1}},
    {5, 13, {1, 1, 1, 3, 11}},
    {5, 14, {1, 3, 5, 5, 31}},
    {6, 1, {1, 3, 3, 9, 7, 49}},
    {6, 13, {1, 1, 1, 15, 21, 21}},
    {6, 16, {1, 3, 1, 13, 27, 49}},
    {6, 19, {1, 1, 1, 15, 7, 5}},
    {6, 22, {1, 3, 1, 3, 25, 1}},
    {6, 25, {1, 1, 5, 5, 19, 61}},
    {7, 1, {1, 3, 7, 11, 23, 15, 103}},
    {7, 4, {1, 3, 7, 13, 13, 15, 69}},
};

} // namespace sobol_detail

// Standard Sobol sequence in Gray-code order. Point 0 is the origin.
// Deterministic for fixed (dimension, index); supports up to kMaxDim dims.
class SobolSequence {
public:
    explicit SobolSequence(int dimension) : dim_(dimension) {
        using namespace sobol_detail;
        require(dimension >= 1, "sobol: dimension must be >= 1");
        if (dimension > kMaxDim)
            fail("sobol: dimension " + std::to_string(dimension) +
                 " exceeds direction-number table size " + std::to_string(kMaxDim));
        v_.assign(static_cast<std::size_t>(dim_) * kBits, 0);
        // dimension 1: m_k = 1 for all k (van der Corput in base 2)
        for (int k = 0; k < kBits; ++k) v_[idx(0, k)] = 1u << (kBits - 1 - k);
        for (int d = 1; d < dim_; ++d) {
            const DirRow& row = kTable[d - 1];
            const int s = row.degree;
            std::vector<std::uint32_t> m(static_cast<std::size_t>(kBits));
            for (int k = 0; k < s; ++k) {
                const std::uint32_t mk = row.m[static_cast<std::size_t>(k)];
                require((mk & 1u) == 1u && mk < (1u << (k + 1)), "sobol: invalid direction table entry");
                m[static_cast<std::size_t>(k)] = mk;
            }
            for (int k = s; k < kBits; ++k) {
                std::uint32_t mk = m[static_cast<std::size_t>(k - s)] ^ (m[static_cast<std::size_t>(k - s)] << s);
                for (int j = 1; j < s; ++j) {
                    if ((row.coeffs >> (s - 1 - j)) & 1u)
                        mk ^= m[static_cast<std::size_t>(k - j)] << j;
                }
                m[static_cast<std::size_t>(k)] = mk;
            }
            for (int k = 0; k < kBits; ++k)
                v_[idx(d, k)] = m[static_cast<std::size_t>(k)] << (kBits - 1 - k);
        }
        reset(0);
    }

    int dimension() const { return dim_; }

    // fast-forward so the next emitted point has the given index
    void reset(std::uint64_t index) {
        index_ = index;
        state_.assign(static_cast<std::size_t>(dim_), 0);
        const std::uint64_t gray = index ^ (index >> 1);
        for (int bit = 0; bit < 64; ++bit) {
            if ((gray >> bit) & 1ull) {
                require(bit < sobol_detail::kBits, "sobol: index too large");
                for (int d = 0; d < dim_; ++d) state_[static_cast<std::size_t>(d)] ^= v_[idx(d, bit)];
            }
        }
    }

    // emit the point at the current index, then advance (Antonov-Saleev)
    void next(double* out) {
        constexpr double fac = 0x1.0p-32;
        for (int d = 0; d < dim_; ++d) out[d] = static_cast<double>(state_[static_cast<std::size_t>(d)]) * fac;
        int c = 0;
        std::uint64_t i = index_;
        while (i & 1ull) { ++c; i >>= 1; }
        require(c < sobol_detail::kBits, "sobol: sequence exhausted");
        for (int d = 0; d < dim_; ++d) state_[static_cast<std::size_t>(d)] ^= v_[idx(d, c)];
        ++index_;
    }

private:
    static std::size_t idx(int d, int k) {
        return static_cast<std::size_t>(d) * sobol_detail::kBits + static_cast<std::size_t>(k);
    }

    int dim_;
    std::uint64_t index_ = 0;
    std::vector<std::uint32_t> v_;
    std::vector<std::uint32_t> state_;
};

// `count` points of the Sobol sequence in the unit hypercube, skipping the
// first `skip` elements. Row-major: point i at [i*dimension, (i+1)*dimension).
inline std::vector<double> sobol_unit(int dimension, std::size_t count, std::uint64_t skip = 0) {
    require(count >= 1, "sobol: count must be >= 1");
    SobolSequence seq(dimension);
    seq.reset(skip);
    std::vector<double> pts(count * static_cast<std::size_t>(dimension));
    for (std::size_t i = 0; i < count; ++i) seq.next(&pts[i * static_cast<std::size_t>(dimension)]);
    return pts;
}

} // namespace surrocal
