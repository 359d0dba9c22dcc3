#pragma once

// Exact counting and ranked enumeration of k-subsets (lexicographic) and of
// nondecreasing level sequences (colexicographic, stars and bars).

#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

#include "nerf/error.hpp"

namespace nerf {

using BigInt = boost::multiprecision::cpp_int;

inline BigInt binomial(std::uint64_t n, std::uint64_t k) {
    if (k > n)
        return 0;
    if (k > n - k)
        k = n - k;
    BigInt r = 1;
    for (std::uint64_t i = 1; i <= k; ++i) {
        r *= n - k + i;
        r /= i; // exact: r is C(n-k+i, i) after this step
    }
    return r;
}

inline BigInt factorial(std::uint64_t n) {
    BigInt r = 1;
    for (std::uint64_t i = 2; i <= n; ++i)
        r *= i;
    return r;
}

inline std::optional<std::uint64_t> to_u64(const BigInt& v) {
    if (v < 0 || v > std::numeric_limits<std::uint64_t>::max())
        return std::nullopt;
    return v.convert_to<std::uint64_t>();
}

/// C(n,k) as a 64-bit value; throws when it does not fit.
inline std::uint64_t binomial_u64(std::uint64_t n, std::uint64_t k) {
    auto v = to_u64(binomial(n, k));
    if (!v)
        throw Error(ErrorKind::invalid_input,
                    "C(" + std::to_string(n) + "," + std::to_string(k) + ") exceeds 64 bits");
    return *v;
}

/// Short scientific rendering of a big integer, e.g. "2.84e142".
inline std::string scientific(const BigInt& v, int digits = 3) {
    std::string s = v.str();
    if (s.size() <= static_cast<std::size_t>(digits) + 3)
        return s;
    const auto keep = static_cast<std::size_t>(digits);
    std::size_t exponent = s.size() - 1;
    // Round half up on the first dropped digit.
    std::string head = (BigInt(s.substr(0, keep)) + (s[keep] >= '5' ? 1 : 0)).str();
    if (head.size() > keep) {
        head.pop_back();
        ++exponent;
    }
    std::ostringstream out;
    out << head[0] << '.' << head.substr(1) << 'e' << exponent;
    return out.str();
}

// -------------------------------------------------------------------------- //
// k-subsets of {0,...,n-1} in lexicographic order

/// Advance `idx` (strictly increasing) to its lexicographic successor.
/// Returns false after the last subset.
inline bool next_combination(std::span<std::uint32_t> idx, std::uint32_t n) {
    const std::size_t k = idx.size();
    std::size_t i = k;
    while (i > 0) {
        --i;
        if (idx[i] < n - k + i) {
            ++idx[i];
            for (std::size_t j = i + 1; j < k; ++j)
                idx[j] = idx[j - 1] + 1;
            return true;
        }
    }
    return false;
}

/// The k-subset of rank `rank` in lexicographic order.
inline std::vector<std::uint32_t> unrank_combination(std::uint64_t rank, std::uint32_t n, std::uint32_t k) {
    std::vector<std::uint32_t> idx(k);
    std::uint32_t c = 0;
    for (std::uint32_t i = 0; i < k; ++i) {
        for (;; ++c) {
            const std::uint64_t block = binomial_u64(n - 1 - c, k - 1 - i);
            if (rank < block)
                break;
            rank -= block;
        }
        idx[i] = c++;
    }
    return idx;
}

inline std::uint64_t rank_combination(std::span<const std::uint32_t> idx, std::uint32_t n) {
    const auto k = static_cast<std::uint32_t>(idx.size());
    std::uint64_t rank = 0;
    std::uint32_t c = 0;
    for (std::uint32_t i = 0; i < k; ++i) {
        for (; c < idx[i]; ++c)
            rank += binomial_u64(n - 1 - c, k - 1 - i);
        ++c;
    }
    return rank;
}

// -------------------------------------------------------------------------- //
// Nondecreasing sequences a_1 <= ... <= a_M over {0,...,L-1}
//
// These are the stars-and-bars compositions of M into L parts. Shifting by
// position, t_i = a_i + i - 1, gives an M-subset of {0,...,M+L-2}; the order
// used throughout is colexicographic on those subsets, with rank
// sum_i C(t_i, i). The first sequence is all zeros, the last all L-1.

/// Advance to the colexicographic successor. Returns false after the last one.
inline bool next_multiset(std::span<std::uint32_t> a, std::uint32_t levels) {
    const std::size_t m = a.size();
    for (std::size_t i = 0; i < m; ++i) {
        const std::uint32_t cap = (i + 1 < m) ? a[i + 1] : levels - 1;
        if (a[i] < cap) {
            ++a[i];
            for (std::size_t j = 0; j < i; ++j)
                a[j] = 0;
            return true;
        }
    }
    return false;
}

inline std::uint64_t rank_multiset(std::span<const std::uint32_t> a) {
    std::uint64_t rank = 0;
    for (std::size_t i = 0; i < a.size(); ++i)
        rank += binomial_u64(a[i] + i, i + 1);
    return rank;
}

inline std::vector<std::uint32_t> unrank_multiset(std::uint64_t rank, std::uint32_t size, std::uint32_t levels) {
    std::vector<std::uint32_t> a(size);
    std::uint64_t t = static_cast<std::uint64_t>(size) + levels - 2; // largest admissible t_M
    for (std::uint32_t i = size; i >= 1; --i) {
        while (binomial_u64(t, i) > rank)
            --t;
        rank -= binomial_u64(t, i);
        a[i - 1] = static_cast<std::uint32_t>(t - (i - 1));
        if (t > 0)
            --t;
    }
    return a;
}

} // namespace nerf
