#pragma once

#include <algorithm>
#include <cstdint>
#include <numeric>
#include <random>
#include <span>
#include <vector>

#include "nerf/combinatorics.hpp"
#include "nerf/error.hpp"

namespace nerf {

/// A signed permutation matrix U kept as index shuffle plus sign flips:
/// (U x)(m) = sign[m] * x(perm[m]).
struct SignedPermutation {
    std::vector<std::uint32_t> perm;
    std::vector<std::int8_t> sign;

    static SignedPermutation identity(std::size_t dim) {
        SignedPermutation u;
        u.perm.resize(dim);
        std::iota(u.perm.begin(), u.perm.end(), 0u);
        u.sign.assign(dim, 1);
        return u;
    }

    std::size_t dimension() const noexcept { return perm.size(); }

    bool is_identity() const noexcept {
        for (std::size_t m = 0; m < perm.size(); ++m)
            if (perm[m] != m || sign[m] != 1)
                return false;
        return true;
    }

    void apply(std::span<const double> x, std::span<double> out) const {
        if (x.size() != perm.size() || out.size() != perm.size())
            throw Error(ErrorKind::invalid_input, "signed permutation dimension mismatch");
        for (std::size_t m = 0; m < perm.size(); ++m)
            out[m] = sign[m] * x[perm[m]];
    }

    std::vector<double> operator()(std::span<const double> x) const {
        std::vector<double> out(x.size());
        apply(x, out);
        return out;
    }
};

/// |group| = 2^M * M!, exact.
inline BigInt signed_permutation_group_order(std::size_t dim) {
    return (BigInt(1) << dim) * factorial(dim);
}

/// Uniformly random group element.
template <class Rng>
SignedPermutation random_signed_permutation(std::size_t dim, Rng& rng) {
    auto u = SignedPermutation::identity(dim);
    std::shuffle(u.perm.begin(), u.perm.end(), rng);
    std::bernoulli_distribution coin(0.5);
    for (auto& s : u.sign)
        s = coin(rng) ? -1 : 1;
    return u;
}

/// Visit every group element; permutations in lexicographic order, then sign
/// patterns in binary order. Only sensible for small dimensions.
template <class Visitor>
void for_each_signed_permutation(std::size_t dim, Visitor&& visit) {
    auto u = SignedPermutation::identity(dim);
    const std::uint64_t patterns = std::uint64_t{1} << dim;
    do {
        for (std::uint64_t bits = 0; bits < patterns; ++bits) {
            for (std::size_t m = 0; m < dim; ++m)
                u.sign[m] = ((bits >> (dim - 1 - m)) & 1u) ? -1 : 1;
            visit(static_cast<const SignedPermutation&>(u));
        }
    } while (std::next_permutation(u.perm.begin(), u.perm.end()));
}

} // namespace nerf
