#pragma once

// Exact optimal NERF bounds for small frames: every K-subset, every subframe
// operator, smallest and largest eigenvalue.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "nerf/combinatorics.hpp"
#include "nerf/error.hpp"
#include "nerf/frames.hpp"
#include "nerf/parallel.hpp"

namespace nerf {

/// Dense row-major square matrix.
struct SquareMatrix {
    std::size_t n = 0;
    std::vector<double> a;

    SquareMatrix() = default;
    explicit SquareMatrix(std::size_t size) : n(size), a(size * size, 0.0) {}
    SquareMatrix(std::size_t size, std::vector<double> values) : n(size), a(std::move(values)) {
        if (a.size() != n * n)
            throw Error(ErrorKind::invalid_input, "matrix data is not square");
    }

    static SquareMatrix identity(std::size_t size) {
        SquareMatrix m(size);
        for (std::size_t i = 0; i < size; ++i)
            m(i, i) = 1.0;
        return m;
    }

    double& operator()(std::size_t i, std::size_t j) { return a[i * n + j]; }
    double operator()(std::size_t i, std::size_t j) const { return a[i * n + j]; }

    double frobenius() const {
        double s = 0.0;
        for (double v : a)
            s += v * v;
        return std::sqrt(s);
    }
};

struct EigenResult {
    std::vector<double> eigenvalues;   // nondecreasing
    SquareMatrix eigenvectors;         // column j pairs with eigenvalues[j]
    double residual = 0.0;             // max_j ||A q_j - lambda_j q_j||
    int sweeps = 0;
};

inline constexpr int jacobi_sweep_cap = 100;

/// Cyclic Jacobi rotations until the off-diagonal Frobenius norm drops below
/// 1e-14 ||A||_F.
inline EigenResult eigen_symmetric(const SquareMatrix& input) {
    const std::size_t n = input.n;
    const double scale = input.frobenius();
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j)
            if (std::abs(input(i, j) - input(j, i)) > 1e-12 * std::max(1.0, scale))
                throw Error(ErrorKind::invalid_input, "matrix is not symmetric");

    SquareMatrix a = input;
    SquareMatrix v = SquareMatrix::identity(n);
    const double target = 1e-14 * scale;
    auto off_norm = [&] {
        double s = 0.0;
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = i + 1; j < n; ++j)
                s += 2.0 * a(i, j) * a(i, j);
        return std::sqrt(s);
    };

    EigenResult result;
    while (result.sweeps < jacobi_sweep_cap && off_norm() > target) {
        ++result.sweeps;
        for (std::size_t p = 0; p + 1 < n; ++p)
            for (std::size_t q = p + 1; q < n; ++q) {
                const double apq = a(p, q);
                if (apq == 0.0)
                    continue;
                const double theta = (a(q, q) - a(p, p)) / (2.0 * apq);
                const double t = (theta >= 0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
                const double c = 1.0 / std::sqrt(t * t + 1.0);
                const double s = t * c;
                for (std::size_t k = 0; k < n; ++k) {
                    const double akp = a(k, p), akq = a(k, q);
                    a(k, p) = c * akp - s * akq;
                    a(k, q) = s * akp + c * akq;
                }
                for (std::size_t k = 0; k < n; ++k) {
                    const double apk = a(p, k), aqk = a(q, k);
                    a(p, k) = c * apk - s * aqk;
                    a(q, k) = s * apk + c * aqk;
                }
                a(p, q) = a(q, p) = 0.0;
                for (std::size_t k = 0; k < n; ++k) {
                    const double vkp = v(k, p), vkq = v(k, q);
                    v(k, p) = c * vkp - s * vkq;
                    v(k, q) = s * vkp + c * vkq;
                }
            }
    }

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(), [&](std::size_t i, std::size_t j) { return a(i, i) < a(j, j); });
    result.eigenvalues.resize(n);
    result.eigenvectors = SquareMatrix(n);
    for (std::size_t j = 0; j < n; ++j) {
        result.eigenvalues[j] = a(order[j], order[j]);
        for (std::size_t i = 0; i < n; ++i)
            result.eigenvectors(i, j) = v(i, order[j]);
    }
    for (std::size_t j = 0; j < n; ++j) {
        double r = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            double aq = 0.0;
            for (std::size_t k = 0; k < n; ++k)
                aq += input(i, k) * result.eigenvectors(k, j);
            const double d = aq - result.eigenvalues[j] * result.eigenvectors(i, j);
            r += d * d;
        }
        result.residual = std::max(result.residual, std::sqrt(r));
    }
    return result;
}

/// Sum of phi_n phi_n^* over the chosen columns.
inline SquareMatrix subframe_operator(const FrameMatrix& frame, std::span<const std::uint32_t> subset) {
    const std::size_t dim = frame.dimension();
    SquareMatrix s(dim);
    for (auto n : subset) {
        const auto phi = frame.column(n);
        for (std::size_t i = 0; i < dim; ++i)
            for (std::size_t j = i; j < dim; ++j)
                s(i, j) += phi[i] * phi[j];
    }
    for (std::size_t i = 0; i < dim; ++i)
        for (std::size_t j = 0; j < i; ++j)
            s(i, j) = s(j, i);
    return s;
}

struct OracleResult {
    std::size_t k = 0;
    double alpha = std::numeric_limits<double>::infinity();
    double beta = -std::numeric_limits<double>::infinity();
    std::vector<std::uint32_t> witness_alpha; // 0-based column indices
    std::vector<std::uint32_t> witness_beta;
    BigInt subsets_examined = 0;
};

struct OracleOptions {
    std::uint64_t budget = 10'000'000; // subsets
    unsigned threads = 1;
    std::uint64_t chunk_size = 4096;
};

namespace detail {

struct OracleAccumulator {
    double alpha = std::numeric_limits<double>::infinity();
    double beta = -std::numeric_limits<double>::infinity();
    std::uint64_t alpha_rank = std::numeric_limits<std::uint64_t>::max();
    std::uint64_t beta_rank = std::numeric_limits<std::uint64_t>::max();
    std::uint64_t examined = 0;

    void offer(std::uint64_t rank, double lo, double hi) {
        if (lo < alpha || (lo == alpha && rank < alpha_rank)) {
            alpha = lo;
            alpha_rank = rank;
        }
        if (hi > beta || (hi == beta && rank < beta_rank)) {
            beta = hi;
            beta_rank = rank;
        }
    }

    void merge(const OracleAccumulator& o) {
        if (o.alpha < alpha || (o.alpha == alpha && o.alpha_rank < alpha_rank)) {
            alpha = o.alpha;
            alpha_rank = o.alpha_rank;
        }
        if (o.beta > beta || (o.beta == beta && o.beta_rank < beta_rank)) {
            beta = o.beta;
            beta_rank = o.beta_rank;
        }
        examined += o.examined;
    }
};

inline std::string infeasible_message(std::size_t n, std::size_t k, const BigInt& count, std::uint64_t budget) {
    return "C(" + std::to_string(n) + "," + std::to_string(k) + ") = " + scientific(count) +
           " subsets exceeds the budget of " + std::to_string(budget);
}

} // namespace detail

/// alpha_K and beta_K over all K-subsets, lexicographic order, with the
/// lexicographically first witnesses.
inline OracleResult exact_bounds(const FrameMatrix& frame, std::size_t k, const OracleOptions& options = {}) {
    const std::size_t n = frame.size();
    if (k == 0 || k > n)
        throw Error(ErrorKind::invalid_input, "need 1 <= K <= N, got K=" + std::to_string(k));
    const BigInt total = binomial(n, k);
    if (total > options.budget)
        throw Error(ErrorKind::oracle_infeasible, detail::infeasible_message(n, k, total, options.budget));
    const std::uint64_t count = total.convert_to<std::uint64_t>();
    const auto nn = static_cast<std::uint32_t>(n);
    const auto kk = static_cast<std::uint32_t>(k);

    auto work = [&](detail::OracleAccumulator& acc, std::uint64_t begin, std::uint64_t end) {
        auto subset = unrank_combination(begin, nn, kk);
        for (std::uint64_t rank = begin; rank < end; ++rank) {
            const auto eig = eigen_symmetric(subframe_operator(frame, subset));
            // Frame operators are positive semidefinite; clip rounding below zero.
            acc.offer(rank, std::max(0.0, eig.eigenvalues.front()), eig.eigenvalues.back());
            ++acc.examined;
            if (rank + 1 < end)
                next_combination(subset, nn);
        }
    };
    const auto acc = chunked_reduce<detail::OracleAccumulator>(
        count, options.chunk_size, resolve_threads(options.threads), [] { return detail::OracleAccumulator{}; },
        work, [](detail::OracleAccumulator& a, const detail::OracleAccumulator& b) { a.merge(b); });

    OracleResult r;
    r.k = k;
    r.alpha = acc.alpha;
    r.beta = acc.beta;
    r.witness_alpha = unrank_combination(acc.alpha_rank, nn, kk);
    r.witness_beta = unrank_combination(acc.beta_rank, nn, kk);
    r.subsets_examined = acc.examined;
    return r;
}

/// exact_bounds for K = k_min..k_max (defaults: 1..N); the budget applies to
/// the total number of subsets.
inline std::vector<OracleResult> exact_bounds_all_K(const FrameMatrix& frame, const OracleOptions& options = {},
                                                    std::size_t k_min = 1, std::size_t k_max = 0) {
    const std::size_t n = frame.size();
    if (k_max == 0)
        k_max = n;
    if (k_min == 0 || k_min > k_max || k_max > n)
        throw Error(ErrorKind::invalid_input, "invalid K range");
    BigInt total = 0;
    for (std::size_t k = k_min; k <= k_max; ++k)
        total += binomial(n, k);
    if (total > options.budget)
        throw Error(ErrorKind::oracle_infeasible,
                    "sum of C(" + std::to_string(n) + ",K) for K=" + std::to_string(k_min) + ".." +
                        std::to_string(k_max) + " = " + scientific(total) + " subsets exceeds the budget of " +
                        std::to_string(options.budget));
    std::vector<OracleResult> out;
    out.reserve(k_max - k_min + 1);
    for (std::size_t k = k_min; k <= k_max; ++k)
        out.push_back(exact_bounds(frame, k, options));
    return out;
}

} // namespace nerf
