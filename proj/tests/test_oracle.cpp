#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "nerf/oracle.hpp"

using namespace nerf;

namespace {

// Determinant by cofactor expansion along the first row.
double cofactor_det(const SquareMatrix& m) {
    if (m.n == 1)
        return m(0, 0);
    double det = 0;
    for (std::size_t c = 0; c < m.n; ++c) {
        SquareMatrix minor(m.n - 1);
        for (std::size_t i = 1; i < m.n; ++i)
            for (std::size_t j = 0, jj = 0; j < m.n; ++j)
                if (j != c)
                    minor(i - 1, jj++) = m(i, j);
        det += (c % 2 ? -1.0 : 1.0) * m(0, c) * cofactor_det(minor);
    }
    return det;
}

SquareMatrix random_symmetric(std::size_t n, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> u(-1, 1);
    SquareMatrix a(n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i; j < n; ++j)
            a(i, j) = a(j, i) = u(rng);
    return a;
}

} // namespace

TEST(Jacobi, Identity) {
    const auto r = eigen_symmetric(SquareMatrix::identity(4));
    EXPECT_EQ(r.eigenvalues, (std::vector<double>{1, 1, 1, 1}));
    EXPECT_EQ(r.sweeps, 0);
}

TEST(Jacobi, DiagonalIsSorted) {
    SquareMatrix d(3, {3, 0, 0, 0, 1, 0, 0, 0, 2});
    const auto r = eigen_symmetric(d);
    EXPECT_EQ(r.eigenvalues, (std::vector<double>{1, 2, 3}));
    EXPECT_EQ(r.eigenvectors(1, 0), 1.0);
}

TEST(Jacobi, TightFrameOperator) {
    const auto f = orbit_signed_permutations({4, 2});
    std::vector<std::uint32_t> all(12);
    for (std::uint32_t i = 0; i < 12; ++i)
        all[i] = i;
    const auto r = eigen_symmetric(subframe_operator(f, all));
    for (double v : r.eigenvalues)
        EXPECT_NEAR(v, 3.0, 1e-13);
}

TEST(Jacobi, TwoByTwoClosedForm) {
    SquareMatrix a(2, {2, 1, 1, 2});
    const auto r = eigen_symmetric(a);
    EXPECT_NEAR(r.eigenvalues[0], 1.0, 1e-15);
    EXPECT_NEAR(r.eigenvalues[1], 3.0, 1e-15);
}

TEST(Jacobi, TraceDeterminantAndResidual) {
    std::mt19937_64 rng(5);
    for (std::size_t n = 1; n <= 7; ++n)
        for (int t = 0; t < 20; ++t) {
            const auto a = random_symmetric(n, rng);
            const auto r = eigen_symmetric(a);
            double trace = 0, sum = 0, prod = 1;
            for (std::size_t i = 0; i < n; ++i) {
                trace += a(i, i);
                sum += r.eigenvalues[i];
                prod *= r.eigenvalues[i];
                if (i) {
                    EXPECT_LE(r.eigenvalues[i - 1], r.eigenvalues[i]);
                }
            }
            EXPECT_NEAR(sum, trace, 1e-12);
            EXPECT_NEAR(prod, cofactor_det(a), 1e-11);
            EXPECT_LT(r.residual, 1e-12);
            EXPECT_LE(r.sweeps, jacobi_sweep_cap);
            // Eigenvectors are orthonormal.
            for (std::size_t i = 0; i < n; ++i)
                for (std::size_t j = 0; j < n; ++j) {
                    double ip = 0;
                    for (std::size_t k = 0; k < n; ++k)
                        ip += r.eigenvectors(k, i) * r.eigenvectors(k, j);
                    EXPECT_NEAR(ip, i == j ? 1.0 : 0.0, 1e-13);
                }
        }
}

TEST(Jacobi, RejectsNonSymmetric) {
    EXPECT_THROW(eigen_symmetric(SquareMatrix(2, {1, 2, 0, 1})), Error);
    EXPECT_THROW(SquareMatrix(2, {1, 2, 3}), Error);
}

TEST(Oracle, FourByTwelveAlphaRow) {
    const double alpha[12] = {0, 0, 0, 0, 0, 0, 0.3820, 0.7192, 1.0, 1.5, 2.0, 3.0};
    const auto f = orbit_signed_permutations({4, 2});
    const auto rows = exact_bounds_all_K(f);
    ASSERT_EQ(rows.size(), 12u);
    BigInt total = 0;
    for (const auto& r : rows) {
        EXPECT_NEAR(r.alpha, alpha[r.k - 1], 5e-5) << "K=" << r.k;
        EXPECT_EQ(r.subsets_examined, binomial(12, r.k));
        EXPECT_EQ(r.witness_alpha.size(), r.k);
        EXPECT_GE(r.alpha, 0.0);
        total += r.subsets_examined;
    }
    EXPECT_EQ(total, BigInt(4095));
    EXPECT_NEAR(rows[6].alpha, (3 - std::sqrt(5.0)) / 2, 1e-12);
    EXPECT_NEAR(rows[0].beta, 1.0, 1e-14);
    EXPECT_NEAR(rows[11].beta, 3.0, 1e-13);
    // Below the dimension some direction is always missed.
    EXPECT_EQ(rows[2].alpha, 0.0);
}

TEST(Oracle, WitnessAttainsTheExtremes) {
    const auto f = orbit_signed_permutations({4, 2});
    const auto r = exact_bounds(f, 8);
    const auto lo = eigen_symmetric(subframe_operator(f, r.witness_alpha));
    const auto hi = eigen_symmetric(subframe_operator(f, r.witness_beta));
    EXPECT_DOUBLE_EQ(std::max(0.0, lo.eigenvalues.front()), r.alpha);
    EXPECT_DOUBLE_EQ(hi.eigenvalues.back(), r.beta);
}

TEST(Oracle, ThreadCountDoesNotChangeTheAnswer) {
    const auto f = orbit_signed_permutations({5, 2});
    OracleOptions one, many;
    many.threads = 4;
    many.chunk_size = 13;
    for (std::size_t k : {3u, 7u, 12u}) {
        const auto a = exact_bounds(f, k, one);
        const auto b = exact_bounds(f, k, many);
        EXPECT_EQ(a.alpha, b.alpha);
        EXPECT_EQ(a.beta, b.beta);
        EXPECT_EQ(a.witness_alpha, b.witness_alpha);
        EXPECT_EQ(a.witness_beta, b.witness_beta);
    }
}

TEST(Oracle, BudgetIsEnforced) {
    const auto f = orbit_signed_permutations({8, 4});
    try {
        exact_bounds(f, 404);
        FAIL() << "expected oracle_infeasible";
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::oracle_infeasible);
        EXPECT_NE(std::string(e.what()).find("C(560,404) = 2.85e142"), std::string::npos) << e.what();
    }
    OracleOptions tight;
    tight.budget = 100;
    EXPECT_THROW(exact_bounds_all_K(orbit_signed_permutations({4, 2}), tight), Error);
    EXPECT_THROW(exact_bounds(orbit_signed_permutations({4, 2}), 0), Error);
    EXPECT_THROW(exact_bounds(orbit_signed_permutations({4, 2}), 13), Error);
}
