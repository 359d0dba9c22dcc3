#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <random>
#include <sstream>

#include "nerf/frames.hpp"
#include "nerf/signed_permutation.hpp"

using namespace nerf;

namespace {

// The 4 x 12 frame written out entry by entry, times sqrt(2).
const double kPhi412[4][12] = {
    {1, 1, 1, 1, 1, 1, 0, 0, 0, 0, 0, 0},
    {1, -1, 0, 0, 0, 0, 1, 1, 1, 1, 0, 0},
    {0, 0, 1, -1, 0, 0, 1, -1, 0, 0, 1, 1},
    {0, 0, 0, 0, 1, -1, 0, 0, 1, -1, 1, -1},
};

FrameMatrix literal_412() {
    std::vector<double> d;
    for (int n = 0; n < 12; ++n)
        for (int m = 0; m < 4; ++m)
            d.push_back(kPhi412[m][n] / std::sqrt(2.0));
    return {4, d};
}

std::multiset<std::vector<long>> columns_mod_negation(const FrameMatrix& f) {
    std::multiset<std::vector<long>> out;
    for (std::size_t n = 0; n < f.size(); ++n) {
        auto c = f.column(n);
        double s = 0;
        for (double v : c)
            if (std::abs(v) > 1e-9) {
                s = v > 0 ? 1 : -1;
                break;
            }
        std::vector<long> key;
        for (double v : c)
            key.push_back(std::lround(s * v * 1e6));
        out.insert(key);
    }
    return out;
}

} // namespace

TEST(Orbit, FourByTwelveMatchesTheExplicitMatrix) {
    const auto frame = orbit_signed_permutations({4, 2});
    ASSERT_EQ(frame.dimension(), 4u);
    ASSERT_EQ(frame.size(), 12u);
    EXPECT_EQ(columns_mod_negation(frame), columns_mod_negation(literal_412()));
    // The canonical order happens to reproduce the written column order too.
    const auto lit = literal_412();
    for (std::size_t n = 0; n < 12; ++n)
        for (std::size_t m = 0; m < 4; ++m)
            EXPECT_DOUBLE_EQ(frame.column(n)[m], lit.column(n)[m]) << "column " << n;
}

TEST(Orbit, TrivialIdentityCase) {
    const auto frame = orbit_signed_permutations({1, 1});
    ASSERT_EQ(frame.size(), 1u);
    EXPECT_EQ(frame.column(0)[0], 1.0);
}

TEST(Orbit, ColumnCountIsTwoToTheKMinusOneTimesBinomial) {
    for (std::size_t m = 1; m <= 8; ++m)
        for (std::size_t k = 1; k <= m; ++k) {
            const GeneratorSpec spec{m, k};
            const auto frame = orbit_signed_permutations(spec);
            ASSERT_EQ(BigInt(frame.size()), spec.orbit_size()) << m << "," << k;
            ASSERT_EQ(BigInt(frame.size()), (BigInt(1) << (k - 1)) * binomial(m, k));
            ASSERT_TRUE(columns_distinct_modulo_negation(frame));
            const double mag = 1.0 / std::sqrt(static_cast<double>(k));
            for (std::size_t n = 0; n < frame.size(); ++n) {
                std::size_t nonzero = 0;
                double sq = 0;
                for (double v : frame.column(n)) {
                    sq += v * v;
                    if (v != 0.0) {
                        ++nonzero;
                        ASSERT_NEAR(std::abs(v), mag, 1e-15);
                    }
                }
                ASSERT_EQ(nonzero, k);
                ASSERT_NEAR(std::sqrt(sq), 1.0, 1e-12);
            }
        }
    EXPECT_EQ(orbit_signed_permutations({6, 3}).size(), 80u);
    EXPECT_EQ(orbit_signed_permutations({8, 4}).size(), 560u);
    EXPECT_EQ(orbit_signed_permutations({10, 5}).size(), 4032u);
}

TEST(Orbit, InvalidSpecs) {
    EXPECT_THROW(orbit_signed_permutations({4, 0}), Error);
    EXPECT_THROW(orbit_signed_permutations({4, 5}), Error);
    EXPECT_THROW(orbit_signed_permutations({0, 0}), Error);
    try {
        orbit_signed_permutations({3, 4});
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::invalid_spec);
    }
}

TEST(Untf, OrbitFramesAreTight) {
    for (std::size_t m = 1; m <= 7; ++m)
        for (std::size_t k = 1; k <= m; ++k) {
            const auto frame = orbit_signed_permutations({m, k});
            const auto r = verify_untf(frame, 1e-9);
            EXPECT_TRUE(r.is_unit_norm);
            EXPECT_TRUE(r.is_tight) << m << "," << k << " defect " << r.frobenius_defect;
            EXPECT_DOUBLE_EQ(r.tight_constant, double(frame.size()) / double(m));
        }
    const auto r = verify_untf(literal_412());
    EXPECT_TRUE(r.is_tight);
    EXPECT_DOUBLE_EQ(r.tight_constant, 3.0);
}

TEST(Untf, StandardBasisHasConstantOne) {
    const auto r = verify_untf(FrameMatrix::standard_basis(5));
    EXPECT_TRUE(r.is_tight);
    EXPECT_TRUE(r.is_unit_norm);
    EXPECT_EQ(r.tight_constant, 1.0);
    EXPECT_EQ(r.frobenius_defect, 0.0);
}

TEST(Untf, DroppingAColumnBreaksTightness) {
    const auto frame = literal_412().without_column(0);
    const auto r = verify_untf(frame);
    EXPECT_FALSE(r.is_tight);
    // Direct product: the remaining 11 columns give diag(2.5, 2.5, 3, 3) plus
    // off-diagonal -1/2 in (1,2) against a constant of 11/4.
    const double d = 0.25;
    const double expect = std::sqrt(2 * d * d + 2 * d * d + 2 * 0.25);
    EXPECT_NEAR(r.frobenius_defect, expect, 1e-12);
}

TEST(Untf, EmptyFrameIsRejected) {
    EXPECT_THROW(verify_untf(FrameMatrix(3, {})), Error);
}

TEST(GroupInvariance, OrbitFramesAreInvariant) {
    EXPECT_TRUE(verify_group_invariance(literal_412(), 100, 7));
    EXPECT_TRUE(verify_group_invariance(orbit_signed_permutations({6, 3}), 100, 11));
    EXPECT_TRUE(verify_group_invariance(orbit_signed_permutations({8, 4}), 100, 13));
}

TEST(GroupInvariance, SingleGenericColumnIsNot) {
    std::mt19937_64 rng(3);
    std::normal_distribution<double> g;
    for (std::size_t m = 2; m <= 5; ++m) {
        std::vector<double> v(m);
        double sq = 0;
        for (auto& x : v) {
            x = g(rng);
            sq += x * x;
        }
        for (auto& x : v)
            x /= std::sqrt(sq);
        EXPECT_FALSE(verify_group_invariance(FrameMatrix(m, v), 100, 5)) << m;
    }
}

TEST(GroupInvariance, MissingColumnIsDetected) {
    EXPECT_FALSE(verify_group_invariance(literal_412().without_column(5), 100, 1));
}

TEST(Canonicalize, SortsAbsoluteValues) {
    EXPECT_EQ(canonicalize(std::vector<double>{3, -1, 2}), (std::vector<double>{1, 2, 3}));
    const std::vector<double> sector{0.0, 0.6, 0.8};
    EXPECT_EQ(canonicalize(sector), sector);
    EXPECT_THROW(canonicalize(std::vector<double>{0, 0, 0}), Error);
}

TEST(Canonicalize, IdempotentAndNormPreserving) {
    std::mt19937_64 rng(42);
    std::normal_distribution<double> g;
    for (int t = 0; t < 500; ++t) {
        std::vector<double> x(1 + t % 7);
        for (auto& v : x)
            v = g(rng);
        const auto c = canonicalize(x);
        EXPECT_EQ(canonicalize(c), c);
        double a = 0, b = 0;
        for (std::size_t m = 0; m < x.size(); ++m) {
            a += x[m] * x[m];
            b += c[m] * c[m];
        }
        EXPECT_NEAR(a, b, 1e-12 * a);
        EXPECT_TRUE(std::is_sorted(c.begin(), c.end()));
        EXPECT_GE(c.front(), 0.0);
    }
}

// For x on the sphere and psi in the sector, the best signed permutation of psi
// against x scores exactly <canonicalize(x), psi>. Checked by walking the
// whole group for M <= 3.
TEST(Canonicalize, RearrangementAgainstWholeGroup) {
    std::mt19937_64 rng(2024);
    std::normal_distribution<double> g;
    for (std::size_t m = 1; m <= 3; ++m)
        for (int t = 0; t < 200; ++t) {
            std::vector<double> x(m), p(m);
            double sx = 0, sp = 0;
            for (std::size_t i = 0; i < m; ++i) {
                x[i] = g(rng);
                p[i] = g(rng);
                sx += x[i] * x[i];
                sp += p[i] * p[i];
            }
            for (std::size_t i = 0; i < m; ++i) {
                x[i] /= std::sqrt(sx);
                p[i] /= std::sqrt(sp);
            }
            const auto psi = canonicalize(p);
            const auto cx = canonicalize(x);
            double best = -2;
            for_each_signed_permutation(m, [&](const SignedPermutation& u) {
                const auto up = u(psi);
                double ip = 0;
                for (std::size_t i = 0; i < m; ++i)
                    ip += x[i] * up[i];
                best = std::max(best, ip);
            });
            double direct = 0;
            for (std::size_t i = 0; i < m; ++i)
                direct += cx[i] * psi[i];
            ASSERT_NEAR(best, direct, 1e-14);
        }
}

TEST(FrameFile, RoundTripsAtFullPrecision) {
    const auto frame = orbit_signed_permutations({5, 3});
    std::stringstream io;
    write_frame(io, frame);
    std::string header;
    std::getline(std::istringstream(io.str()) >> std::ws, header);
    EXPECT_EQ(header, "5 40");
    const auto back = read_frame(io);
    ASSERT_EQ(back.size(), frame.size());
    for (std::size_t i = 0; i < frame.data().size(); ++i)
        EXPECT_EQ(back.data()[i], frame.data()[i]);
}

TEST(FrameFile, RejectsMismatchedCounts) {
    std::istringstream short_rows("2 3\n1 0\n0 1\n");
    EXPECT_THROW(read_frame(short_rows), Error);
    std::istringstream bad_width("2 2\n1 0 0\n0 1\n");
    EXPECT_THROW(read_frame(bad_width), Error);
    std::istringstream bad_header("two 2\n");
    EXPECT_THROW(read_frame(bad_header), Error);
    std::istringstream junk("2 1\n1 x\n");
    EXPECT_THROW(read_frame(junk), Error);
}
