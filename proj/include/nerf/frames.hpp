#pragma once

// Signed-permutation-invariant unit norm tight frames generated as orbits of a
// sparse vector, plus the checks and the plain-text file format around them.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <iomanip>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <random>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "nerf/combinatorics.hpp"
#include "nerf/error.hpp"
#include "nerf/signed_permutation.hpp"

namespace nerf {

inline constexpr double unit_norm_tolerance = 1e-12;
inline constexpr double tightness_tolerance = 1e-9;

struct GeneratorSpec {
    std::size_t dimension = 0;    // M
    std::size_t support_size = 0; // k

    void validate() const {
        if (dimension == 0 || support_size == 0 || support_size > dimension)
            throw Error(ErrorKind::invalid_spec, "need 1 <= k <= M, got M=" + std::to_string(dimension) +
                                                     " k=" + std::to_string(support_size));
    }

    /// k leading entries equal to 1/sqrt(k), the rest zero.
    std::vector<double> generator() const {
        validate();
        std::vector<double> g(dimension, 0.0);
        std::fill_n(g.begin(), support_size, 1.0 / std::sqrt(static_cast<double>(support_size)));
        return g;
    }

    /// 2^(k-1) * C(M,k), exact.
    BigInt orbit_size() const {
        validate();
        return (BigInt(1) << (support_size - 1)) * binomial(dimension, support_size);
    }
};

/// M x N real matrix stored column by column.
class FrameMatrix {
public:
    FrameMatrix() = default;

    FrameMatrix(std::size_t dim, std::vector<double> column_major, std::optional<double> tight_constant = {})
        : dim_(dim), data_(std::move(column_major)), tight_constant_(tight_constant) {
        if (dim_ == 0 || data_.size() % dim_ != 0)
            throw Error(ErrorKind::invalid_input, "frame data is not a whole number of columns");
        count_ = data_.size() / dim_;
    }

    std::size_t dimension() const noexcept { return dim_; }
    std::size_t size() const noexcept { return count_; }
    bool empty() const noexcept { return count_ == 0; }

    std::span<const double> column(std::size_t n) const { return {data_.data() + n * dim_, dim_}; }
    std::span<const double> data() const noexcept { return data_; }

    /// N/M when the frame was flagged tight.
    std::optional<double> tight_constant() const noexcept { return tight_constant_; }
    double redundancy() const noexcept { return static_cast<double>(count_) / static_cast<double>(dim_); }
    void mark_tight() { tight_constant_ = redundancy(); }

    static FrameMatrix standard_basis(std::size_t dim) {
        std::vector<double> d(dim * dim, 0.0);
        for (std::size_t m = 0; m < dim; ++m)
            d[m * dim + m] = 1.0;
        return {dim, std::move(d), 1.0};
    }

    FrameMatrix without_column(std::size_t n) const {
        std::vector<double> d;
        d.reserve(data_.size() - dim_);
        for (std::size_t j = 0; j < count_; ++j)
            if (j != n)
                d.insert(d.end(), column(j).begin(), column(j).end());
        return {dim_, std::move(d)};
    }

private:
    std::size_t dim_ = 0;
    std::size_t count_ = 0;
    std::vector<double> data_;
    std::optional<double> tight_constant_;
};

/// All signed permutations of the generator, distinct modulo negation.
/// Supports in lexicographic order; within a support the sign patterns of the
/// trailing k-1 nonzeros count up in binary (a set bit flips the sign), the
/// first nonzero is always positive.
inline FrameMatrix orbit_signed_permutations(const GeneratorSpec& spec) {
    spec.validate();
    const std::size_t dim = spec.dimension;
    const auto k = static_cast<std::uint32_t>(spec.support_size);
    const double value = 1.0 / std::sqrt(static_cast<double>(k));
    const std::uint64_t patterns = std::uint64_t{1} << (k - 1);

    std::vector<double> data;
    std::vector<std::uint32_t> support(k);
    for (std::uint32_t i = 0; i < k; ++i)
        support[i] = i;
    do {
        for (std::uint64_t bits = 0; bits < patterns; ++bits) {
            const std::size_t base = data.size();
            data.resize(base + dim, 0.0);
            for (std::uint32_t j = 0; j < k; ++j) {
                const bool negative = j > 0 && ((bits >> (k - 1 - j)) & 1u);
                data[base + support[j]] = negative ? -value : value;
            }
        }
    } while (next_combination(support, static_cast<std::uint32_t>(dim)));

    FrameMatrix frame(dim, std::move(data));
    frame.mark_tight();
    return frame;
}

struct UntfReport {
    bool is_unit_norm = false;
    bool is_tight = false;
    double frobenius_defect = 0.0; // ||Phi Phi^* - (N/M) I||_F
    double max_norm_error = 0.0;
    double tight_constant = 0.0;
};

/// Frame operator Phi Phi^*, row-major M x M.
inline std::vector<double> frame_operator(const FrameMatrix& frame) {
    const std::size_t dim = frame.dimension();
    std::vector<double> s(dim * dim, 0.0);
    for (std::size_t n = 0; n < frame.size(); ++n) {
        const auto phi = frame.column(n);
        for (std::size_t i = 0; i < dim; ++i)
            for (std::size_t j = 0; j < dim; ++j)
                s[i * dim + j] += phi[i] * phi[j];
    }
    return s;
}

inline UntfReport verify_untf(const FrameMatrix& frame, double tol = tightness_tolerance) {
    if (frame.empty())
        throw Error(ErrorKind::invalid_input, "empty frame");
    UntfReport r;
    r.tight_constant = frame.redundancy();
    for (std::size_t n = 0; n < frame.size(); ++n) {
        double sq = 0.0;
        for (double v : frame.column(n))
            sq += v * v;
        r.max_norm_error = std::max(r.max_norm_error, std::abs(std::sqrt(sq) - 1.0));
    }
    r.is_unit_norm = r.max_norm_error <= unit_norm_tolerance;

    const std::size_t dim = frame.dimension();
    const auto s = frame_operator(frame);
    double defect = 0.0;
    for (std::size_t i = 0; i < dim; ++i)
        for (std::size_t j = 0; j < dim; ++j) {
            const double d = s[i * dim + j] - (i == j ? r.tight_constant : 0.0);
            defect += d * d;
        }
    r.frobenius_defect = std::sqrt(defect);
    r.is_tight = r.frobenius_defect <= tol;
    return r;
}

namespace detail {

// Column key modulo negation: first entry above the noise floor made positive,
// then quantized so that equal columns (up to rounding) compare equal.
inline std::vector<std::int64_t> column_key(std::span<const double> v) {
    constexpr double floor = 1e-9;
    constexpr double scale = 1e8;
    double s = 1.0;
    for (double x : v)
        if (std::abs(x) > floor) {
            s = x > 0 ? 1.0 : -1.0;
            break;
        }
    std::vector<std::int64_t> key(v.size());
    for (std::size_t m = 0; m < v.size(); ++m)
        key[m] = std::llround(s * v[m] * scale);
    return key;
}

} // namespace detail

/// True when no two columns agree up to sign (within the key resolution).
inline bool columns_distinct_modulo_negation(const FrameMatrix& frame) {
    std::map<std::vector<std::int64_t>, int> seen;
    for (std::size_t n = 0; n < frame.size(); ++n)
        if (++seen[detail::column_key(frame.column(n))] > 1)
            return false;
    return true;
}

/// Samples `trials` group elements U and checks that {U phi_n} coincides with
/// {phi_n} as a multiset modulo negation.
inline bool verify_group_invariance(const FrameMatrix& frame, std::size_t trials, std::uint64_t rng_seed) {
    if (frame.empty())
        throw Error(ErrorKind::invalid_input, "empty frame");
    std::map<std::vector<std::int64_t>, long> reference;
    for (std::size_t n = 0; n < frame.size(); ++n)
        ++reference[detail::column_key(frame.column(n))];

    std::mt19937_64 rng(rng_seed);
    std::vector<double> moved(frame.dimension());
    for (std::size_t t = 0; t < trials; ++t) {
        const auto u = random_signed_permutation(frame.dimension(), rng);
        auto remaining = reference;
        for (std::size_t n = 0; n < frame.size(); ++n) {
            u.apply(frame.column(n), moved);
            auto it = remaining.find(detail::column_key(moved));
            if (it == remaining.end() || it->second == 0)
                return false;
            --it->second;
        }
    }
    return true;
}

/// Sorted absolute values: the representative of x's orbit in the
/// nonnegative nondecreasing sector.
inline std::vector<double> canonicalize(std::span<const double> x) {
    std::vector<double> out(x.size());
    bool nonzero = false;
    for (std::size_t m = 0; m < x.size(); ++m) {
        out[m] = std::abs(x[m]);
        nonzero = nonzero || out[m] != 0.0;
    }
    if (!nonzero)
        throw Error(ErrorKind::invalid_input, "cannot canonicalize the zero vector");
    std::sort(out.begin(), out.end());
    return out;
}

// -------------------------------------------------------------------------- //
// Text format: "M N", then one column per line, 17 significant digits.

inline void write_frame(std::ostream& out, const FrameMatrix& frame) {
    out << frame.dimension() << ' ' << frame.size() << '\n';
    out << std::setprecision(17);
    for (std::size_t n = 0; n < frame.size(); ++n) {
        const auto col = frame.column(n);
        for (std::size_t m = 0; m < col.size(); ++m)
            out << (m ? " " : "") << col[m];
        out << '\n';
    }
    if (!out)
        throw Error(ErrorKind::io, "failed writing frame");
}

inline FrameMatrix read_frame(std::istream& in) {
    std::size_t dim = 0, count = 0;
    std::string line;
    if (!std::getline(in, line))
        throw Error(ErrorKind::io, "missing frame header");
    {
        std::istringstream header(line);
        if (!(header >> dim >> count) || dim == 0)
            throw Error(ErrorKind::io, "malformed frame header '" + line + "'");
    }
    std::vector<double> data;
    data.reserve(dim * count);
    std::size_t rows = 0;
    while (std::getline(in, line)) {
        if (line.find_first_not_of(" \t\r") == std::string::npos)
            continue;
        std::istringstream row(line);
        double v;
        std::size_t fields = 0;
        while (row >> v) {
            data.push_back(v);
            ++fields;
        }
        if (!row.eof() || fields != dim)
            throw Error(ErrorKind::io, "frame row " + std::to_string(rows + 1) + " has " +
                                           std::to_string(fields) + " values, expected " + std::to_string(dim));
        ++rows;
    }
    if (rows != count)
        throw Error(ErrorKind::io, "frame header announces " + std::to_string(count) + " columns, found " +
                                       std::to_string(rows));
    return {dim, std::move(data)};
}

} // namespace nerf
