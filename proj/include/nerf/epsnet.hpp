#pragma once

// Explicit epsilon-net for the nonnegative nondecreasing sector of the unit
// sphere built from exponentially spaced step functions.
//
// A net point is a nondecreasing vector psi_hat with entries in
// {1, d, d^2, ..., d^(L-1)} (d = delta), normalized to unit length. It is
// described by its level profile eta(1) >= ... >= eta(M), psi_hat(m) =
// d^eta(m). Rounding a sector point x up to the next level gives a net point
// psi_x with <x, psi_x> > sqrt(1 - eps^2) once L satisfies
//     (L-1)(1-eps^2)^L <= (1/M) ((L-1)/L)^L,   d = [M(L-1)]^(-1/(2L)).
//
// Rounded-up profiles also satisfy ||psi_hat||^2 >= 1 and
// d^2 * sum_{eta(m) < L-1} psi_hat(m)^2 <= 1; the pruned net keeps only
// profiles passing both tests.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "nerf/combinatorics.hpp"
#include "nerf/error.hpp"
#include "nerf/frames.hpp"

namespace nerf {

inline constexpr std::uint32_t level_search_cap = 1'000'000;

/// The level-count inequality for a given L.
inline bool levels_sufficient(std::size_t dim, double epsilon_sq, std::uint32_t levels) {
    const double l = levels;
    const double lhs = (l - 1.0) * std::pow(1.0 - epsilon_sq, l);
    const double rhs = std::pow((l - 1.0) / l, l) / static_cast<double>(dim);
    return lhs <= rhs;
}

/// Smallest L >= 2 satisfying the level-count inequality. L values with
/// M(L-1) = 1 are skipped because they force delta = 1.
inline std::uint32_t min_levels(std::size_t dim, double epsilon_sq) {
    if (dim == 0)
        throw Error(ErrorKind::invalid_config, "dimension must be positive");
    if (!(epsilon_sq > 0.0 && epsilon_sq < 1.0))
        throw Error(ErrorKind::invalid_config, "epsilon^2 must lie in (0,1)");
    for (std::uint32_t levels = 2; levels <= level_search_cap; ++levels) {
        if (dim * (levels - 1) <= 1)
            continue;
        if (levels_sufficient(dim, epsilon_sq, levels))
            return levels;
    }
    throw Error(ErrorKind::level_search_overflow,
                "no L <= " + std::to_string(level_search_cap) + " satisfies the level inequality");
}

/// delta = [M(L-1)]^(-1/(2L)), evaluated as exp(-ln(M(L-1)) / (2L)).
inline double delta_for(std::size_t dim, std::uint32_t levels) {
    if (dim == 0 || levels < 2)
        throw Error(ErrorKind::invalid_config, "need M >= 1 and L >= 2");
    const double product = static_cast<double>(dim) * static_cast<double>(levels - 1);
    if (product <= 1.0)
        throw Error(ErrorKind::invalid_config, "M(L-1) = 1 gives delta = 1");
    return std::exp(-std::log(product) / (2.0 * levels));
}

/// Stars and bars: C(M+L-1, L-1).
inline BigInt net_cardinality(std::size_t dim, std::uint32_t levels) {
    return binomial(dim + levels - 1, levels - 1);
}

struct NetConfig {
    std::size_t dimension = 0;
    double epsilon_sq = 0.0;
    std::uint32_t levels = 0;
    double delta = 0.0;
    bool pruned = true;
    std::vector<double> level_values; // delta^l, l = 0..L-1
    std::vector<double> level_squares; // delta^(2l)

    /// L from min_levels.
    static NetConfig for_epsilon(std::size_t dim, double epsilon_sq, bool pruned = true) {
        return with_levels(dim, min_levels(dim, epsilon_sq), epsilon_sq, pruned);
    }

    /// Explicit L, bypassing the level search.
    static NetConfig with_levels(std::size_t dim, std::uint32_t levels, double epsilon_sq, bool pruned = true) {
        if (!(epsilon_sq > 0.0 && epsilon_sq < 1.0))
            throw Error(ErrorKind::invalid_config, "epsilon^2 must lie in (0,1)");
        NetConfig c;
        c.dimension = dim;
        c.epsilon_sq = epsilon_sq;
        c.levels = levels;
        c.delta = delta_for(dim, levels);
        c.pruned = pruned;
        const double log_delta = -std::log(static_cast<double>(dim) * (levels - 1)) / (2.0 * levels);
        c.level_values.resize(levels);
        c.level_squares.resize(levels);
        for (std::uint32_t l = 0; l < levels; ++l) {
            c.level_values[l] = std::exp(l * log_delta);
            c.level_squares[l] = std::exp(2.0 * l * log_delta);
        }
        return c;
    }

    double epsilon() const { return std::sqrt(epsilon_sq); }
    double covering_target() const { return std::sqrt(1.0 - epsilon_sq); }
    BigInt cardinality() const { return net_cardinality(dimension, levels); }

    /// [d^-2 + M d^(2(L-1))]^(-1/2): worst-case <x, psi_x> for this config.
    double guaranteed_inner_product() const {
        return 1.0 / std::sqrt(1.0 / (delta * delta) + dimension * level_squares[levels - 1]);
    }
};

struct StepPoint {
    std::vector<std::uint32_t> eta; // nonincreasing level exponents, one per coordinate
    std::vector<double> psi_hat;    // nondecreasing, psi_hat(m) = delta^eta(m)
    std::vector<double> psi;        // psi_hat / ||psi_hat||
    double norm_sq = 0.0;           // ||psi_hat||^2

    /// c_l = #{m : eta(m) = l}.
    std::vector<std::uint32_t> level_counts(std::uint32_t levels) const {
        std::vector<std::uint32_t> c(levels, 0);
        for (auto e : eta)
            ++c[e];
        return c;
    }
};

inline StepPoint make_step(std::vector<std::uint32_t> eta, const NetConfig& config) {
    StepPoint s;
    s.eta = std::move(eta);
    s.psi_hat.resize(s.eta.size());
    for (std::size_t m = 0; m < s.eta.size(); ++m) {
        if (s.eta[m] >= config.levels || (m > 0 && s.eta[m] > s.eta[m - 1]))
            throw Error(ErrorKind::invalid_input, "level profile must be nonincreasing and below L");
        s.psi_hat[m] = config.level_values[s.eta[m]];
        s.norm_sq += config.level_squares[s.eta[m]];
    }
    const double norm = std::sqrt(s.norm_sq);
    s.psi.resize(s.psi_hat.size());
    for (std::size_t m = 0; m < s.psi.size(); ++m)
        s.psi[m] = s.psi_hat[m] / norm;
    return s;
}

namespace detail {

// Both pruning conditions from the level exponents alone. Exact double
// comparisons: a point sitting on the boundary is kept.
inline bool prune_conditions(std::span<const std::uint32_t> eta, const NetConfig& config) {
    const std::uint32_t bottom = config.levels - 1;
    double norm_sq = 0.0, upper_sq = 0.0;
    for (auto e : eta) {
        norm_sq += config.level_squares[e];
        if (e < bottom)
            upper_sq += config.level_squares[e];
    }
    return norm_sq >= 1.0 && config.level_squares[1] * upper_sq <= 1.0;
}

} // namespace detail

inline bool prune_check(const StepPoint& step, const NetConfig& config) {
    return detail::prune_conditions(step.eta, config);
}

/// Round a sector point up to the level grid.
inline StepPoint quantize_step(std::span<const double> x, const NetConfig& config) {
    if (x.size() != config.dimension)
        throw Error(ErrorKind::invalid_input, "dimension mismatch");
    constexpr double tol = 1e-9;
    double sq = 0.0;
    for (std::size_t m = 0; m < x.size(); ++m) {
        if (x[m] < -tol || (m > 0 && x[m] < x[m - 1] - tol))
            throw Error(ErrorKind::invalid_input, "x is not nonnegative and nondecreasing");
        sq += x[m] * x[m];
    }
    if (std::abs(sq - 1.0) > tol)
        throw Error(ErrorKind::invalid_input, "x is not unit norm");

    // Largest l with x(m) <= delta^l; level_values is strictly decreasing.
    const auto& lv = config.level_values;
    std::vector<std::uint32_t> eta(x.size());
    for (std::size_t m = 0; m < x.size(); ++m) {
        auto it = std::lower_bound(lv.begin(), lv.end(), x[m], std::greater<>{});
        // `it` is the first level strictly below x(m); step back one, unless x(m) > 1.
        const auto pos = static_cast<std::uint32_t>(it - lv.begin());
        eta[m] = pos == 0 ? 0 : pos - 1;
        if (it != lv.end() && *it == x[m])
            eta[m] = pos;
    }
    // Rounding never breaks monotonicity, but tolerance on x can.
    for (std::size_t m = 1; m < eta.size(); ++m)
        eta[m] = std::min(eta[m], eta[m - 1]);
    return make_step(std::move(eta), config);
}

// -------------------------------------------------------------------------- //
// Enumeration

/// Walks the step-function net in colexicographic order of the ascending
/// level sequence a_i = eta(M+1-i). Index 0 is the all-ones profile (eta = 0),
/// whose normalization is the uniform direction; the pruned net always keeps
/// it as its first point.
class NetCursor {
public:
    NetCursor(const NetConfig& config, std::uint64_t index)
        : config_(&config),
          index_(index),
          ascending_(unrank_multiset(index, static_cast<std::uint32_t>(config.dimension), config.levels)) {
        refresh();
    }

    std::uint64_t index() const noexcept { return index_; }

    bool advance() {
        if (!next_multiset(ascending_, config_->levels))
            return false;
        ++index_;
        refresh();
        return true;
    }

    double norm_sq() const noexcept { return norm_sq_; }

    /// Membership in the net described by the config (pruned or full).
    bool retained() const noexcept {
        if (!config_->pruned || index_ == 0)
            return true;
        return norm_sq_ >= 1.0 && config_->level_squares[1] * upper_sq_ <= 1.0;
    }

    bool passes_prune_conditions() const noexcept {
        return norm_sq_ >= 1.0 && config_->level_squares[1] * upper_sq_ <= 1.0;
    }

    std::vector<std::uint32_t> eta() const {
        return {ascending_.rbegin(), ascending_.rend()};
    }

    /// Fill psi (unit norm, nondecreasing) without allocating.
    void write_psi(std::span<double> psi) const {
        const std::size_t dim = ascending_.size();
        const double inv = 1.0 / std::sqrt(norm_sq_);
        for (std::size_t i = 0; i < dim; ++i)
            psi[dim - 1 - i] = config_->level_values[ascending_[i]] * inv;
    }

    StepPoint point() const { return make_step(eta(), *config_); }

private:
    void refresh() {
        const std::uint32_t bottom = config_->levels - 1;
        norm_sq_ = upper_sq_ = 0.0;
        for (auto a : ascending_) {
            norm_sq_ += config_->level_squares[a];
            if (a < bottom)
                upper_sq_ += config_->level_squares[a];
        }
    }

    const NetConfig* config_;
    std::uint64_t index_;
    std::vector<std::uint32_t> ascending_;
    double norm_sq_ = 0.0;
    double upper_sq_ = 0.0;
};

/// The net as an index space [0, C(M+L-1, L-1)) that can be consumed in
/// disjoint contiguous ranges.
class StepNet {
public:
    explicit StepNet(NetConfig config) : config_(std::move(config)) {
        auto n = to_u64(config_.cardinality());
        if (!n)
            throw Error(ErrorKind::invalid_config, "net index space exceeds 64 bits");
        index_count_ = *n;
    }

    const NetConfig& config() const noexcept { return config_; }
    std::uint64_t index_count() const noexcept { return index_count_; }

    /// f(index, cursor) for every retained point with index in [begin, end).
    template <class F>
    void for_each(std::uint64_t begin, std::uint64_t end, F&& f) const {
        end = std::min(end, index_count_);
        if (begin >= end)
            return;
        NetCursor cursor(config_, begin);
        for (;;) {
            if (cursor.retained())
                f(static_cast<const NetCursor&>(cursor));
            if (cursor.index() + 1 >= end || !cursor.advance())
                break;
        }
    }

    template <class F>
    void for_each(F&& f) const {
        for_each(0, index_count_, std::forward<F>(f));
    }

    std::uint64_t count_retained(std::uint64_t begin, std::uint64_t end) const {
        std::uint64_t n = 0;
        for_each(begin, end, [&](const NetCursor&) { ++n; });
        return n;
    }

    std::uint64_t count_retained() const { return count_retained(0, index_count_); }

    std::vector<StepPoint> points() const {
        std::vector<StepPoint> out;
        for_each([&](const NetCursor& c) { out.push_back(c.point()); });
        return out;
    }

private:
    NetConfig config_;
    std::uint64_t index_count_ = 0;
};

inline StepNet enumerate_net(const NetConfig& config) { return StepNet(config); }

// -------------------------------------------------------------------------- //
// Diagnostics

/// ln of (1/M!) (M + sqrt(M)/eps)^M.
inline double volumetric_bound_log(std::size_t dim, double epsilon) {
    if (dim == 0 || !(epsilon > 0.0))
        throw Error(ErrorKind::invalid_config, "need M >= 1 and epsilon > 0");
    const double m = static_cast<double>(dim);
    return m * std::log(m + std::sqrt(m) / epsilon) - std::lgamma(m + 1.0);
}

inline double volumetric_bound(std::size_t dim, double epsilon) {
    return std::exp(volumetric_bound_log(dim, epsilon));
}

struct CoveringReport {
    double min_inner_product = std::numeric_limits<double>::infinity();
    std::size_t failures = 0;       // <x, psi_x> below sqrt(1 - eps^2)
    std::size_t prune_failures = 0; // psi_x rejected by the pruning conditions
    std::size_t below_guarantee = 0; // <x, psi_x> below the config's analytic bound
    std::size_t trials = 0;

    bool ok() const noexcept { return failures == 0 && prune_failures == 0 && below_guarantee == 0; }
};

/// Monte Carlo check of the covering property over the whole sphere: draw
/// Gaussian points, fold into the sector, round up, measure.
inline CoveringReport verify_covering(const NetConfig& config, std::size_t trials, std::uint64_t rng_seed) {
    CoveringReport report;
    report.trials = trials;
    const double target = config.covering_target();
    const double guarantee = config.guaranteed_inner_product();
    std::mt19937_64 rng(rng_seed);
    std::normal_distribution<double> gauss;
    std::vector<double> x(config.dimension);
    for (std::size_t t = 0; t < trials; ++t) {
        double sq = 0.0;
        do {
            sq = 0.0;
            for (auto& v : x) {
                v = gauss(rng);
                sq += v * v;
            }
        } while (sq == 0.0);
        const double inv = 1.0 / std::sqrt(sq);
        for (auto& v : x)
            v *= inv;
        const auto sector = canonicalize(x);
        const auto step = quantize_step(sector, config);
        double ip = 0.0;
        for (std::size_t m = 0; m < sector.size(); ++m)
            ip += sector[m] * step.psi[m];
        report.min_inner_product = std::min(report.min_inner_product, ip);
        if (ip < target)
            ++report.failures;
        if (ip < guarantee * (1.0 - 1e-12))
            ++report.below_guarantee;
        if (!prune_check(step, config))
            ++report.prune_failures;
    }
    return report;
}

} // namespace nerf
