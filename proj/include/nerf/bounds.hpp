#pragma once

// epsilon-approximate NERF bounds for every K from one pass over the net, and
// their conversion into certified intervals for the optimal bounds.
//
// For each net point psi the squared correlations |<psi, phi_n>|^2 are
// sorted; the K-th prefix sum is a candidate for alpha_{K,eps} (running
// minimum over the net) and the K-th suffix sum a candidate for beta_{K,eps}
// (running maximum). Frame invariance under signed permutations makes the net
// over the nonnegative nondecreasing sector sufficient.

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <mutex>
#include <optional>
#include <span>
#include <vector>

#include "nerf/epsnet.hpp"
#include "nerf/error.hpp"
#include "nerf/frames.hpp"
#include "nerf/parallel.hpp"

namespace nerf {

inline constexpr std::uint64_t no_witness = std::numeric_limits<std::uint64_t>::max();

namespace detail {

inline void squared_correlations(const FrameMatrix& frame, std::span<const double> psi, std::span<double> out) {
    const std::size_t dim = frame.dimension();
    const double* col = frame.data().data();
    for (std::size_t n = 0; n < out.size(); ++n, col += dim) {
        double ip = 0.0;
        for (std::size_t m = 0; m < dim; ++m)
            ip += psi[m] * col[m];
        out[n] = ip * ip;
    }
}

} // namespace detail

/// {|<psi, phi_n>|^2} in nondecreasing order.
inline std::vector<double> sorted_squared_correlations(const FrameMatrix& frame, std::span<const double> psi) {
    if (psi.size() != frame.dimension())
        throw Error(ErrorKind::invalid_input, "psi has dimension " + std::to_string(psi.size()) + ", frame has " +
                                                  std::to_string(frame.dimension()));
    std::vector<double> v(frame.size());
    detail::squared_correlations(frame, psi, v);
    std::sort(v.begin(), v.end());
    return v;
}

/// Running per-K extremes of the prefix (lower) and suffix (upper) sums.
/// Ties go to the smaller net index so merging is order independent.
struct SweepAccumulator {
    std::vector<double> lower_min;
    std::vector<double> upper_max;
    std::vector<std::uint64_t> argmin;
    std::vector<std::uint64_t> argmax;
    std::uint64_t points_processed = 0;

    explicit SweepAccumulator(std::size_t n = 0)
        : lower_min(n, std::numeric_limits<double>::infinity()),
          upper_max(n, -std::numeric_limits<double>::infinity()),
          argmin(n, no_witness),
          argmax(n, no_witness) {}

    /// `sorted` is one point's sorted squared correlations.
    void add(std::uint64_t index, std::span<const double> sorted) {
        const std::size_t n = sorted.size();
        double lower = 0.0, upper = 0.0;
        for (std::size_t k = 0; k < n; ++k) {
            lower += sorted[k];
            upper += sorted[n - 1 - k];
            if (lower < lower_min[k] || (lower == lower_min[k] && index < argmin[k])) {
                lower_min[k] = lower;
                argmin[k] = index;
            }
            if (upper > upper_max[k] || (upper == upper_max[k] && index < argmax[k])) {
                upper_max[k] = upper;
                argmax[k] = index;
            }
        }
        ++points_processed;
    }

    void merge(const SweepAccumulator& other) {
        for (std::size_t k = 0; k < lower_min.size(); ++k) {
            if (other.lower_min[k] < lower_min[k] ||
                (other.lower_min[k] == lower_min[k] && other.argmin[k] < argmin[k])) {
                lower_min[k] = other.lower_min[k];
                argmin[k] = other.argmin[k];
            }
            if (other.upper_max[k] > upper_max[k] ||
                (other.upper_max[k] == upper_max[k] && other.argmax[k] < argmax[k])) {
                upper_max[k] = other.upper_max[k];
                argmax[k] = other.argmax[k];
            }
        }
        points_processed += other.points_processed;
    }
};

/// How alpha_eps/beta_eps become certified bounds.
enum class CertificateRule {
    general,  ///< any frame: cap = beta_eps / (1 - eps^2)
    untf,     ///< unit norm tight frame: cap = N/M
    combined, ///< unit norm tight frame, tighter of the two: cap = min(N/M, beta_eps / (1 - eps^2))
};

/// Per-K arrays, entry K-1 holds the value for K.
struct BoundsTable {
    std::size_t dimension = 0; // M
    std::size_t frame_size = 0; // N
    double epsilon_sq = 0.0;
    std::vector<double> alpha_eps;
    std::vector<double> beta_eps;
    std::vector<double> alpha_lower;
    std::vector<double> beta_upper;
    std::vector<std::uint64_t> argmin_r;
    std::vector<std::uint64_t> argmax_r;
    std::uint64_t points_used = 0;
    std::optional<CertificateRule> rule;

    double redundancy() const { return static_cast<double>(frame_size) / static_cast<double>(dimension); }
    bool certified() const { return rule.has_value(); }
};

inline BoundsTable table_from(const SweepAccumulator& acc, std::size_t dim, double epsilon_sq) {
    if (acc.points_processed == 0)
        throw Error(ErrorKind::invalid_input, "the net contributed no points");
    BoundsTable t;
    t.dimension = dim;
    t.frame_size = acc.lower_min.size();
    t.epsilon_sq = epsilon_sq;
    t.alpha_eps = acc.lower_min;
    t.beta_eps = acc.upper_max;
    t.argmin_r = acc.argmin;
    t.argmax_r = acc.argmax;
    t.points_used = acc.points_processed;
    return t;
}

/// Sweep an explicit list of unit vectors; indices are list positions.
inline BoundsTable sweep_points(const FrameMatrix& frame, std::span<const std::vector<double>> points,
                                double epsilon_sq) {
    SweepAccumulator acc(frame.size());
    std::uint64_t index = 0;
    for (const auto& psi : points)
        acc.add(index++, sorted_squared_correlations(frame, psi));
    return table_from(acc, frame.dimension(), epsilon_sq);
}

struct SweepOptions {
    unsigned threads = 1;            // 0: NERF_CERT_THREADS or hardware concurrency
    std::uint64_t chunk_size = 1u << 15;
    std::uint64_t progress_every = 100'000; // retained points between progress callbacks
    std::function<void(std::uint64_t processed, std::uint64_t total_indices)> progress;
};

/// One pass over the net; alpha_eps/beta_eps for every K = 1..N. The result
/// does not depend on chunking or thread count.
inline BoundsTable sweep_all_K(const FrameMatrix& frame, const StepNet& net, const SweepOptions& options = {}) {
    if (frame.empty())
        throw Error(ErrorKind::invalid_input, "empty frame");
    if (frame.dimension() != net.config().dimension)
        throw Error(ErrorKind::invalid_input, "frame and net dimensions differ");

    const std::size_t dim = frame.dimension();
    const std::size_t count = frame.size();
    std::atomic<std::uint64_t> processed{0};
    std::uint64_t next_report = options.progress_every;
    std::mutex progress_mutex;

    auto work = [&](SweepAccumulator& acc, std::uint64_t begin, std::uint64_t end) {
        std::vector<double> psi(dim), values(count);
        const std::uint64_t before = acc.points_processed;
        net.for_each(begin, end, [&](const NetCursor& cursor) {
            cursor.write_psi(psi);
            detail::squared_correlations(frame, psi, values);
            std::sort(values.begin(), values.end());
            acc.add(cursor.index(), values);
        });
        if (options.progress && options.progress_every > 0) {
            const std::uint64_t done = processed += acc.points_processed - before;
            std::lock_guard lock(progress_mutex);
            if (done >= next_report) {
                options.progress(done, net.index_count());
                next_report = (done / options.progress_every + 1) * options.progress_every;
            }
        }
    };
    auto acc = chunked_reduce<SweepAccumulator>(
        net.index_count(), options.chunk_size, resolve_threads(options.threads),
        [&] { return SweepAccumulator(count); }, work,
        [](SweepAccumulator& a, const SweepAccumulator& b) { a.merge(b); });
    return table_from(acc, dim, net.config().epsilon_sq);
}

/// Fill alpha_lower / beta_upper.
///   beta_upper  = cap
///   alpha_lower = (alpha_eps - eps^2 cap) / (1 - eps^2)
/// with cap chosen by `rule`. Negative alpha_lower means no certificate.
inline BoundsTable certify(BoundsTable table, CertificateRule rule) {
    const double e2 = table.epsilon_sq;
    if (!(e2 > 0.0 && e2 < 1.0))
        throw Error(ErrorKind::invalid_config, "epsilon^2 must lie in (0,1)");
    const std::size_t n = table.alpha_eps.size();
    table.alpha_lower.resize(n);
    table.beta_upper.resize(n);
    const double redundancy = table.redundancy();
    for (std::size_t k = 0; k < n; ++k) {
        const double general_cap = table.beta_eps[k] / (1.0 - e2);
        double cap = general_cap;
        if (rule == CertificateRule::untf)
            cap = redundancy;
        else if (rule == CertificateRule::combined)
            cap = std::min(redundancy, general_cap);
        table.beta_upper[k] = cap;
        table.alpha_lower[k] = (table.alpha_eps[k] - e2 * cap) / (1.0 - e2);
    }
    table.rule = rule;
    return table;
}

/// use_untf_cap selects the combined rule, otherwise the general one.
inline BoundsTable certify(BoundsTable table, bool use_untf_cap) {
    return certify(std::move(table), use_untf_cap ? CertificateRule::combined : CertificateRule::general);
}

struct TrivialBounds {
    double lower;
    double upper;
};

/// K - (N - N/M) <= alpha_K <= beta_K <= N/M for a unit norm tight frame.
inline TrivialBounds trivial_untf_bounds(std::size_t frame_size, std::size_t dim, std::size_t k) {
    if (dim == 0 || k < dim || k > frame_size)
        throw Error(ErrorKind::invalid_input, "need M <= K <= N, got K=" + std::to_string(k));
    const double redundancy = static_cast<double>(frame_size) / static_cast<double>(dim);
    return {static_cast<double>(k) - (static_cast<double>(frame_size) - redundancy), redundancy};
}

/// Smallest K with a positive certified lower bound.
inline std::optional<std::size_t> min_spanning_K(const BoundsTable& table) {
    if (!table.certified())
        throw Error(ErrorKind::invalid_input, "table has not been certified");
    for (std::size_t k = 0; k < table.alpha_lower.size(); ++k)
        if (table.alpha_lower[k] > 0.0)
            return k + 1;
    return std::nullopt;
}

/// beta_upper[K] / alpha_lower[K] when the lower bound is positive.
inline std::optional<double> condition_number_bound(const BoundsTable& table, std::size_t k) {
    if (!table.certified())
        throw Error(ErrorKind::invalid_input, "table has not been certified");
    if (k == 0 || k > table.alpha_lower.size())
        throw Error(ErrorKind::invalid_input, "K out of range");
    if (!(table.alpha_lower[k - 1] > 0.0))
        return std::nullopt;
    return table.beta_upper[k - 1] / table.alpha_lower[k - 1];
}

} // namespace nerf
