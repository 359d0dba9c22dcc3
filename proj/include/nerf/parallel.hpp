#pragma once

// Chunked map-reduce over an integer index space. Chunks are handed out
// dynamically, each worker folds into a private accumulator, and the
// accumulators are merged at the end. Results are independent of the worker
// count as long as `merge` is commutative and associative.

#include <algorithm>
#include <atomic>
#include <cstdint>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

namespace nerf {

/// 0 means: NERF_CERT_THREADS if set, else the hardware concurrency.
inline unsigned resolve_threads(unsigned requested) {
    if (requested > 0)
        return requested;
    if (const char* env = std::getenv("NERF_CERT_THREADS")) {
        try {
            const long v = std::stol(env);
            if (v > 0)
                return static_cast<unsigned>(v);
        } catch (...) {
        }
    }
    return std::max(1u, std::thread::hardware_concurrency());
}

template <class Acc, class Make, class Work, class Merge>
Acc chunked_reduce(std::uint64_t total, std::uint64_t chunk, unsigned threads, Make&& make, Work&& work,
                   Merge&& merge) {
    chunk = std::max<std::uint64_t>(chunk, 1);
    const std::uint64_t chunks = (total + chunk - 1) / chunk;
    threads = static_cast<unsigned>(std::clamp<std::uint64_t>(threads, 1, std::max<std::uint64_t>(chunks, 1)));

    std::vector<Acc> partial;
    partial.reserve(threads);
    for (unsigned t = 0; t < threads; ++t)
        partial.push_back(make());

    std::atomic<std::uint64_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    auto run = [&](Acc& acc) {
        try {
            for (std::uint64_t c; (c = next.fetch_add(1)) < chunks;) {
                const std::uint64_t begin = c * chunk;
                work(acc, begin, std::min(total, begin + chunk));
            }
        } catch (...) {
            std::lock_guard lock(failure_mutex);
            if (!failure)
                failure = std::current_exception();
            next = chunks;
        }
    };

    if (threads == 1) {
        run(partial[0]);
    } else {
        std::vector<std::thread> pool;
        pool.reserve(threads);
        for (unsigned t = 0; t < threads; ++t)
            pool.emplace_back(run, std::ref(partial[t]));
        for (auto& th : pool)
            th.join();
    }
    if (failure)
        std::rethrow_exception(failure);

    Acc result = std::move(partial[0]);
    for (unsigned t = 1; t < threads; ++t)
        merge(result, partial[t]);
    return result;
}

} // namespace nerf
