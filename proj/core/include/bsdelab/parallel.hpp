#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace bsde::parallel {

/// Caps the number of worker threads used by library kernels. 0 restores the
/// hardware default. Results never depend on this value: work is split into
/// fixed-size chunks and every reduction combines chunk results in index order.
void set_max_threads(unsigned n);
unsigned max_threads();

/// Calls fn(chunk, begin, end) for every chunk of [0, n). The chunk layout
/// depends only on n and chunk_size.
template <class Fn>
void for_chunks(std::size_t n, std::size_t chunk_size, Fn&& fn) {
    if (n == 0) return;
    chunk_size = std::max<std::size_t>(chunk_size, 1);
    const std::size_t chunks = (n + chunk_size - 1) / chunk_size;
    const std::size_t workers = std::min<std::size_t>(max_threads(), chunks);

    auto run_chunk = [&](std::size_t c) {
        const std::size_t begin = c * chunk_size;
        fn(c, begin, std::min(n, begin + chunk_size));
    };
    if (workers <= 1) {
        for (std::size_t c = 0; c < chunks; ++c) run_chunk(c);
        return;
    }

    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    auto worker = [&] {
        for (;;) {
            const std::size_t c = next.fetch_add(1);
            if (c >= chunks) return;
            try {
                run_chunk(c);
            } catch (...) {
                std::lock_guard lock(failure_mutex);
                if (!failure) failure = std::current_exception();
                next.store(chunks);
                return;
            }
        }
    };
    std::vector<std::jthread> pool;
    pool.reserve(workers - 1);
    for (std::size_t w = 1; w < workers; ++w) pool.emplace_back(worker);
    worker();
    pool.clear();
    if (failure) std::rethrow_exception(failure);
}

}  // namespace bsde::parallel
