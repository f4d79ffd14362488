#pragma once

#include <algorithm>
#include <atomic>
#include <cstdint>
#include <cstdlib>
#include <functional>
#include <thread>
#include <vector>

namespace fillprob {

// Worker-count resolution: explicit request > FILLPROB_THREADS env > hardware.
inline unsigned resolve_threads(unsigned requested = 0) {
    if (requested > 0) return requested;
    if (const char* env = std::getenv("FILLPROB_THREADS")) {
        long v = std::strtol(env, nullptr, 10);
        if (v > 0) return static_cast<unsigned>(v);
    }
    unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1u : hw;
}

// Runs body(block_index, begin, end) over [0, n) in fixed-size blocks.
// Blocks are indexed independently of the thread count, so callers that
// accumulate one partial result per block and reduce in block order get
// results that do not depend on how many workers ran.
inline void parallel_blocks(std::uint64_t n, std::uint64_t block_size, unsigned threads,
                            const std::function<void(std::uint64_t, std::uint64_t, std::uint64_t)>& body) {
    if (n == 0) return;
    block_size = std::max<std::uint64_t>(1, block_size);
    const std::uint64_t blocks = (n + block_size - 1) / block_size;
    threads = static_cast<unsigned>(std::min<std::uint64_t>(resolve_threads(threads), blocks));
    if (threads <= 1) {
        for (std::uint64_t b = 0; b < blocks; ++b) {
            body(b, b * block_size, std::min(n, (b + 1) * block_size));
        }
        return;
    }
    std::vector<std::thread> pool;
    pool.reserve(threads);
    std::atomic<std::uint64_t> next{0};
    for (unsigned t = 0; t < threads; ++t) {
        pool.emplace_back([&] {
            for (;;) {
                const std::uint64_t b = next.fetch_add(1);
                if (b >= blocks) return;
                body(b, b * block_size, std::min(n, (b + 1) * block_size));
            }
        });
    }
    for (auto& th : pool) th.join();
}

}  // namespace fillprob
