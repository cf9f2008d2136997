#include "parallel.hpp"

namespace hyst {

namespace {
std::atomic<int> g_threads{0};
}

void set_thread_count(int n) { g_threads.store(n < 0 ? 0 : n); }

int thread_count() {
    int n = g_threads.load();
    if (n == 0) {
        unsigned hw = std::thread::hardware_concurrency();
        n = hw == 0 ? 1 : static_cast<int>(hw);
    }
    return n;
}

void parallel_chunks(std::size_t n, std::size_t chunk_size,
                     const std::function<void(std::size_t, std::size_t, std::size_t)>& fn) {
    if (n == 0) return;
    if (chunk_size == 0) chunk_size = n;
    const std::size_t nchunks = chunk_count(n, chunk_size);
    const int workers = std::min<int>(thread_count(), static_cast<int>(nchunks));
    if (workers <= 1) {
        for (std::size_t c = 0; c < nchunks; ++c) {
            const std::size_t b = c * chunk_size;
            fn(b, std::min(n, b + chunk_size), c);
        }
        return;
    }
    std::atomic<std::size_t> next{0};
    auto work = [&] {
        for (;;) {
            const std::size_t c = next.fetch_add(1);
            if (c >= nchunks) break;
            const std::size_t b = c * chunk_size;
            fn(b, std::min(n, b + chunk_size), c);
        }
    };
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(workers) - 1);
    for (int i = 1; i < workers; ++i) pool.emplace_back(work);
    work();
    for (auto& t : pool) t.join();
}

} // namespace hyst
