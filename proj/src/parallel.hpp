#pragma once

#include <algorithm>
#include <atomic>
#include <functional>
#include <thread>
#include <vector>

namespace hyst {

// Process-wide worker count. A value of 0 means "hardware concurrency".
void set_thread_count(int n);
int thread_count();

// Runs fn(begin, end, chunk_index) over [0, n) split into fixed-size chunks.
// Chunk boundaries depend only on n and chunk_size, never on the worker
// count, so callers that reduce per-chunk partials in chunk order get
// bit-identical results for any number of threads.
void parallel_chunks(std::size_t n, std::size_t chunk_size,
                     const std::function<void(std::size_t, std::size_t, std::size_t)>& fn);

inline std::size_t chunk_count(std::size_t n, std::size_t chunk_size) {
    return chunk_size == 0 ? 0 : (n + chunk_size - 1) / chunk_size;
}

} // namespace hyst
