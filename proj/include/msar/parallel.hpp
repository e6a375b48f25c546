#pragma once

#include <cstddef>
#include <functional>

namespace msar {

/// Worker threads used by the numeric kernels. 0 selects hardware concurrency.
void set_thread_count(std::size_t n);
std::size_t thread_count();

// Split [0, n) into `n_chunks` contiguous chunks and run fn(chunk, begin, end)
// for each. The partition depends only on n and n_chunks, never on the thread
// count, so callers that reduce per-chunk results in chunk order get
// bit-identical output for any number of threads.
void parallel_chunks(std::size_t n, std::size_t n_chunks,
                     const std::function<void(std::size_t, std::size_t, std::size_t)>& fn);

}  // namespace msar
