#pragma once

#include <cstddef>
#include <functional>

namespace klish {

/// Rows per work item. Fixed, so partial results are combined in the same
/// order no matter how many threads run.
inline constexpr std::size_t kRowChunk = 2048;

/// Resolves a requested worker count: 0 means hardware concurrency.
int resolve_threads(int requested);

/// Calls fn(chunk_index, begin, end) for every chunk of [0, n). Chunks are
/// distributed over `threads` workers; fn must only write to per-chunk state.
void for_each_chunk(std::size_t n, std::size_t chunk, int threads,
                    const std::function<void(std::size_t, std::size_t, std::size_t)>& fn);

inline std::size_t chunk_count(std::size_t n, std::size_t chunk) {
  return (n + chunk - 1) / chunk;
}

}  // namespace klish
