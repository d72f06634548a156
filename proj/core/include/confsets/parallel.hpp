#pragma once

#include <cstddef>
#include <functional>

namespace confsets {

/// Global worker-thread cap used by all chunked loops (default: 1).
void set_max_threads(unsigned n);
unsigned max_threads();

/// Runs fn(chunk_index, begin, end) over [0, count) split into fixed-size
/// chunks.  The chunk grid depends only on (count, chunk_size), never on the
/// thread count, so callers that accumulate per-chunk results indexed by
/// chunk_index get identical output no matter how many threads run.
void for_each_chunk(std::size_t count, std::size_t chunk_size,
                    const std::function<void(std::size_t, std::size_t, std::size_t)>& fn);

/// Number of chunks the loop above would use.
std::size_t chunk_count(std::size_t count, std::size_t chunk_size);

}  // namespace confsets
