#pragma once

#include <cstdint>
#include <functional>

namespace fakeres {

// Thread count used when a caller passes 0: the FAKERES_THREADS environment
// variable if set and positive, otherwise std::thread::hardware_concurrency,
// otherwise 1.
int default_thread_count();

// Maps a user-facing thread argument to an effective count: 0 resolves via
// default_thread_count, negative values are a parameter_error.
int resolve_threads(int requested);

// Runs fn(begin, end) over a static contiguous partition of [0, count) on
// `threads` workers. With threads <= 1 (or count small) fn runs inline on the
// calling thread. Exceptions from workers are rethrown on the caller. The
// partition depends only on (count, threads), never on scheduling, so any
// output written disjointly by index is byte-reproducible for a fixed
// partition and independent of which worker ran which chunk.
void parallel_for(std::int64_t count, int threads,
                  const std::function<void(std::int64_t, std::int64_t)>& fn);

} // namespace fakeres
