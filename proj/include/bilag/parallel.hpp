#pragma once

#include <functional>

namespace bilag {

// Number of worker threads: hardware concurrency capped by the BILAG_THREADS
// environment variable (a cap of 1 forces serial execution).
int worker_threads();

// Runs fn(0..n-1), splitting across workers when more than one is allowed.
// Callers must make iterations independent; determinism comes from writing
// results by index and reducing serially afterwards. Exceptions from workers
// are rethrown on the calling thread.
void parallel_for(int n, const std::function<void(int)>& fn);

} // namespace bilag
