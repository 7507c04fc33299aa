#pragma once

#include <cstddef>
#include <functional>

namespace cournot {

/// Environment variable capping worker threads; unset or 0 means hardware concurrency.
inline constexpr const char* kThreadsEnvVar = "COURNOT_THREADS";

/// Resolves a worker count: `requested` if nonzero, else the env var, else hardware.
unsigned resolve_threads(unsigned requested = 0);

/// Runs body(i) for i in [0, n) on up to `threads` workers. Items are handed
/// out in contiguous blocks; callers write results by index so output does not
/// depend on scheduling. The first exception thrown by any item is rethrown.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body,
                  unsigned threads = 0);

}  // namespace cournot
