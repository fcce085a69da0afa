#pragma once

#include <cstddef>
#include <functional>

namespace ddx {

// Worker cap: explicit argument wins, then DDX_THREADS, then hardware
// concurrency. Parallelism only affects speed; callers must write results
// into index-addressed slots so output bytes never depend on the cap.
std::size_t resolve_workers(std::size_t requested = 0);

// Runs fn(i) for i in [0, n) across up to `workers` threads.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn,
                  std::size_t workers = 0);

} // namespace ddx
