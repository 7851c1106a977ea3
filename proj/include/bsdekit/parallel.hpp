#pragma once

#include <cstddef>
#include <functional>

namespace bsdekit {

// Resolved worker count: explicit set_thread_count() override, else the
// BSDEKIT_THREADS environment variable, else hardware concurrency.
int thread_count();

// n = 0 restores automatic resolution.
void set_thread_count(int n);

// Runs fn over disjoint chunks [begin, end) covering [0, n).  Falls back to
// a single inline call for small n or a single worker.  Workers write to
// disjoint ranges only; any reduction must be done by the caller in a fixed
// order so results are independent of the thread count.
void parallel_for(std::size_t n,
                  const std::function<void(std::size_t, std::size_t)>& fn);

} // namespace bsdekit
