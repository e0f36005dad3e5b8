#pragma once

#include <cstdint>

namespace svbrdf {

// Thread count used by parallel_for (and capped onto the BLAS backend).
// 0 restores the hardware default.
int max_threads();
void set_max_threads(int n);

// When disabled every parallel_for runs on the calling thread. This is the
// serial reference mode exercised by the tests and the kernel benchmark.
bool parallel_enabled();
void set_parallel_enabled(bool enabled);

namespace detail {
inline constexpr std::int64_t kParallelGrain = 256;
}

// Data-parallel loop over [0, n). Bodies must write disjoint outputs; any
// accumulation happens inside one body invocation, so results are identical
// for every thread count and for the serial mode.
template <typename F>
void parallel_for(std::int64_t n, F&& body) {
  if (!parallel_enabled() || n < detail::kParallelGrain) {
    for (std::int64_t i = 0; i < n; ++i) body(i);
    return;
  }
#pragma omp parallel for schedule(static)
  for (std::int64_t i = 0; i < n; ++i) body(i);
}

}  // namespace svbrdf
