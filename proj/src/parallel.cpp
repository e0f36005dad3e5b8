#include "svbrdf/parallel.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

#ifdef SVBRDF_WITH_OPENBLAS
extern "C" void openblas_set_num_threads(int);
#endif

namespace svbrdf {

namespace {
bool g_parallel = true;
int g_threads = 0;  // 0 = hardware default
}  // namespace

int max_threads() {
#ifdef _OPENMP
  return g_threads > 0 ? g_threads : omp_get_max_threads();
#else
  return 1;
#endif
}

void set_max_threads(int n) {
  g_threads = n;
#ifdef _OPENMP
  if (n > 0) omp_set_num_threads(n);
#endif
#ifdef SVBRDF_WITH_OPENBLAS
  openblas_set_num_threads(n > 0 ? n : max_threads());
#endif
}

bool parallel_enabled() { return g_parallel; }
void set_parallel_enabled(bool enabled) { g_parallel = enabled; }

}  // namespace svbrdf
