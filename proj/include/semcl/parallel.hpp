#pragma once

#include <chrono>
#include <cstddef>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace semcl {

/// Serial is the reference path; OpenMp runs the same kernel with an
/// omp parallel for. Kernels write into index-addressed slots and reduce
/// in index order afterwards, so both policies produce bit-identical
/// results.
enum class ExecPolicy { Serial, OpenMp };

template <typename Fn>
void parallel_for(std::size_t n, ExecPolicy policy, Fn&& fn) {
#ifdef _OPENMP
  if (policy == ExecPolicy::OpenMp) {
#pragma omp parallel for schedule(static)
    for (long long i = 0; i < static_cast<long long>(n); ++i) {
      fn(static_cast<std::size_t>(i));
    }
    return;
  }
#else
  (void)policy;
#endif
  for (std::size_t i = 0; i < n; ++i) fn(i);
}

inline double wall_seconds() {
#ifdef _OPENMP
  return omp_get_wtime();
#else
  return std::chrono::duration<double>(std::chrono::steady_clock::now().time_since_epoch()).count();
#endif
}

}  // namespace semcl
