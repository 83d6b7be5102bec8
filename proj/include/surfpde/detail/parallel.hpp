#pragma once

#include <exception>
#include <limits>

namespace surfpde {

template <class Fn>
void for_each_node(Index count, Execution exec, Fn&& fn) {
  if (exec == Execution::Serial) {
    for (Index k = 0; k < count; ++k) fn(k);
    return;
  }
  Index failed_at = std::numeric_limits<Index>::max();
  std::exception_ptr failure;
#pragma omp parallel for schedule(dynamic, 16)
  for (Index k = 0; k < count; ++k) {
    try {
      fn(k);
    } catch (...) {
#pragma omp critical(surfpde_for_each_node)
      if (k < failed_at) {
        failed_at = k;
        failure = std::current_exception();
      }
    }
  }
  if (failure) std::rethrow_exception(failure);
}

}  // namespace surfpde
