#pragma once

#include <cstddef>
#include <exception>
#include <mutex>

namespace qens {

/// Execution policy for the data-parallel kernels. `serial` is the reference
/// loop; `parallel` distributes the same per-index work over OpenMP threads.
/// Both produce bitwise-identical results because each index is computed
/// independently.
enum class Exec { serial, parallel };

/// Caps OpenMP parallelism; 0 restores the runtime default.
void set_thread_cap(int threads);

/// Reads QENSEMBLE_THREADS (0 or unset = auto). Throws ValidationError on
/// garbage.
int thread_cap_from_env();

int active_threads();

template <class Fn>
void for_each_index(std::size_t n, Exec exec, Fn&& fn) {
  if (exec == Exec::serial) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::exception_ptr failure;
  std::mutex failure_mutex;
  const auto count = static_cast<std::ptrdiff_t>(n);
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < count; ++i) {
    try {
      fn(static_cast<std::size_t>(i));
    } catch (...) {
      std::lock_guard lock(failure_mutex);
      if (!failure) failure = std::current_exception();
    }
  }
  if (failure) std::rethrow_exception(failure);
}

}  // namespace qens
