#include "qensemble/parallel.hpp"

#include <omp.h>

#include <charconv>
#include <cstdlib>
#include <string>
#include <string_view>

#include "qensemble/error.hpp"

namespace qens {

namespace {
int default_threads() {
  static const int initial = omp_get_max_threads();
  return initial;
}
}  // namespace

void set_thread_cap(int threads) {
  if (threads < 0) throw ValidationError("thread cap must be >= 0");
  omp_set_num_threads(threads == 0 ? default_threads() : threads);
}

int thread_cap_from_env() {
  const char* raw = std::getenv("QENSEMBLE_THREADS");
  if (raw == nullptr || *raw == '\0') return 0;
  std::string_view text(raw);
  int value = 0;
  auto [end, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || end != text.data() + text.size() || value < 0) {
    throw ValidationError("QENSEMBLE_THREADS must be a non-negative integer, got '" +
                          std::string(text) + "'");
  }
  return value;
}

int active_threads() { return omp_get_max_threads(); }

}  // namespace qens
