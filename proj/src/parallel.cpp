#include "vanhove/parallel.hpp"

#include <omp.h>

#include <cstdlib>
#include <string>

namespace vanhove {

void set_thread_count(int n) {
  if (n > 0) omp_set_num_threads(n);
}

int thread_count() { return omp_get_max_threads(); }

int threads_from_environment() {
  const char* raw = std::getenv("VANHOVE_THREADS");
  if (raw == nullptr) return 0;
  try {
    const int n = std::stoi(raw);
    return n > 0 ? n : 0;
  } catch (...) {
    return 0;
  }
}

}  // namespace vanhove
