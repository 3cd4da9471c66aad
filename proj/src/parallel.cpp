// SPDX-License-Identifier: Apache-2.0

#include "thzirs/parallel.hpp"

#include <omp.h>

#include <cstdlib>
#include <string>

namespace thz {

int apply_thread_cap_from_env() {
  if (const char* env = std::getenv("PLAN_THREADS")) {
    try {
      const int cap = std::stoi(env);
      if (cap > 0 && cap < omp_get_max_threads()) omp_set_num_threads(cap);
    } catch (const std::exception&) {
      // ignore a malformed value and keep the runtime default
    }
  }
  return omp_get_max_threads();
}

int max_threads() { return omp_get_max_threads(); }

}  // namespace thz
