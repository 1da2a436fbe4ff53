#include "baytomo/parallel.hpp"

#include <omp.h>

#include <cstdlib>
#include <string>

namespace baytomo {

int configure_threads_from_env() {
  if (const char* env = std::getenv("BAYTOMO_THREADS")) {
    try {
      const int cap = std::stoi(env);
      if (cap > 0 && cap < omp_get_max_threads()) omp_set_num_threads(cap);
    } catch (const std::exception&) {
      // unparsable value: keep the OpenMP default
    }
  }
  return worker_threads();
}

int worker_threads() { return omp_get_max_threads(); }

}  // namespace baytomo
