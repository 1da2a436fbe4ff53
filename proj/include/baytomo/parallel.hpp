#pragma once

namespace baytomo {

/// Caps OpenMP worker threads at the value of BAYTOMO_THREADS when set.
/// Returns the resulting thread count.
int configure_threads_from_env();

int worker_threads();

}  // namespace baytomo
