// Copyright (c) 2026 remine contributors
//
// SPDX-License-Identifier: Apache-2.0
//

#include "remine/parallel.hpp"

#include <atomic>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace remine {

namespace {
std::atomic<int> g_requested_threads{0};
}

void set_worker_threads(int n) { g_requested_threads.store(n < 0 ? 0 : n); }

int hardware_threads() {
#ifdef _OPENMP
  return omp_get_max_threads();
#else
  return 1;
#endif
}

int worker_threads() {
  const int requested = g_requested_threads.load();
  if (requested > 0) return requested;
  return hardware_threads();
}

}  // namespace remine
