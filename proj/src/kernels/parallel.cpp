#include "mixsiam/kernels/parallel.hpp"

#include <atomic>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace mixsiam::kernels {

namespace {
std::atomic<bool> g_strict{false};
}

void set_strict_deterministic(bool on) { g_strict.store(on, std::memory_order_relaxed); }

bool strict_deterministic() { return g_strict.load(std::memory_order_relaxed); }

int max_threads() {
#ifdef _OPENMP
    return omp_get_max_threads();
#else
    return 1;
#endif
}

}  // namespace mixsiam::kernels
