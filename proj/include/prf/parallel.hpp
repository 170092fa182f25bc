#pragma once

#include <cstddef>
#include <functional>

namespace prf {

// Name of the environment variable holding the worker count.
inline constexpr const char* kThreadsEnv = "PRF_THREADS";

// Worker count from PRF_THREADS, falling back to the hardware concurrency.
std::size_t worker_count();

// Runs task(i) for i in [0, n_tasks) on worker_count() threads. Tasks must
// write only to their own output slots; the first exception (lowest index)
// is rethrown after all workers stop.
void parallel_for(std::size_t n_tasks, const std::function<void(std::size_t)>& task);

// Pairwise summation: the result depends only on the order of `values`.
double pairwise_sum(const double* values, std::size_t n);

}  // namespace prf
