#pragma once

#include <cstddef>
#include <functional>

namespace fsa {

// Environment variable that overrides the worker count.
inline constexpr const char* kWorkersEnv = "FSA_WORKERS";

// Worker count from FSA_WORKERS, else the hardware concurrency (at least 1).
unsigned worker_count();

// Runs task(i) for i in [0, count) on up to `workers` threads. Tasks must
// write only to their own slot; the first exception thrown is rethrown here.
void parallel_for(std::size_t count, unsigned workers, const std::function<void(std::size_t)>& task);

}  // namespace fsa
