#pragma once

#include <cstddef>
#include <functional>

namespace mmdim {

// Worker count from MMDIM_WORKERS, else hardware concurrency (at least 1).
std::size_t worker_count();

// Runs body(i) for i in [0, n) across workers. Each index writes only its own
// output slot, so results do not depend on scheduling. The first exception by
// index is rethrown after all workers finish.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

}  // namespace mmdim
