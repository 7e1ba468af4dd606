#pragma once

#include <cstddef>
#include <functional>

namespace gpgrad {

// Worker count from GPGRAD_WORKERS, falling back to hardware concurrency.
int default_workers();

// Runs fn(i) for i in [0, n). Work is split into contiguous chunks; nested
// calls degrade to serial execution so outer loops own the thread budget.
// Callers write results into pre-sized slots, which keeps output independent
// of scheduling.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn,
                  int workers = 0);

}  // namespace gpgrad
