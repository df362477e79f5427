#pragma once

#include <cstddef>
#include <functional>

namespace mmbias {

struct ExecOptions {
  // 0 means "use std::thread::hardware_concurrency()".
  std::size_t workers = 0;
};

std::size_t resolve_workers(const ExecOptions& exec);

// Calls fn(i) for every i in [0, count) across up to `workers` threads.
// Callers write results into pre-sized slots indexed by i, so the outcome
// never depends on scheduling. The first exception thrown (lowest index) is
// rethrown after all threads finish.
void parallel_for(std::size_t count, const ExecOptions& exec,
                  const std::function<void(std::size_t)>& fn);

}  // namespace mmbias
