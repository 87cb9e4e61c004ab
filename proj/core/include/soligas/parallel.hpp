#pragma once

#include <cstddef>
#include <functional>

namespace soligas {

// Worker count: SOLIGAS_THREADS if set (>= 1), else hardware concurrency.
std::size_t thread_count();
void set_thread_count(std::size_t n);  // 0 restores the environment/hardware default

// Runs body(i) for i in [0, n). Exceptions from workers are rethrown (first one wins).
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

}  // namespace soligas
