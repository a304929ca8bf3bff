#ifndef QPL_PARALLEL_HPP
#define QPL_PARALLEL_HPP

#include <cstddef>
#include <functional>

namespace qpl {

/// Worker count: QPLEVEL_THREADS if set and positive, else hardware concurrency.
unsigned thread_count();
void set_thread_count(unsigned n);

/// Runs body(i) for i in [0, n) on up to thread_count() threads. Iterations must
/// write to disjoint state; results are independent of scheduling.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

}  // namespace qpl

#endif  // QPL_PARALLEL_HPP
