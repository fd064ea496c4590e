#pragma once

#include <cstddef>
#include <functional>

namespace pxlab {

/// Worker count: the PXLAB_THREADS environment variable when it holds a
/// positive integer, otherwise std::thread::hardware_concurrency().
unsigned thread_count();

/// Calls body(i) for every i in [0, count). Each index is visited exactly
/// once; bodies must only write state owned by their index.
void parallel_for(std::size_t count, const std::function<void(std::size_t)>& body);

}  // namespace pxlab
