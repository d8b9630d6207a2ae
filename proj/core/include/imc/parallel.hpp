#pragma once

#include <cstddef>
#include <functional>

namespace imc {

// Worker count resolution: explicit request > IMCFIT_THREADS > hardware.
int default_threads();
int resolve_threads(int requested);

// Runs fn(0..count-1) on up to `threads` workers. Tasks must only write to
// their own slot of any shared output; then results are order-independent.
void parallel_for(std::size_t count, int threads, const std::function<void(std::size_t)>& fn);

}  // namespace imc
