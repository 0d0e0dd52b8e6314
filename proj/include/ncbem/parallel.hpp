// Minimal chunked parallel-for used by assembly and point evaluation.
#pragma once

#include <cstddef>
#include <functional>

namespace ncbem {

// Number of worker threads used by parallel loops. 0 = hardware default.
void set_num_threads(int n);
int num_threads();

// Calls fn(begin, end) on disjoint chunks of [0, n). Chunks are assigned
// deterministically; callers must ensure chunk writes do not alias.
void parallel_for_chunks(std::size_t n, const std::function<void(std::size_t, std::size_t)>& fn);

}  // namespace ncbem
