#pragma once

#include <cstddef>
#include <functional>

namespace posit::train {

/// Worker count for parallel_for: POSIT_TRAIN_THREADS when set, else 1.
int thread_count();
/// Overrides the environment; values < 1 restore the default.
void set_thread_count(int threads);

/// Runs body(i) for i in [begin, end) over contiguous chunks. Each index is
/// processed by exactly one worker, so results are independent of the
/// thread count as long as body(i) only writes state owned by i.
void parallel_for(std::size_t begin, std::size_t end, const std::function<void(std::size_t)>& body);

}  // namespace posit::train
