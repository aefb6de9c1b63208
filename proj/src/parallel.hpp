#pragma once

#include <cstddef>
#include <functional>

namespace ionjc {

/// Worker count: hardware concurrency, capped by the IONJC_THREADS
/// environment variable when set.
unsigned worker_count();

/// Runs body(i) for i in [0, n) over contiguous chunks. Each index is handled
/// by exactly one worker, so writes to per-index slots are deterministic.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

}  // namespace ionjc
