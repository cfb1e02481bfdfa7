#pragma once

#include <cstdint>
#include <functional>

namespace macfb {

/// Worker cap: min(hardware_concurrency, MACFB_THREADS if set). At least 1.
int max_threads();

/// Runs fn(block) for block in [0, n_blocks) on up to max_threads() workers.
/// Blocks are assigned statically by index, so any per-block state derived
/// from the block index is independent of the worker count.
void parallel_for_blocks(int64_t n_blocks, const std::function<void(int64_t)>& fn);

}  // namespace macfb
