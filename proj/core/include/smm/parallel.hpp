#pragma once

#include <cstddef>
#include <functional>

namespace smm {

/// Worker count: SMM_THREADS when set to a positive integer, otherwise the
/// hardware concurrency (at least 1).
std::size_t worker_count();

/// Points are processed in fixed-size blocks so that per-block partial
/// results, merged in block order, do not depend on the worker count.
inline constexpr std::size_t kBlockSize = 512;

inline std::size_t block_count(std::size_t items, std::size_t block_size = kBlockSize) {
  return (items + block_size - 1) / block_size;
}

/// Calls fn(block, begin, end) for every block of [0, items). Blocks are
/// distributed over worker_count() threads; fn must only touch per-block or
/// per-item state.
void for_each_block(std::size_t items, const std::function<void(std::size_t, std::size_t, std::size_t)>& fn,
                    std::size_t block_size = kBlockSize);

}  // namespace smm
