#include "smm/parallel.hpp"

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

namespace smm {

std::size_t worker_count() {
  if (const char* env = std::getenv("SMM_THREADS")) {
    try {
      const long value = std::stol(env);
      if (value > 0) return static_cast<std::size_t>(value);
    } catch (const std::exception&) {
      // fall through to the hardware default
    }
  }
  return std::max<std::size_t>(1, std::thread::hardware_concurrency());
}

void for_each_block(std::size_t items, const std::function<void(std::size_t, std::size_t, std::size_t)>& fn,
                    std::size_t block_size) {
  const std::size_t blocks = block_count(items, block_size);
  if (blocks == 0) return;
  const std::size_t workers = std::min(worker_count(), blocks);
  auto run_block = [&](std::size_t b) {
    const std::size_t begin = b * block_size;
    fn(b, begin, std::min(items, begin + block_size));
  };
  if (workers <= 1) {
    for (std::size_t b = 0; b < blocks; ++b) run_block(b);
    return;
  }

  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  std::vector<std::jthread> pool;
  pool.reserve(workers);
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (std::size_t b = next++; b < blocks; b = next++) {
        try {
          run_block(b);
        } catch (...) {
          std::lock_guard lock(failure_mutex);
          if (!failure) failure = std::current_exception();
        }
      }
    });
  }
  pool.clear();
  if (failure) std::rethrow_exception(failure);
}

}  // namespace smm
