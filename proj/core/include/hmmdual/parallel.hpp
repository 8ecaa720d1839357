#pragma once

#include <algorithm>
#include <atomic>
#include <cstdint>
#include <exception>
#include <thread>
#include <vector>

namespace hmmdual {

// Worker count from the HMMDUAL_WORKERS environment variable; unset or 0
// means all hardware threads.
int worker_count();

// Parallel map-reduce over path indices with a deterministic reduction:
// paths are grouped into fixed-size chunks, each chunk is accumulated
// sequentially in path order by one worker, and chunk partials are merged
// in chunk order. The result is bit-identical for any worker count.
//
//   make()                -> Accum
//   path_fn(acc, p)       accumulate path p into acc
//   merge(total, partial) fold one chunk partial into the running total
template <class Accum, class MakeFn, class PathFn, class MergeFn>
Accum parallel_path_reduce(std::int64_t n_paths, const MakeFn& make,
                           const PathFn& path_fn, const MergeFn& merge,
                           int workers = 0,
                           std::int64_t chunk_size = 64) {
  if (workers <= 0) workers = worker_count();
  const std::int64_t n_chunks = (n_paths + chunk_size - 1) / chunk_size;

  std::vector<Accum> partials;
  partials.reserve(static_cast<std::size_t>(n_chunks));
  for (std::int64_t c = 0; c < n_chunks; ++c) partials.push_back(make());

  std::atomic<std::int64_t> next_chunk{0};
  std::exception_ptr first_error;
  std::atomic<bool> failed{false};

  auto run = [&]() {
    while (!failed.load(std::memory_order_relaxed)) {
      const std::int64_t c = next_chunk.fetch_add(1);
      if (c >= n_chunks) break;
      const std::int64_t lo = c * chunk_size;
      const std::int64_t hi = std::min(n_paths, lo + chunk_size);
      try {
        for (std::int64_t p = lo; p < hi; ++p) {
          path_fn(partials[static_cast<std::size_t>(c)], p);
        }
      } catch (...) {
        if (!failed.exchange(true)) first_error = std::current_exception();
        break;
      }
    }
  };

  const int n_threads =
      static_cast<int>(std::min<std::int64_t>(workers, n_chunks));
  if (n_threads <= 1) {
    run();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(n_threads));
    for (int w = 0; w < n_threads; ++w) pool.emplace_back(run);
    for (auto& t : pool) t.join();
  }
  if (failed.load()) std::rethrow_exception(first_error);

  Accum total = make();
  for (std::int64_t c = 0; c < n_chunks; ++c) {
    merge(total, partials[static_cast<std::size_t>(c)]);
  }
  return total;
}

}  // namespace hmmdual
