#include "otl/parallel.hpp"

#include <algorithm>
#include <atomic>
#include <thread>

namespace otl {

namespace {
std::atomic<int> g_threads{1};
}

void set_num_threads(int n) {
  if (n <= 0) {
    n = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  }
  g_threads.store(n);
}

int num_threads() { return g_threads.load(); }

void parallel_chunks(std::size_t n,
                     const std::function<void(std::size_t, std::size_t, std::size_t)>& body) {
  const std::size_t n_chunks = (n + kChunkSize - 1) / kChunkSize;
  const auto run = [&](std::size_t c) {
    const std::size_t b = c * kChunkSize;
    body(b, std::min(n, b + kChunkSize), c);
  };
  const std::size_t workers = std::min<std::size_t>(static_cast<std::size_t>(num_threads()), n_chunks);
  if (workers <= 1) {
    for (std::size_t c = 0; c < n_chunks; ++c) run(c);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::jthread> pool;
  pool.reserve(workers);
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (std::size_t c = next++; c < n_chunks; c = next++) run(c);
    });
  }
}

double deterministic_sum(std::size_t n, const std::function<double(std::size_t)>& term) {
  const std::size_t n_chunks = (n + kChunkSize - 1) / kChunkSize;
  std::vector<double> partial(n_chunks, 0.0);
  parallel_chunks(n, [&](std::size_t b, std::size_t e, std::size_t c) {
    double s = 0.0;
    for (std::size_t i = b; i < e; ++i) s += term(i);
    partial[c] = s;
  });
  double total = 0.0;
  for (double s : partial) total += s;
  return total;
}

} // namespace otl
