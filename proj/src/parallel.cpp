#include "sphwce/parallel.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <mutex>
#include <thread>

namespace sphwce::parallel {

namespace {
std::atomic<unsigned> g_max_threads{0};

double tree_sum_range(const std::vector<double>& v, std::size_t lo, std::size_t hi) {
  if (hi - lo == 1) return v[lo];
  const std::size_t mid = lo + (hi - lo) / 2;
  return tree_sum_range(v, lo, mid) + tree_sum_range(v, mid, hi);
}

void tree_sum_arrays(const std::vector<std::vector<double>>& v, std::size_t lo, std::size_t hi,
                     std::vector<double>& out) {
  if (hi - lo == 1) {
    out = v[lo];
    return;
  }
  const std::size_t mid = lo + (hi - lo) / 2;
  std::vector<double> right;
  tree_sum_arrays(v, lo, mid, out);
  tree_sum_arrays(v, mid, hi, right);
  for (std::size_t k = 0; k < out.size(); ++k) out[k] += right[k];
}
}  // namespace

void set_max_threads(unsigned n) { g_max_threads.store(n); }

unsigned max_threads() {
  const unsigned n = g_max_threads.load();
  if (n != 0) return n;
  return std::max(1u, std::thread::hardware_concurrency());
}

void for_blocks(std::size_t n_blocks, const std::function<void(std::size_t)>& body) {
  const std::size_t workers = std::min<std::size_t>(max_threads(), n_blocks);
  if (workers <= 1) {
    for (std::size_t b = 0; b < n_blocks; ++b) body(b);
    return;
  }

  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto run = [&] {
    for (;;) {
      const std::size_t b = next.fetch_add(1);
      if (b >= n_blocks) return;
      try {
        body(b);
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
        next.store(n_blocks);
      }
    }
  };

  std::vector<std::thread> pool;
  pool.reserve(workers - 1);
  for (std::size_t w = 1; w < workers; ++w) pool.emplace_back(run);
  run();
  for (auto& th : pool) th.join();
  if (failure) std::rethrow_exception(failure);
}

double tree_sum(const std::vector<double>& partials) {
  if (partials.empty()) return 0.0;
  return tree_sum_range(partials, 0, partials.size());
}

std::vector<double> tree_sum(const std::vector<std::vector<double>>& partials) {
  std::vector<double> out;
  if (partials.empty()) return out;
  tree_sum_arrays(partials, 0, partials.size(), out);
  return out;
}

}  // namespace sphwce::parallel
