#include "posit/train/parallel.hpp"

#include <atomic>
#include <cstdlib>
#include <string>
#include <thread>
#include <vector>

namespace posit::train {

namespace {

std::atomic<int> g_override{0};

int env_threads() {
  const char* v = std::getenv("POSIT_TRAIN_THREADS");
  if (v == nullptr) {
    return 1;
  }
  try {
    return std::max(1, std::stoi(v));
  } catch (const std::exception&) {
    return 1;
  }
}

}  // namespace

int thread_count() {
  const int o = g_override.load();
  if (o > 0) {
    return o;
  }
  static const int from_env = env_threads();
  return from_env;
}

void set_thread_count(int threads) { g_override.store(threads > 0 ? threads : 0); }

void parallel_for(std::size_t begin, std::size_t end, const std::function<void(std::size_t)>& body) {
  if (end <= begin) {
    return;
  }
  const std::size_t total = end - begin;
  const auto workers = std::min<std::size_t>(static_cast<std::size_t>(thread_count()), total);
  if (workers <= 1) {
    for (std::size_t i = begin; i < end; ++i) {
      body(i);
    }
    return;
  }
  const std::size_t chunk = (total + workers - 1) / workers;
  std::vector<std::jthread> pool;
  pool.reserve(workers - 1);
  for (std::size_t w = 1; w < workers; ++w) {
    const std::size_t lo = begin + w * chunk;
    const std::size_t hi = std::min(end, lo + chunk);
    pool.emplace_back([lo, hi, &body] {
      for (std::size_t i = lo; i < hi; ++i) {
        body(i);
      }
    });
  }
  for (std::size_t i = begin; i < std::min(end, begin + chunk); ++i) {
    body(i);
  }
}

}  // namespace posit::train
