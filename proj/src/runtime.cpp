// Copyright 2026 The Malpipe Authors. All Rights Reserved.
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//     http://www.apache.org/licenses/LICENSE-2.0
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "malpipe/runtime.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <numeric>
#include <thread>

namespace malpipe {

double Rng::normal() {
  double u1 = 1.0 - uniform();  // (0, 1]
  double u2 = uniform();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
}

std::vector<size_t> Rng::sample_without_replacement(size_t n, size_t k) {
  std::vector<size_t> pool(n);
  std::iota(pool.begin(), pool.end(), size_t{0});
  // partial Fisher-Yates: draw into the front of the pool
  for (size_t i = 0; i < k; ++i) {
    size_t j = i + static_cast<size_t>(below(n - i));
    std::swap(pool[i], pool[j]);
  }
  pool.resize(k);
  std::sort(pool.begin(), pool.end());
  return pool;
}

uint64_t mix_seed(uint64_t seed, uint64_t stream) {
  uint64_t z = seed + 0x9e3779b97f4a7c15ull * (stream + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

namespace runtime {

int thread_count() {
  static const int cached = [] {
    int n = static_cast<int>(std::thread::hardware_concurrency());
    if (n < 1) n = 1;
    if (const char* env = std::getenv("MALPIPE_THREADS")) {
      char* end = nullptr;
      long v = std::strtol(env, &end, 10);
      if (end != env && *end == '\0' && v >= 1 && v <= 1024) n = static_cast<int>(v);
    }
    return n;
  }();
  return cached;
}

void parallel_for(size_t begin, size_t end, const std::function<void(size_t)>& body) {
  if (end <= begin) return;
  const size_t count = end - begin;
  const size_t workers = std::min<size_t>(static_cast<size_t>(thread_count()), count);
  if (workers <= 1) {
    for (size_t i = begin; i < end; ++i) body(i);
    return;
  }
  std::vector<std::thread> threads;
  threads.reserve(workers);
  const size_t chunk = (count + workers - 1) / workers;
  for (size_t w = 0; w < workers; ++w) {
    const size_t lo = begin + w * chunk;
    const size_t hi = std::min(end, lo + chunk);
    if (lo >= hi) break;
    threads.emplace_back([lo, hi, &body] {
      for (size_t i = lo; i < hi; ++i) body(i);
    });
  }
  for (auto& t : threads) t.join();
}

}  // namespace runtime
}  // namespace malpipe
