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

#pragma once

#include <cstdint>
#include <functional>
#include <vector>

namespace malpipe {

// Deterministic seeded generator. We roll the integer/real reductions by
// hand because std::uniform_*_distribution is implementation-defined and
// model bytes must be reproducible across standard libraries.
class Rng {
public:
  explicit Rng(uint64_t seed) : state_(seed) {}

  // splitmix64 step
  uint64_t next() {
    uint64_t z = (state_ += 0x9e3779b97f4a7c15ull);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
  }

  // Unbiased integer in [0, n). n must be > 0.
  uint64_t below(uint64_t n) {
    uint64_t x, r;
    do {
      x = next();
      r = x % n;
    } while (x - r > UINT64_MAX - (n - 1));
    return r;
  }

  // [0, 1) with 53 bits of precision.
  double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + uniform() * (hi - lo); }

  // Standard normal via Box-Muller (no state cached; second value discarded).
  double normal();

  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (size_t i = v.size(); i > 1; --i) {
      size_t j = static_cast<size_t>(below(i));
      std::swap(v[i - 1], v[j]);
    }
  }

  // k distinct values from [0, n), returned sorted ascending.
  std::vector<size_t> sample_without_replacement(size_t n, size_t k);

private:
  uint64_t state_;
};

// Stream-derivation for independent sub-generators (per class, per tree, ...).
uint64_t mix_seed(uint64_t seed, uint64_t stream);

namespace runtime {

// Worker budget: min(hardware_concurrency, MALPIPE_THREADS). At least 1.
int thread_count();

// Static block partition of [begin, end) over the worker budget. Each index
// is visited exactly once; callers must only write to index-owned slots so
// results never depend on the schedule.
void parallel_for(size_t begin, size_t end, const std::function<void(size_t)>& body);

}  // namespace runtime
}  // namespace malpipe
