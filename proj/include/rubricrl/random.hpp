// Copyright 2026 The rubricrl Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.


// Seeded randomness that is identical on every platform. Standard library
// distributions are implementation-defined, so only the raw engine output is
// used.

#ifndef RUBRICRL_RANDOM_HPP_
#define RUBRICRL_RANDOM_HPP_

#include <cstdint>
#include <initializer_list>
#include <random>
#include <vector>

namespace rubricrl {

constexpr uint64_t SplitMix64(uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Folds a tuple of keys into one seed, e.g. (seed, step, task, phase).
inline uint64_t StreamSeed(std::initializer_list<uint64_t> keys) {
  uint64_t h = 0x5851f42d4c957f2dULL;
  for (uint64_t k : keys) h = SplitMix64(h ^ SplitMix64(k));
  return h;
}

class Rng {
 public:
  explicit Rng(uint64_t seed) : engine_(seed) {}
  Rng(std::initializer_list<uint64_t> keys) : engine_(StreamSeed(keys)) {}

  uint64_t Next() { return engine_(); }

  // Uniform on [0, 1) with 53 random bits.
  double Uniform() { return double(engine_() >> 11) * 0x1.0p-53; }

  bool Bernoulli(double p) { return Uniform() < p; }

  // Uniform on [0, n) by multiply-shift. The bias is below n / 2^64.
  uint64_t Below(uint64_t n) {
    return uint64_t((unsigned __int128)engine_() * n >> 64);
  }

  // Index drawn proportionally to non-negative weights.
  size_t Weighted(const std::vector<double>& weights) {
    double total = 0.0;
    for (double w : weights) total += w;
    double u = Uniform() * total;
    for (size_t i = 0; i < weights.size(); ++i) {
      if (u < weights[i]) return i;
      u -= weights[i];
    }
    return weights.size() - 1;
  }

  // Fisher-Yates; the first k entries form a uniform k-subset.
  template <typename T>
  void Shuffle(std::vector<T>& v) {
    for (size_t i = v.size(); i > 1; --i) std::swap(v[i - 1], v[Below(i)]);
  }

 private:
  std::mt19937_64 engine_;
};

}  // namespace rubricrl

#endif  // RUBRICRL_RANDOM_HPP_
