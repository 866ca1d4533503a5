// Copyright 2026 The cvreg Authors. All Rights Reserved.
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

// Platform-stable random numbers. std::mt19937_64 output is fixed by the
// standard but the std distributions are not, so values are derived from
// raw engine output here.

#ifndef CVREG_RANDOM_HPP_
#define CVREG_RANDOM_HPP_

#include <cstdint>
#include <random>

namespace cvreg {

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Child seed for (master, index, stream); serial and parallel runs derive
// identical seeds.
inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index,
                                 std::uint64_t stream = 0) {
  return splitmix64(master ^ splitmix64(index * 0x100000001b3ULL + stream));
}

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(splitmix64(seed)) {}

  std::uint64_t next() { return engine_(); }

  // Uniform in [0, 1).
  double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  // Uniform in (0, 1].
  double uniform_open_closed() { return 1.0 - uniform(); }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Uniform integer in [lo, hi].
  std::int64_t uniform_int(std::int64_t lo, std::int64_t hi) {
    __extension__ using u128 = unsigned __int128;
    const auto range = static_cast<u128>(static_cast<std::uint64_t>(hi - lo)) + 1;
    const auto scaled = (static_cast<u128>(next()) * range) >> 64;
    return lo + static_cast<std::int64_t>(scaled);
  }

  bool bernoulli(double p) { return uniform() < p; }

 private:
  std::mt19937_64 engine_;
};

}  // namespace cvreg

#endif  // CVREG_RANDOM_HPP_
