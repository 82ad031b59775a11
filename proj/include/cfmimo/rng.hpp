// SPDX-License-Identifier: Apache-2.0
//
// cfmimo — uplink SE analysis for hardware-impaired cell-free massive MIMO
// with channel aging.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0

#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <random>

namespace cfmimo {

inline std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// Mixes a master seed with up to three stream indices. Streams derived from
// distinct (seed, a, b, c) tuples are independent for practical purposes, so
// Monte Carlo trials can be dispatched to threads in any order and still
// reproduce bit-identical results.
inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t a,
                                 std::uint64_t b = 0, std::uint64_t c = 0) {
  std::uint64_t s = seed;
  std::uint64_t h = splitmix64(s);
  s ^= a * 0xd1342543de82ef95ULL + 0x2545f4914f6cdd1dULL;
  h ^= splitmix64(s);
  s ^= b * 0x9e3779b97f4a7c15ULL + 0x1d8e4e27c47d124fULL;
  h ^= splitmix64(s);
  s ^= c * 0xa0761d6478bd642fULL + 0xe7037ed1a0b428dbULL;
  h ^= splitmix64(s);
  return h;
}

// One random stream. Each Monte Carlo trial owns its own stream so the
// trial->sample mapping is a pure function of (seed, trial index).
class RngStream {
 public:
  explicit RngStream(std::uint64_t seed) : gen_(seed) {}
  RngStream(std::uint64_t seed, std::uint64_t a, std::uint64_t b = 0,
            std::uint64_t c = 0)
      : gen_(derive_seed(seed, a, b, c)) {}

  double uniform() { return unif_(gen_); }

  // Uniform phase on [-pi, pi).
  double phase() { return (2.0 * unif_(gen_) - 1.0) * M_PI; }

  double normal() { return norm_(gen_); }

  // Circularly-symmetric complex normal with unit variance (0.5 per part).
  std::complex<double> cnormal() {
    static constexpr double kInvSqrt2 = 0.7071067811865475244;
    return {norm_(gen_) * kInvSqrt2, norm_(gen_) * kInvSqrt2};
  }

  std::mt19937_64& engine() { return gen_; }

 private:
  std::mt19937_64 gen_;
  std::uniform_real_distribution<double> unif_{0.0, 1.0};
  std::normal_distribution<double> norm_{0.0, 1.0};
};

// Compensated (Kahan) accumulator; shard merges reassociate sums, and the
// compensation keeps the result independent of merge order to ~1e-16.
struct KahanSum {
  double sum = 0.0;
  double comp = 0.0;

  void add(double x) {
    const double y = x - comp;
    const double t = sum + y;
    comp = (t - sum) - y;
    sum = t;
  }
  void merge(const KahanSum& o) {
    add(o.sum);
    add(-o.comp);
  }
  double value() const { return sum; }
};

}  // namespace cfmimo
