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

#include <atomic>
#include <cstddef>
#include <thread>
#include <vector>

namespace cfmimo {

// Runs fn(shard_index) for shard_index in [0, num_shards). Shards are claimed
// from an atomic counter, so thread scheduling never changes which work lands
// in which shard; callers merge per-shard results in shard order to stay
// deterministic for any thread count.
template <typename Fn>
void parallel_shards(std::size_t num_shards, unsigned threads, Fn&& fn) {
  if (threads <= 1 || num_shards <= 1) {
    for (std::size_t s = 0; s < num_shards; ++s) fn(s);
    return;
  }
  std::atomic<std::size_t> next{0};
  auto worker = [&]() {
    for (;;) {
      const std::size_t s = next.fetch_add(1);
      if (s >= num_shards) return;
      fn(s);
    }
  };
  std::vector<std::thread> pool;
  const unsigned n = std::min<std::size_t>(threads, num_shards);
  pool.reserve(n);
  for (unsigned t = 0; t < n; ++t) pool.emplace_back(worker);
  for (auto& th : pool) th.join();
}

}  // namespace cfmimo
