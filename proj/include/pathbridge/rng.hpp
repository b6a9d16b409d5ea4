/*
 * Copyright 2026 The pathbridge Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <utility>

namespace pathbridge {

// The engine is fully specified by the standard; the distributions in
// <random> are not, so bounded draws go through the helpers below to keep
// output identical across standard library implementations.
using Rng = std::mt19937_64;

// splitmix64 finalizer over (seed, stream). Used to derive independent
// per-worker, per-instance and per-chunk seeds.
uint64_t MixSeed(uint64_t seed, uint64_t stream);

// Uniform integer in [0, n) by rejection sampling. n must be > 0.
uint64_t UniformIndex(Rng& rng, uint64_t n);

// Uniform double in [0, 1) with 53 bits of precision.
double UniformUnit(Rng& rng);

// Fisher-Yates using UniformIndex.
template <typename T>
void Shuffle(std::span<T> items, Rng& rng) {
  for (size_t i = items.size(); i > 1; --i) {
    const size_t j = static_cast<size_t>(UniformIndex(rng, i));
    using std::swap;
    swap(items[i - 1], items[j]);
  }
}

}  // namespace pathbridge
