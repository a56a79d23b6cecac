/**
 * Copyright 2026 The earcough Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 * http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#ifndef EARCOUGH_RANDOM_HPP_
#define EARCOUGH_RANDOM_HPP_

#include <cstdint>
#include <initializer_list>
#include <random>
#include <vector>

namespace earcough {

using Rng = std::mt19937_64;

// Derives an independent stream from a base seed and a tuple of keys
// (window index, user id, ...). Identical inputs give identical streams
// regardless of call order.
inline Rng make_rng(std::uint64_t seed, std::initializer_list<std::uint64_t> keys = {}) {
  std::vector<std::uint32_t> words;
  words.reserve(2 + 2 * keys.size());
  words.push_back(static_cast<std::uint32_t>(seed));
  words.push_back(static_cast<std::uint32_t>(seed >> 32));
  for (std::uint64_t k : keys) {
    words.push_back(static_cast<std::uint32_t>(k));
    words.push_back(static_cast<std::uint32_t>(k >> 32));
  }
  std::seed_seq seq(words.begin(), words.end());
  return Rng(seq);
}

inline double uniform(Rng& rng, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

}  // namespace earcough

#endif  // EARCOUGH_RANDOM_HPP_
