// SPDX-License-Identifier: Apache-2.0
//
// astars: active STAR-RIS ISAC link-level simulator and optimizer
// Copyright (C) 2026 The astars authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// ------------------------------------------------------------------------

#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>

namespace astars {

inline std::uint64_t splitmix64(std::uint64_t x)
{
    x += 0x9E3779B97F4A7C15ull;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
    return x ^ (x >> 31);
}

/// Link identifiers used to key independent random streams.
enum class StreamId : std::uint64_t {
    bs_surface = 1,
    surface_target = 2,
    bs_user = 3,
    surface_user = 4,
    surface_init = 5,
    echo_noise = 6,
    data_bits = 7,
    link_noise = 8,
    misc = 9,
};

/// Random stream keyed by a seed and a path of integers (trial, link, subcarrier, ...).
/// Streams with different keys are independent of the order in which they are created.
class RngStream {
  public:
    RngStream(std::uint64_t seed, std::initializer_list<std::uint64_t> key) : engine_(derive(seed, key)) {}
    explicit RngStream(std::uint64_t seed) : engine_(splitmix64(seed)) {}

    double uniform() { return std::uniform_real_distribution<double>(0.0, 1.0)(engine_); }
    double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(engine_); }
    double normal() { return std::normal_distribution<double>(0.0, 1.0)(engine_); }
    std::uint64_t bits() { return engine_(); }

    std::mt19937_64& engine() { return engine_; }

    static std::uint64_t derive(std::uint64_t seed, std::initializer_list<std::uint64_t> key)
    {
        std::uint64_t h = splitmix64(seed);
        for (auto k : key) h = splitmix64(h ^ splitmix64(k + 0x632BE59BD9B4E019ull));
        return h;
    }

  private:
    std::mt19937_64 engine_;
};

inline std::uint64_t key(StreamId id) { return static_cast<std::uint64_t>(id); }

}  // namespace astars
