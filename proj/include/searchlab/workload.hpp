/*
 * Copyright (c) 2026, The searchlab Authors.
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */
#pragma once

/// @file workload.hpp
/// @brief Deterministic build/lookup key generation.

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "searchlab/core_search.hpp"

namespace searchlab {

class generation_error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// SplitMix64: the i-th output is a fixed mix of seed + (i + 1) * golden
/// gamma, so streams are reproducible from the seed alone.
class SplitMix64 {
public:
    explicit constexpr SplitMix64(std::uint64_t seed) noexcept : state_(seed) {}

    static constexpr std::uint64_t mix(std::uint64_t z) noexcept {
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    constexpr std::uint64_t operator()() noexcept {
        state_ += 0x9e3779b97f4a7c15ULL;
        return mix(state_);
    }

    /// Uniform in [0, bound) by multiply-shift.
    constexpr std::uint64_t below(std::uint64_t bound) noexcept {
        return static_cast<std::uint64_t>((static_cast<unsigned __int128>((*this)()) * bound) >> 64);
    }

    /// Uniform in [0, 1).
    constexpr double unit() noexcept { return static_cast<double>((*this)() >> 11) * 0x1.0p-53; }

    /// Independent generator for sub-stream `stream`.
    [[nodiscard]] constexpr SplitMix64 split(std::uint64_t stream) const noexcept {
        return SplitMix64(mix(state_ ^ mix(stream + 0x632be59bd9b4e019ULL)));
    }

private:
    std::uint64_t state_;
};

enum class LookupOrder { random, sorted };

constexpr std::string_view to_string(LookupOrder o) noexcept { return o == LookupOrder::sorted ? "sorted" : "random"; }

template <search_key Key>
struct Workload {
    SortedKeys<Key> build_keys;
    std::vector<Key> lookup_keys;
    std::uint64_t seed = 0;
    LookupOrder order = LookupOrder::random;
    double hit_ratio = 1.0;
};

/// n unique uniform keys (sorted) and m lookups: a hit_ratio fraction drawn
/// uniformly from the build keys, the rest uniform over the keys not built.
template <search_key Key>
Workload<Key> generate_workload(std::size_t n, std::size_t m, std::uint64_t seed, LookupOrder order = LookupOrder::random,
                                double hit_ratio = 1.0) {
    if (n < 1 || m < 1) {
        throw usage_error("generate_workload: n and m must be >= 1");
    }
    if (!(hit_ratio >= 0.0 && hit_ratio <= 1.0)) {
        throw usage_error("generate_workload: hit_ratio must lie in [0, 1]");
    }
    constexpr auto domain_max = static_cast<std::uint64_t>(std::numeric_limits<Key>::max());
    if (sizeof(Key) < 8 && n - 1 > domain_max) {
        throw generation_error("generate_workload: n = " + std::to_string(n) + " exceeds the key domain");
    }

    const SplitMix64 root(seed);
    auto build_rng = root.split(0);
    std::vector<Key> build;
    build.reserve(n);
    while (build.size() < n) {
        const auto missing = n - build.size();
        for (std::size_t i = 0; i < missing; ++i) {
            build.push_back(static_cast<Key>(build_rng()));
        }
        std::sort(build.begin(), build.end());
        build.erase(std::unique(build.begin(), build.end()), build.end());
    }

    const bool domain_full = sizeof(Key) < 8 && n - 1 == domain_max;
    auto lookup_rng = root.split(1);
    std::vector<Key> lookups(m);
    for (auto& lookup : lookups) {
        if (lookup_rng.unit() < hit_ratio) {
            lookup = build[lookup_rng.below(n)];
            continue;
        }
        if (domain_full) {
            throw generation_error("generate_workload: no absent keys exist for a full key domain");
        }
        do {
            lookup = static_cast<Key>(lookup_rng());
        } while (std::binary_search(build.begin(), build.end(), lookup));
    }
    if (order == LookupOrder::sorted) {
        std::sort(lookups.begin(), lookups.end());
    }
    return {SortedKeys<Key>(std::move(build)), std::move(lookups), seed, order, hit_ratio};
}

/// FNV-1a over the little-endian bytes of a key stream.
template <search_key Key>
constexpr std::uint64_t stream_checksum(std::span<const Key> keys) noexcept {
    std::uint64_t hash = 0xcbf29ce484222325ULL;
    for (const auto key : keys) {
        auto value = static_cast<std::uint64_t>(key);
        for (std::size_t b = 0; b < sizeof(Key); ++b) {
            hash = (hash ^ (value & 0xff)) * 0x100000001b3ULL;
            value >>= 8;
        }
    }
    return hash;
}

}  // namespace searchlab
