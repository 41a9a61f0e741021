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

/// @file pinned_search.hpp
/// @brief Binary search with the first search steps served from a small
/// pinned buffer.
///
/// Every search path starts with the same few probes. The entries touched by
/// the first M steps sit at positions n - 1 - i * stride with
/// stride = S / 2^(M-1) (S being the initial step width), so they can be
/// copied into a compact buffer and searched there. The global search resumes
/// with step stride / 2 at the mapped offset.
///
/// Leftover slots hold a prefix (from the top of the array down) of the
/// entries probed by step M + 1; full-pinning consults them before touching
/// the main array.

#include <algorithm>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "searchlab/core_search.hpp"

namespace searchlab {

/// Slot count equivalent to 100 KB of keys.
template <search_key Key>
inline constexpr std::size_t default_pin_budget_slots = (100 * 1024) / sizeof(Key);

template <search_key Key>
class PinnedCache {
public:
    [[nodiscard]] std::span<const Key> cached_keys() const noexcept { return cached_keys_; }
    [[nodiscard]] std::span<const Key> cached_partial_keys() const noexcept { return cached_partial_keys_; }
    [[nodiscard]] std::size_t cache_step_size() const noexcept { return cache_step_size_; }
    [[nodiscard]] std::size_t pinned_steps() const noexcept { return pinned_steps_; }
    [[nodiscard]] std::size_t budget_slots() const noexcept { return budget_slots_; }
    /// Size of the array the cache was extracted from.
    [[nodiscard]] std::size_t source_size() const noexcept { return source_size_; }
    [[nodiscard]] std::size_t slots_used() const noexcept { return cached_keys_.size() + cached_partial_keys_.size(); }
    [[nodiscard]] std::size_t bytes() const noexcept { return slots_used() * sizeof(Key); }

    /// Main-array position held by cached_keys()[c].
    [[nodiscard]] std::size_t global_position(std::size_t c) const noexcept {
        return source_size_ - 1 - (cached_keys_.size() - 1 - c) * cache_step_size_;
    }

    /// Main-array position held by cached_partial_keys()[p].
    [[nodiscard]] std::size_t partial_global_position(std::size_t p) const noexcept {
        const auto rev = cached_partial_keys_.size() - 1 - p;
        return source_size_ - 1 - rev * cache_step_size_ - cache_step_size_ / 2;
    }

private:
    template <search_key K>
    friend PinnedCache<K> build_pinned_cache(const SortedKeys<K>& keys, std::size_t budget_slots);

    std::vector<Key> cached_keys_;
    std::vector<Key> cached_partial_keys_;
    std::size_t cache_step_size_ = 1;
    std::size_t pinned_steps_ = 0;
    std::size_t budget_slots_ = 0;
    std::size_t source_size_ = 0;
};

/// Number of entries probed within the first M steps (including the
/// never-probed top entry) for a given stride.
constexpr std::size_t pinned_entry_count(std::size_t n, std::size_t stride) noexcept {
    return (n - 1) / stride + 1;
}

/// Extracts the largest number of full search steps that fits budget_slots,
/// then fills the remaining slots with step M + 1 entries.
template <search_key Key>
PinnedCache<Key> build_pinned_cache(const SortedKeys<Key>& keys, std::size_t budget_slots) {
    if (budget_slots < 2) {
        throw config_error("build_pinned_cache: budget must hold at least 2 slots, got " +
                           std::to_string(budget_slots));
    }
    const auto n = keys.size();
    auto stride = lpow2(n);
    std::size_t steps = 1;
    while (stride > 1 && pinned_entry_count(n, stride / 2) <= budget_slots) {
        stride /= 2;
        ++steps;
    }

    PinnedCache<Key> cache;
    cache.cache_step_size_ = stride;
    cache.pinned_steps_ = steps;
    cache.budget_slots_ = budget_slots;
    cache.source_size_ = n;

    const auto full = pinned_entry_count(n, stride);
    cache.cached_keys_.resize(full);
    for (std::size_t i = 0; i < full; ++i) {
        cache.cached_keys_[full - 1 - i] = keys[n - 1 - i * stride];
    }

    const auto half = stride / 2;
    std::size_t partial = 0;
    if (half > 0 && n - 1 >= half) {
        partial = std::min(budget_slots - full, (n - 1 - half) / stride + 1);
    }
    cache.cached_partial_keys_.resize(partial);
    for (std::size_t i = 0; i < partial; ++i) {
        cache.cached_partial_keys_[partial - 1 - i] = keys[n - 1 - i * stride - half];
    }
    return cache;
}

/// Runs the cache-resident part of a pinned search and returns the cursor
/// from which the main-array search continues.
///
/// on_cached(c, step) reports reads of cached_keys()[c]; on_partial(p) reports
/// reads of cached_partial_keys()[p]. With use_partial == false this is the
/// steps-pinning variant.
template <search_key Key, class OnCached = ignore_probes, class OnPartial = ignore_probes>
SearchCursor pinned_prefix(const PinnedCache<Key>& cache, Key key, bool use_partial, OnCached&& on_cached = {},
                           OnPartial&& on_partial = {}) {
    const auto cached = cache.cached_keys();
    const auto last = cached.size() - 1;
    const auto c = search_from(cached, key, initial_cursor(cached.size()), on_cached);
    const auto rev = last - c;
    const auto stride = cache.cache_step_size();

    SearchCursor cursor{cache.source_size() - 1 - rev * stride, stride / 2};
    if (use_partial) {
        const auto partial = cache.cached_partial_keys();
        if (rev < partial.size()) {
            const auto p = partial.size() - 1 - rev;
            on_partial(p, cursor.step);
            if (partial[p] >= key) {
                cursor.offset -= cursor.step;
            }
            cursor.step >>= 1;
        }
    }
    return cursor;
}

/// Steps-pinning: first M steps in the cache, the rest on the main array.
template <search_key Key, class OnMain = ignore_probes>
std::size_t search_steps_pinned(const PinnedCache<Key>& cache, const SortedKeys<Key>& keys, Key key,
                                OnMain&& on_main = {}) {
    return search_from(keys.span(), key, pinned_prefix(cache, key, false), on_main);
}

/// Full-pinning: additionally serves the step M + 1 probe from the partial
/// slots when its position was cached.
template <search_key Key, class OnMain = ignore_probes>
std::size_t search_full_pinned(const PinnedCache<Key>& cache, const SortedKeys<Key>& keys, Key key,
                               OnMain&& on_main = {}) {
    return search_from(keys.span(), key, pinned_prefix(cache, key, true), on_main);
}

}  // namespace searchlab
