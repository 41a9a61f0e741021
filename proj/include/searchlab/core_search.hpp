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

/// @file core_search.hpp
/// @brief Offset-based binary search over a sorted dense array.
///
/// The search walks from the last entry towards the first using power-of-two
/// steps that halve every iteration. A step is taken when the entry it lands
/// on is not smaller than the lookup key, so the terminating offset is the
/// first entry >= key (or n - 1 when every entry is smaller).

#include <bit>
#include <concepts>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace searchlab {

/// Invalid structural parameters (budgets, fan-outs, batch sizes).
class config_error : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Mismatched arguments at a call site.
class usage_error : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

template <class Key>
concept search_key = std::unsigned_integral<Key> && (sizeof(Key) == 4 || sizeof(Key) == 8);

/// Owned, non-decreasing, non-empty array of keys. Duplicates are allowed.
template <search_key Key>
class SortedKeys {
public:
    using key_type = Key;

    explicit SortedKeys(std::vector<Key> keys) : keys_(std::move(keys)) {
        if (keys_.empty()) {
            throw config_error("SortedKeys: empty key array");
        }
        for (std::size_t i = 1; i < keys_.size(); ++i) {
            if (keys_[i - 1] > keys_[i]) {
                throw config_error("SortedKeys: keys not sorted at index " + std::to_string(i));
            }
        }
    }

    [[nodiscard]] std::size_t size() const noexcept { return keys_.size(); }
    [[nodiscard]] Key operator[](std::size_t i) const noexcept { return keys_[i]; }
    [[nodiscard]] std::span<const Key> span() const noexcept { return keys_; }
    [[nodiscard]] const Key* data() const noexcept { return keys_.data(); }
    [[nodiscard]] Key front() const noexcept { return keys_.front(); }
    [[nodiscard]] Key back() const noexcept { return keys_.back(); }
    [[nodiscard]] std::size_t bytes() const noexcept { return keys_.size() * sizeof(Key); }

private:
    std::vector<Key> keys_;
};

/// Largest power of two not greater than n.
constexpr std::size_t lpow2(std::size_t n) {
    if (n == 0) {
        throw std::domain_error("lpow2: argument must be positive");
    }
    return std::bit_floor(n);
}

/// Position and step width of a running search.
struct SearchCursor {
    std::size_t offset = 0;
    std::size_t step = 0;

    friend bool operator==(const SearchCursor&, const SearchCursor&) = default;
};

/// Probe sink that discards everything.
struct ignore_probes {
    template <class... Args>
    constexpr void operator()(Args&&...) const noexcept {}
};

/// Runs the halving-step loop from an arbitrary cursor. Every read of
/// keys[offset - step] is reported to on_probe(position, step).
template <search_key Key, class OnProbe = ignore_probes>
constexpr std::size_t search_from(std::span<const Key> keys, Key key, SearchCursor cursor,
                                  OnProbe&& on_probe = {}) {
    auto offset = cursor.offset;
    for (auto step = cursor.step; step > 0; step >>= 1) {
        if (step <= offset) {
            const auto probe = offset - step;
            on_probe(probe, step);
            if (keys[probe] >= key) {
                offset = probe;
            }
        }
    }
    return offset;
}

/// Initial cursor for a search over n entries.
constexpr SearchCursor initial_cursor(std::size_t n) { return {n - 1, lpow2(n)}; }

template <search_key Key, class OnProbe = ignore_probes>
constexpr std::size_t offset_search(std::span<const Key> keys, Key key, OnProbe&& on_probe = {}) {
    return search_from(keys, key, initial_cursor(keys.size()), std::forward<OnProbe>(on_probe));
}

/// Index of the first entry >= key; n - 1 when key exceeds the maximum.
template <search_key Key>
std::size_t offset_search(const SortedKeys<Key>& keys, Key key) {
    return offset_search(keys.span(), key);
}

/// Maps a clamped search result onto [0, n] lower-bound semantics.
template <search_key Key>
constexpr std::size_t resolve_lower_bound(std::span<const Key> keys, Key key, std::size_t offset) noexcept {
    return keys[offset] >= key ? offset : keys.size();
}

/// Maps a clamped search result onto membership semantics.
template <search_key Key>
constexpr std::optional<std::size_t> resolve_find(std::span<const Key> keys, Key key, std::size_t offset) noexcept {
    if (keys[offset] == key) {
        return offset;
    }
    return std::nullopt;
}

template <search_key Key>
std::size_t lower_bound(const SortedKeys<Key>& keys, Key key) {
    return resolve_lower_bound(keys.span(), key, offset_search(keys, key));
}

template <search_key Key>
std::optional<std::size_t> find(const SortedKeys<Key>& keys, Key key) {
    return resolve_find(keys.span(), key, offset_search(keys, key));
}

/// The exact sequence of indices read by offset_search.
template <search_key Key>
std::vector<std::size_t> probe_positions(const SortedKeys<Key>& keys, Key key) {
    std::vector<std::size_t> probes;
    offset_search(keys.span(), key, [&](std::size_t position, std::size_t) { probes.push_back(position); });
    return probes;
}

}  // namespace searchlab
