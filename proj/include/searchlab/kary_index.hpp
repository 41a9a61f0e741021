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

/// @file kary_index.hpp
/// @brief Pointer-free K-ary search over a sorted array.
///
/// The base array is split into leaf ranges of leaf_chunk entries. Each
/// internal level groups K ranges of the level below into one node and stores
/// the K - 1 chunk maxima of that node densely, so a node occupies K - 1
/// consecutive slots of its level array. Node m at level d has its chunk j
/// child at index m * K + j of level d + 1. Only nodes that cover at least one
/// base entry are stored; missing separators of ragged nodes hold the largest
/// key value.

#include <algorithm>
#include <cstddef>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "searchlab/core_search.hpp"

namespace searchlab {

inline constexpr std::size_t default_kary_fanout = 17;
inline constexpr std::size_t default_leaf_chunk = 32;

template <search_key Key>
class KaryIndex {
public:
    static constexpr Key sentinel = std::numeric_limits<Key>::max();

    /// The leaf layer. Must outlive the index.
    [[nodiscard]] const SortedKeys<Key>& base() const noexcept { return *base_; }
    [[nodiscard]] std::size_t fanout() const noexcept { return fanout_; }
    [[nodiscard]] std::size_t leaf_chunk() const noexcept { return leaf_chunk_; }
    [[nodiscard]] std::size_t depth() const noexcept { return levels_.size(); }
    [[nodiscard]] std::span<const Key> level(std::size_t d) const noexcept { return levels_[d]; }

    /// Number of base entries covered by one node at level d; level depth()
    /// denotes the leaf ranges.
    [[nodiscard]] std::size_t node_span(std::size_t d) const noexcept { return node_spans_[d]; }

    [[nodiscard]] std::size_t separator_count() const noexcept {
        std::size_t total = 0;
        for (const auto& level : levels_) {
            total += level.size();
        }
        return total;
    }

    [[nodiscard]] std::size_t bytes() const noexcept { return separator_count() * sizeof(Key); }

    /// Overwrites one stored separator. Exists only so verification tooling
    /// can check that a corrupted index is detected.
    void inject_separator_fault_for_testing(std::size_t d, std::size_t slot, Key value) {
        levels_.at(d).at(slot) = value;
    }

private:
    template <search_key K>
    friend KaryIndex<K> build_kary(const SortedKeys<K>& keys, std::size_t fanout, std::size_t leaf_chunk);

    const SortedKeys<Key>* base_ = nullptr;
    std::size_t fanout_ = 0;
    std::size_t leaf_chunk_ = 0;
    std::vector<std::vector<Key>> levels_;
    std::vector<std::size_t> node_spans_;
};

template <search_key Key>
KaryIndex<Key> build_kary(const SortedKeys<Key>& keys, std::size_t fanout = default_kary_fanout,
                          std::size_t leaf_chunk = default_leaf_chunk) {
    if (fanout < 2) {
        throw config_error("build_kary: fan-out must be >= 2, got " + std::to_string(fanout));
    }
    if (leaf_chunk < 1) {
        throw config_error("build_kary: leaf chunk must be >= 1");
    }
    const auto n = keys.size();

    // Node counts, bottom level first.
    std::vector<std::size_t> counts;
    for (auto ranges = (n + leaf_chunk - 1) / leaf_chunk; ranges > 1;) {
        ranges = (ranges + fanout - 1) / fanout;
        counts.push_back(ranges);
    }
    const auto depth = counts.size();

    KaryIndex<Key> index;
    index.base_ = &keys;
    index.fanout_ = fanout;
    index.leaf_chunk_ = leaf_chunk;
    index.levels_.resize(depth);
    index.node_spans_.assign(depth + 1, leaf_chunk);
    for (std::size_t d = depth; d-- > 0;) {
        index.node_spans_[d] = index.node_spans_[d + 1] * fanout;
    }

    const auto width = fanout - 1;
    for (std::size_t up = 0; up < depth; ++up) {
        const auto d = depth - 1 - up;
        const auto nodes = counts[up];
        const auto chunk = index.node_spans_[d + 1];
        auto& level = index.levels_[d];
        level.assign(nodes * width, KaryIndex<Key>::sentinel);
        for (std::size_t m = 0; m < nodes; ++m) {
            const auto begin = m * index.node_spans_[d];
            for (std::size_t j = 0; j < width; ++j) {
                const auto chunk_begin = begin + j * chunk;
                if (chunk_begin >= n) {
                    break;
                }
                level[m * width + j] = keys[std::min(chunk_begin + chunk, n) - 1];
            }
        }
    }
    return index;
}

/// Descends through the separator levels and returns the first base index of
/// the leaf range that holds the lower bound of key (or the last leaf range
/// when key exceeds every entry). on_level(d, first_slot, width) reports each
/// node read.
template <search_key Key, class OnLevel = ignore_probes>
std::size_t kary_descend(const KaryIndex<Key>& index, Key key, OnLevel&& on_level = {}) {
    const auto n = index.base().size();
    const auto fanout = index.fanout();
    const auto width = fanout - 1;

    std::size_t node = 0;
    std::size_t begin = 0;
    for (std::size_t d = 0; d < index.depth(); ++d) {
        const auto first = node * width;
        const auto separators = index.level(d).subspan(first, width);
        on_level(d, first, width);
        std::size_t j = 0;
        for (const auto separator : separators) {
            j += separator < key ? 1 : 0;
        }
        // Chunks past the end of the array only exist as sentinel padding.
        const auto chunk = index.node_span(d + 1);
        const auto populated = (std::min(begin + index.node_span(d), n) - begin + chunk - 1) / chunk;
        j = std::min(j, populated - 1);
        begin += j * chunk;
        node = node * fanout + j;
    }
    return begin;
}

/// Number of base entries in the leaf range starting at begin.
template <search_key Key>
std::size_t kary_leaf_size(const KaryIndex<Key>& index, std::size_t begin) noexcept {
    return std::min(index.leaf_chunk(), index.base().size() - begin);
}

/// K-ary descent followed by offset_search on one leaf range. The result
/// matches offset_search over the whole base array. on_main(position, step)
/// reports base-array probes.
template <search_key Key, class OnLevel = ignore_probes, class OnMain = ignore_probes>
std::size_t kary_search(const KaryIndex<Key>& index, Key key, OnLevel&& on_level = {}, OnMain&& on_main = {}) {
    const auto begin = kary_descend(index, key, on_level);
    const auto leaf = index.base().span().subspan(begin, kary_leaf_size(index, begin));
    const auto local = search_from(leaf, key, initial_cursor(leaf.size()),
                                   [&](std::size_t position, std::size_t step) { on_main(begin + position, step); });
    return begin + local;
}

/// Separator entries (sentinel padding included) per base entry.
template <search_key Key>
double kary_overhead(const KaryIndex<Key>& index) {
    return static_cast<double>(index.separator_count()) / static_cast<double>(index.base().size());
}

}  // namespace searchlab
