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

/// @file batch_engine.hpp
/// @brief Batched lookup pipeline: block-local sorting, search, and result
/// restoration under static or dynamic scheduling.

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <cstdint>
#include <cstdlib>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <thread>
#include <utility>
#include <vector>

#include "searchlab/core_search.hpp"
#include "searchlab/kary_index.hpp"
#include "searchlab/pinned_search.hpp"

namespace searchlab {

enum class Variant { naive, steps_pinned, full_pinned, kary };
enum class Schedule { static_contiguous, static_strided, dynamic };
enum class Reorder { none, lookup, full };

inline constexpr Variant all_variants[] = {Variant::naive, Variant::steps_pinned, Variant::full_pinned,
                                           Variant::kary};
inline constexpr Schedule all_schedules[] = {Schedule::static_contiguous, Schedule::static_strided,
                                             Schedule::dynamic};
inline constexpr Reorder all_reorders[] = {Reorder::none, Reorder::lookup, Reorder::full};

constexpr std::string_view to_string(Variant v) noexcept {
    switch (v) {
        case Variant::naive: return "naive";
        case Variant::steps_pinned: return "steps-pinned";
        case Variant::full_pinned: return "full-pinned";
        case Variant::kary: return "kary";
    }
    return "?";
}

constexpr std::string_view to_string(Schedule s) noexcept {
    switch (s) {
        case Schedule::static_contiguous: return "static-contiguous";
        case Schedule::static_strided: return "static-strided";
        case Schedule::dynamic: return "dynamic";
    }
    return "?";
}

constexpr std::string_view to_string(Reorder r) noexcept {
    switch (r) {
        case Reorder::none: return "none";
        case Reorder::lookup: return "lookup";
        case Reorder::full: return "full";
    }
    return "?";
}

template <class Enum, std::size_t N>
constexpr std::optional<Enum> parse_enum(std::string_view text, const Enum (&values)[N]) noexcept {
    for (const auto v : values) {
        if (to_string(v) == text) {
            return v;
        }
    }
    return std::nullopt;
}

/// Worker count used when none is configured: SEARCHLAB_THREADS if set to a
/// positive integer, else the number of logical cores.
inline std::size_t default_workers() {
    if (const char* env = std::getenv("SEARCHLAB_THREADS")) {
        char* end = nullptr;
        const auto value = std::strtoull(env, &end, 10);
        if (end != env && *end == '\0' && value > 0) {
            return static_cast<std::size_t>(value);
        }
    }
    return std::max(1u, std::thread::hardware_concurrency());
}

struct ExecConfig {
    std::size_t workers = default_workers();
    /// Lookups sorted together as one group.
    std::size_t sort_batch = 1024;
    /// Lookups searched in lock-step by one worker.
    std::size_t stage_per_worker = 8;
    Schedule schedule = Schedule::static_contiguous;
    Reorder reorder = Reorder::none;
    Variant variant = Variant::naive;

    void validate() const {
        if (workers < 1) {
            throw config_error("ExecConfig: workers must be >= 1");
        }
        if (sort_batch < 1 || stage_per_worker < 1) {
            throw config_error("ExecConfig: sort_batch and stage_per_worker must be >= 1");
        }
        if (sort_batch % stage_per_worker != 0) {
            throw config_error("ExecConfig: sort_batch (" + std::to_string(sort_batch) +
                               ") must be a multiple of stage_per_worker (" + std::to_string(stage_per_worker) + ")");
        }
        if (sort_batch > std::numeric_limits<std::uint32_t>::max()) {
            throw config_error("ExecConfig: sort_batch too large");
        }
    }
};

/// One result slot per lookup: the index of the matching key, or absent_result.
using ResultSlot = std::uint64_t;
inline constexpr ResultSlot absent_result = std::numeric_limits<ResultSlot>::max();

/// Sort order of a batch: forward()[p] is the original slot of the p-th
/// smallest lookup.
class Permutation {
public:
    Permutation() = default;

    static Permutation identity(std::size_t n) {
        Permutation perm;
        perm.forward_.resize(n);
        for (std::size_t i = 0; i < n; ++i) {
            perm.forward_[i] = static_cast<std::uint32_t>(i);
        }
        return perm;
    }

    /// Throws usage_error unless forward is a bijection on [0, size).
    static Permutation from_forward(std::vector<std::uint32_t> forward) {
        std::vector<bool> seen(forward.size(), false);
        for (const auto f : forward) {
            if (f >= forward.size() || seen[f]) {
                throw usage_error("Permutation: not a bijection");
            }
            seen[f] = true;
        }
        Permutation perm;
        perm.forward_ = std::move(forward);
        return perm;
    }

    [[nodiscard]] std::size_t size() const noexcept { return forward_.size(); }
    [[nodiscard]] std::span<const std::uint32_t> forward() const noexcept { return forward_; }

    [[nodiscard]] Permutation inverse() const {
        Permutation inv;
        inv.forward_.resize(forward_.size());
        for (std::size_t p = 0; p < forward_.size(); ++p) {
            inv.forward_[forward_[p]] = static_cast<std::uint32_t>(p);
        }
        return inv;
    }

    friend bool operator==(const Permutation&, const Permutation&) = default;

private:
    template <search_key K>
    friend void block_sort_into(std::span<const K>, std::vector<K>&, Permutation&,
                                std::vector<std::pair<K, std::uint32_t>>&);

    std::vector<std::uint32_t> forward_;
};

/// Sorts a batch and records the permutation; ties keep their original order.
/// The scratch buffer is reused across calls.
template <search_key Key>
void block_sort_into(std::span<const Key> batch, std::vector<Key>& sorted, Permutation& perm,
                     std::vector<std::pair<Key, std::uint32_t>>& scratch) {
    scratch.resize(batch.size());
    for (std::size_t i = 0; i < batch.size(); ++i) {
        scratch[i] = {batch[i], static_cast<std::uint32_t>(i)};
    }
    std::sort(scratch.begin(), scratch.end());
    sorted.resize(batch.size());
    perm.forward_.resize(batch.size());
    for (std::size_t p = 0; p < scratch.size(); ++p) {
        sorted[p] = scratch[p].first;
        perm.forward_[p] = scratch[p].second;
    }
}

template <search_key Key>
std::pair<std::vector<Key>, Permutation> block_sort(std::span<const Key> batch) {
    if (batch.empty()) {
        throw usage_error("block_sort: empty batch");
    }
    std::vector<Key> sorted;
    Permutation perm;
    std::vector<std::pair<Key, std::uint32_t>> scratch;
    block_sort_into(batch, sorted, perm, scratch);
    return {std::move(sorted), std::move(perm)};
}

/// Writes results[p] to out[forward[p]].
template <class T>
void unsort_into(std::span<const T> results, const Permutation& perm, std::span<T> out) {
    if (results.size() != perm.size() || out.size() != perm.size()) {
        throw usage_error("unsort: length mismatch between results and permutation");
    }
    const auto forward = perm.forward();
    for (std::size_t p = 0; p < results.size(); ++p) {
        out[forward[p]] = results[p];
    }
}

template <class T>
std::vector<T> unsort(std::span<const T> results, const Permutation& perm) {
    std::vector<T> out(results.size());
    unsort_into(results, perm, std::span<T>(out));
    return out;
}

/// A sorted array plus whichever auxiliary structures have been built over
/// it. The keys must outlive this object.
template <search_key Key>
class SearchStructures {
public:
    explicit SearchStructures(const SortedKeys<Key>& keys) : keys_(&keys) {}

    SearchStructures& build_pinned(std::size_t budget_slots = default_pin_budget_slots<Key>) {
        pinned_ = build_pinned_cache(*keys_, budget_slots);
        return *this;
    }

    SearchStructures& build_kary(std::size_t fanout = default_kary_fanout,
                                 std::size_t leaf_chunk = default_leaf_chunk) {
        kary_ = searchlab::build_kary(*keys_, fanout, leaf_chunk);
        return *this;
    }

    [[nodiscard]] const SortedKeys<Key>& keys() const noexcept { return *keys_; }
    [[nodiscard]] const std::optional<PinnedCache<Key>>& pinned() const noexcept { return pinned_; }
    [[nodiscard]] const std::optional<KaryIndex<Key>>& kary() const noexcept { return kary_; }
    [[nodiscard]] KaryIndex<Key>* mutable_kary() noexcept { return kary_ ? &*kary_ : nullptr; }

    /// Bytes held beyond the base array for the given variant.
    [[nodiscard]] std::size_t auxiliary_bytes(Variant v) const noexcept {
        switch (v) {
            case Variant::steps_pinned:
            case Variant::full_pinned: return pinned_ ? pinned_->bytes() : 0;
            case Variant::kary: return kary_ ? kary_->bytes() : 0;
            case Variant::naive: break;
        }
        return 0;
    }

    void require(Variant v) const {
        const bool ok = v == Variant::naive || (v == Variant::kary ? kary_.has_value() : pinned_.has_value());
        if (!ok) {
            throw config_error("SearchStructures: variant " + std::string(to_string(v)) + " has not been built");
        }
    }

private:
    const SortedKeys<Key>* keys_;
    std::optional<PinnedCache<Key>> pinned_;
    std::optional<KaryIndex<Key>> kary_;
};

/// Clamped search result (offset_search semantics) for any variant.
template <search_key Key>
std::size_t search(const SearchStructures<Key>& s, Variant v, Key key) {
    switch (v) {
        case Variant::naive: return offset_search(s.keys(), key);
        case Variant::steps_pinned: return search_steps_pinned(*s.pinned(), s.keys(), key);
        case Variant::full_pinned: return search_full_pinned(*s.pinned(), s.keys(), key);
        case Variant::kary: return kary_search(*s.kary(), key);
    }
    return 0;
}

/// Counts how often each lookup slot was processed.
struct PipelineObserver {
    explicit PipelineObserver(std::size_t lookups) : visits(lookups) {}
    std::vector<std::atomic<std::uint32_t>> visits;
};

namespace detail {

/// In-flight search of one lookup: probes read keys[base + offset - step].
struct Lane {
    std::size_t base = 0;
    SearchCursor cursor;
};

template <search_key Key>
Lane entry_lane(const SearchStructures<Key>& s, Variant v, Key key) {
    switch (v) {
        case Variant::naive: return {0, initial_cursor(s.keys().size())};
        case Variant::steps_pinned: return {0, pinned_prefix(*s.pinned(), key, false)};
        case Variant::full_pinned: return {0, pinned_prefix(*s.pinned(), key, true)};
        case Variant::kary: {
            const auto begin = kary_descend(*s.kary(), key);
            return {begin, initial_cursor(kary_leaf_size(*s.kary(), begin))};
        }
    }
    return {};
}

/// Advances all lanes one halving step per round until every lane is done.
template <search_key Key>
void finish_lockstep(std::span<const Key> keys, std::span<const Key> lookups, std::span<Lane> lanes) {
    for (bool active = true; active;) {
        active = false;
        for (std::size_t i = 0; i < lanes.size(); ++i) {
            auto& [base, cursor] = lanes[i];
            if (cursor.step == 0) {
                continue;
            }
            if (cursor.step <= cursor.offset && keys[base + cursor.offset - cursor.step] >= lookups[i]) {
                cursor.offset -= cursor.step;
            }
            cursor.step >>= 1;
            active = active || cursor.step > 0;
        }
    }
}

template <search_key Key>
struct WorkerScratch {
    std::vector<Key> sorted;
    Permutation perm;
    std::vector<std::pair<Key, std::uint32_t>> sort_buffer;
    std::vector<ResultSlot> results;
    std::vector<ResultSlot> restored;
    std::vector<Lane> lanes;
};

/// Searches lookups in groups of `stage` and writes find-semantics results.
template <search_key Key, class Write>
void search_staged(const SearchStructures<Key>& s, Variant v, std::span<const Key> lookups, std::size_t stage,
                   std::vector<Lane>& lanes, Write&& write) {
    const auto keys = s.keys().span();
    for (std::size_t first = 0; first < lookups.size(); first += stage) {
        const auto group = lookups.subspan(first, std::min(stage, lookups.size() - first));
        lanes.resize(group.size());
        for (std::size_t i = 0; i < group.size(); ++i) {
            lanes[i] = entry_lane(s, v, group[i]);
        }
        finish_lockstep(keys, group, std::span<Lane>(lanes));
        for (std::size_t i = 0; i < group.size(); ++i) {
            const auto index = lanes[i].base + lanes[i].cursor.offset;
            write(first + i, keys[index] == group[i] ? ResultSlot{index} : absent_result);
        }
    }
}

template <search_key Key>
void process_batch(const SearchStructures<Key>& s, const ExecConfig& cfg, std::span<const Key> lookups,
                   std::span<ResultSlot> out, WorkerScratch<Key>& scratch) {
    switch (cfg.reorder) {
        case Reorder::none:
            search_staged(s, cfg.variant, lookups, cfg.stage_per_worker, scratch.lanes,
                          [&](std::size_t i, ResultSlot r) { out[i] = r; });
            break;
        case Reorder::lookup: {
            block_sort_into(lookups, scratch.sorted, scratch.perm, scratch.sort_buffer);
            const auto forward = scratch.perm.forward();
            search_staged(s, cfg.variant, std::span<const Key>(scratch.sorted), cfg.stage_per_worker,
                          scratch.lanes, [&](std::size_t p, ResultSlot r) { out[forward[p]] = r; });
            break;
        }
        case Reorder::full: {
            block_sort_into(lookups, scratch.sorted, scratch.perm, scratch.sort_buffer);
            scratch.results.resize(lookups.size());
            search_staged(s, cfg.variant, std::span<const Key>(scratch.sorted), cfg.stage_per_worker,
                          scratch.lanes, [&](std::size_t p, ResultSlot r) { scratch.results[p] = r; });
            scratch.restored.resize(lookups.size());
            unsort_into(std::span<const ResultSlot>(scratch.results), scratch.perm,
                        std::span<ResultSlot>(scratch.restored));
            std::copy(scratch.restored.begin(), scratch.restored.end(), out.begin());
            break;
        }
    }
}

}  // namespace detail

/// Runs every lookup through the configured variant and writes results[i]
/// for lookups[i]. Results do not depend on workers, schedule, reorder mode,
/// variant, or batch sizes.
template <search_key Key>
void run_pipeline_into(const SearchStructures<Key>& s, std::span<const Key> lookups, const ExecConfig& cfg,
                       std::span<ResultSlot> results, PipelineObserver* observer = nullptr) {
    cfg.validate();
    s.require(cfg.variant);
    if (lookups.empty()) {
        throw usage_error("run_pipeline: no lookups");
    }
    if (results.size() != lookups.size()) {
        throw usage_error("run_pipeline: result buffer length mismatch");
    }
    if (observer != nullptr && observer->visits.size() != lookups.size()) {
        throw usage_error("run_pipeline: observer length mismatch");
    }

    const auto batch = cfg.sort_batch;
    const auto batches = (lookups.size() + batch - 1) / batch;
    const auto workers = std::min(cfg.workers, batches);

    auto run_batch = [&](std::size_t b, detail::WorkerScratch<Key>& scratch) {
        const auto first = b * batch;
        const auto count = std::min(batch, lookups.size() - first);
        detail::process_batch(s, cfg, lookups.subspan(first, count), results.subspan(first, count), scratch);
        if (observer != nullptr) {
            for (std::size_t i = first; i < first + count; ++i) {
                observer->visits[i].fetch_add(1, std::memory_order_relaxed);
            }
        }
    };

    std::atomic<std::size_t> next_batch{0};
    auto worker = [&](std::size_t w) {
        detail::WorkerScratch<Key> scratch;
        switch (cfg.schedule) {
            case Schedule::static_contiguous:
                for (auto b = w * batches / workers; b < (w + 1) * batches / workers; ++b) {
                    run_batch(b, scratch);
                }
                break;
            case Schedule::static_strided:
                for (auto b = w; b < batches; b += workers) {
                    run_batch(b, scratch);
                }
                break;
            case Schedule::dynamic:
                for (auto b = next_batch.fetch_add(1, std::memory_order_relaxed); b < batches;
                     b = next_batch.fetch_add(1, std::memory_order_relaxed)) {
                    run_batch(b, scratch);
                }
                break;
        }
    };

    if (workers == 1) {
        worker(0);
        return;
    }
    std::vector<std::jthread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) {
        pool.emplace_back(worker, w);
    }
}

template <search_key Key>
std::vector<ResultSlot> run_pipeline(const SearchStructures<Key>& s, std::span<const Key> lookups,
                                     const ExecConfig& cfg, PipelineObserver* observer = nullptr) {
    std::vector<ResultSlot> results(lookups.size(), absent_result);
    run_pipeline_into(s, lookups, cfg, std::span<ResultSlot>(results), observer);
    return results;
}

}  // namespace searchlab
