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

/// @file verify.hpp
/// @brief Cross-variant equivalence sweep against a linear lower-bound scan.

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <numeric>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "searchlab/batch_engine.hpp"
#include "searchlab/workload.hpp"

namespace searchlab {

struct VerifyOptions {
    std::size_t min_log2 = 0;
    std::size_t max_log2 = 12;
    std::uint64_t first_seed = 1;
    std::size_t seeds = 3;
    /// Corrupts one root separator of every K-ary index that has one.
    bool inject_fault = false;
    std::size_t max_reported = 16;
};

struct Counterexample {
    std::uint64_t seed = 0;
    std::size_t n = 0;
    std::uint64_t key = 0;
    std::string check;
    std::uint64_t expected = 0;
    std::uint64_t actual = 0;
};

struct VerifyReport {
    std::size_t arrays = 0;
    std::size_t checks = 0;
    std::size_t failures = 0;
    std::vector<Counterexample> counterexamples;

    [[nodiscard]] bool passed() const noexcept { return failures == 0; }
};

/// Lower bounds of many queries by one merged pass over the array.
template <search_key Key>
std::vector<std::size_t> sweep_lower_bounds(std::span<const Key> keys, std::span<const Key> queries) {
    std::vector<std::size_t> order(queries.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return queries[a] < queries[b]; });
    std::vector<std::size_t> bounds(queries.size());
    std::size_t i = 0;
    for (const auto q : order) {
        while (i < keys.size() && keys[i] < queries[q]) {
            ++i;
        }
        bounds[q] = i;
    }
    return bounds;
}

namespace detail {

/// Random non-decreasing array; small value ranges force duplicates.
inline std::vector<std::uint32_t> verify_array(SplitMix64& rng, std::size_t n) {
    std::vector<std::uint32_t> keys(n);
    const auto mode = rng.below(3);
    const std::uint64_t range = mode == 0 ? std::max<std::uint64_t>(1, n / 2) : mode == 1 ? 4 * n : (1ULL << 32) - 2;
    const std::uint32_t shift = static_cast<std::uint32_t>(rng.below(1024)) + 1;
    for (auto& k : keys) {
        k = static_cast<std::uint32_t>(rng.below(range)) + shift;
    }
    std::sort(keys.begin(), keys.end());
    return keys;
}

/// Every distinct present key, the neighbours of each, extremes, and random keys.
inline std::vector<std::uint32_t> verify_queries(SplitMix64& rng, std::span<const std::uint32_t> keys) {
    constexpr auto top = std::numeric_limits<std::uint32_t>::max();
    std::vector<std::uint32_t> queries{0, top, keys.front() - 1, keys.back() + 1};
    for (const auto k : keys) {
        queries.push_back(k);
        queries.push_back(k - 1);
        queries.push_back(k + 1);
    }
    for (std::size_t i = 0; i < 100; ++i) {
        queries.push_back(static_cast<std::uint32_t>(rng()));
    }
    std::sort(queries.begin(), queries.end());
    queries.erase(std::unique(queries.begin(), queries.end()), queries.end());
    return queries;
}

}  // namespace detail

inline VerifyReport verify_run(const VerifyOptions& opt, std::ostream* log = nullptr) {
    using Key = std::uint32_t;
    VerifyReport report;

    auto check = [&](std::uint64_t seed, std::size_t n, Key key, const std::string& name, std::uint64_t expected,
                     std::uint64_t actual) {
        ++report.checks;
        if (expected == actual) {
            return;
        }
        ++report.failures;
        if (report.counterexamples.size() < opt.max_reported) {
            report.counterexamples.push_back({seed, n, key, name, expected, actual});
            if (log != nullptr) {
                *log << "FAIL seed=" << seed << " n=" << n << " key=" << key << " check=" << name
                     << " expected=" << expected << " actual=" << actual << '\n';
            }
        }
    };

    for (std::uint64_t seed = opt.first_seed; seed < opt.first_seed + opt.seeds; ++seed) {
        SplitMix64 rng(seed);
        for (auto l = opt.min_log2; l <= opt.max_log2; ++l) {
            const std::size_t p = std::size_t{1} << l;
            std::vector<std::size_t> sizes{p, p + 1, p + rng.below(p)};
            if (p > 1) {
                sizes.push_back(p - 1);
            }
            for (const auto n : sizes) {
                const SortedKeys<Key> keys(detail::verify_array(rng, n));
                const auto queries = detail::verify_queries(rng, keys.span());
                const auto expected = sweep_lower_bounds(keys.span(), std::span<const Key>(queries));
                ++report.arrays;

                auto sweep = [&](const std::string& name, auto&& search) {
                    for (std::size_t q = 0; q < queries.size(); ++q) {
                        const auto offset = search(queries[q]);
                        check(seed, n, queries[q], name, expected[q],
                              resolve_lower_bound(keys.span(), queries[q], offset));
                    }
                };

                sweep("naive", [&](Key k) { return offset_search(keys, k); });
                for (const std::size_t budget : {std::size_t{2}, std::size_t{3}, std::size_t{4}, std::size_t{6},
                                                 std::size_t{64}, std::size_t{1024}, n + 1}) {
                    if (budget < 2) {
                        continue;
                    }
                    const auto cache = build_pinned_cache(keys, budget);
                    const auto suffix = "/budget=" + std::to_string(budget);
                    sweep("steps-pinned" + suffix, [&](Key k) { return search_steps_pinned(cache, keys, k); });
                    sweep("full-pinned" + suffix, [&](Key k) { return search_full_pinned(cache, keys, k); });
                }
                for (const std::size_t fanout : {2, 3, 5, 17, 33}) {
                    for (const std::size_t leaf : {1, 3, 16, 32}) {
                        auto index = build_kary(keys, fanout, leaf);
                        if (opt.inject_fault && index.depth() > 0) {
                            index.inject_separator_fault_for_testing(0, 0, keys.front());
                        }
                        sweep("kary/k=" + std::to_string(fanout) + "/leaf=" + std::to_string(leaf),
                              [&](Key k) { return kary_search(index, k); });
                    }
                }

                // Pipeline output invariance on the same array and queries.
                SearchStructures<Key> structures(keys);
                structures.build_pinned(6).build_kary(5, 3);
                if (opt.inject_fault && structures.kary()->depth() > 0) {
                    structures.mutable_kary()->inject_separator_fault_for_testing(0, 0, keys.front());
                }
                for (const auto variant : all_variants) {
                    for (const auto reorder : all_reorders) {
                        const ExecConfig cfg{2, 16, 4, Schedule::dynamic, reorder, variant};
                        const auto results = run_pipeline(structures, std::span<const Key>(queries), cfg);
                        const auto name = "pipeline/" + std::string(to_string(variant)) + "/" +
                                          std::string(to_string(reorder));
                        for (std::size_t q = 0; q < queries.size(); ++q) {
                            const bool hit = expected[q] < n && keys[expected[q]] == queries[q];
                            check(seed, n, queries[q], name, hit ? expected[q] : absent_result, results[q]);
                        }
                    }
                }
            }
        }
    }
    return report;
}

}  // namespace searchlab
