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

// Acceptance suite: one PASS/FAIL line per criterion. Exit status is non-zero
// when any gating criterion fails.

#include <algorithm>
#include <bit>
#include <chrono>
#include <cstdio>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "oracle.hpp"
#include "searchlab/searchlab.hpp"

using namespace searchlab;
using searchlab::testing::identity_keys;
using searchlab::testing::linear_lower_bounds;
using Key = std::uint32_t;

namespace {

struct Outcome {
    bool pass = false;
    std::string detail;
};

int g_failures = 0;

void run(const char* id, const char* title, bool gating, const std::function<Outcome()>& criterion) {
    const auto start = std::chrono::steady_clock::now();
    Outcome outcome;
    try {
        outcome = criterion();
    } catch (const std::exception& e) {
        outcome = {false, std::string("exception: ") + e.what()};
    }
    const auto seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    const char* verdict = outcome.pass ? "PASS" : (gating ? "FAIL" : "FAIL (non-gating)");
    std::printf("[%s] %s %s (%.1fs): %s\n", verdict, id, title, seconds, outcome.detail.c_str());
    std::fflush(stdout);
    if (!outcome.pass && gating) {
        ++g_failures;
    }
}

std::vector<Key> random_array(std::mt19937_64& rng, std::size_t n) {
    // Values in [1, range]; small ranges produce long runs of duplicates.
    const std::uint64_t range = rng() % 2 == 0 ? n / 2 + 1 : 3 * n + 10;
    std::uniform_int_distribution<std::uint64_t> dist(1, range);
    std::vector<Key> keys(n);
    for (auto& k : keys) {
        k = static_cast<Key>(dist(rng));
    }
    std::sort(keys.begin(), keys.end());
    return keys;
}

std::vector<Key> queries_for(std::mt19937_64& rng, const std::vector<Key>& keys) {
    std::vector<Key> queries(keys.begin(), keys.end());
    std::vector<Key> absent{0, keys.back() + 1, keys.back() + 1000, std::numeric_limits<Key>::max()};
    std::uniform_int_distribution<std::uint64_t> dist(0, keys.back() + 50);
    while (absent.size() < 100 + 4) {
        const auto k = static_cast<Key>(dist(rng));
        if (!std::binary_search(keys.begin(), keys.end(), k)) {
            absent.push_back(k);
        }
    }
    queries.insert(queries.end(), absent.begin(), absent.end());
    return queries;
}

Outcome oracle_equivalence() {
    std::mt19937_64 rng(20260101);
    std::size_t checks = 0;
    for (int trial = 0; trial < 1000; ++trial) {
        const std::size_t n = trial < 16 ? trial + 1 : 1 + rng() % 4096;
        const auto raw = random_array(rng, n);
        const SortedKeys<Key> keys(raw);
        const auto queries = queries_for(rng, raw);
        const auto expected = linear_lower_bounds(raw, queries);

        std::string failure;
        auto sweep = [&](const std::string& name, auto&& search) {
            for (std::size_t q = 0; q < queries.size() && failure.empty(); ++q) {
                ++checks;
                const auto got = resolve_lower_bound(keys.span(), queries[q], search(queries[q]));
                if (got != expected[q]) {
                    failure = name + " n=" + std::to_string(n) + " key=" + std::to_string(queries[q]);
                }
            }
        };
        sweep("naive", [&](Key k) { return offset_search(keys, k); });
        for (const std::size_t budget : {std::size_t{2}, std::size_t{4}, std::size_t{6}, std::size_t{64},
                                         std::size_t{1024}, std::max<std::size_t>(n, 2)}) {
            const auto cache = build_pinned_cache(keys, budget);
            sweep("steps-pinned/" + std::to_string(budget),
                  [&](Key k) { return search_steps_pinned(cache, keys, k); });
            sweep("full-pinned/" + std::to_string(budget), [&](Key k) { return search_full_pinned(cache, keys, k); });
        }
        for (const std::size_t fanout : {2, 3, 5, 17, 33}) {
            for (const std::size_t leaf : {1, 3, 16, 32}) {
                const auto index = build_kary(keys, fanout, leaf);
                sweep("kary/" + std::to_string(fanout) + "/" + std::to_string(leaf),
                      [&](Key k) { return kary_search(index, k); });
            }
        }
        if (!failure.empty()) {
            return {false, "mismatch " + failure};
        }
    }
    return {true, "1000 arrays, " + std::to_string(checks) + " lower-bound checks, all exact"};
}

Outcome pinned_probe_fidelity() {
    std::mt19937_64 rng(7);
    for (int trial = 0; trial < 100; ++trial) {
        const std::size_t n = 1 + rng() % 4096;
        const auto raw = random_array(rng, n);
        const SortedKeys<Key> keys(raw);
        const std::size_t budgets[] = {2, 3, 4, 6, 64, 1024, n + 1};
        const auto budget = std::max<std::size_t>(2, budgets[rng() % 7]);
        const auto key = static_cast<Key>(rng() % (raw.back() + 2));
        const auto cache = build_pinned_cache(keys, budget);
        std::vector<std::size_t> combined;
        const auto cursor = pinned_prefix(cache, key, false,
                                          [&](std::size_t c, std::size_t) { combined.push_back(cache.global_position(c)); });
        search_from(keys.span(), key, cursor, [&](std::size_t p, std::size_t) { combined.push_back(p); });
        if (combined != probe_positions(keys, key)) {
            return {false, "probe sequence differs at n=" + std::to_string(n) + " key=" + std::to_string(key) +
                               " budget=" + std::to_string(budget)};
        }
    }

    const SortedKeys<Key> keys(identity_keys<Key>(14));
    const auto cache = build_pinned_cache(keys, 6);
    std::size_t steps_main = 0;
    std::size_t full_main = 0;
    const auto naive_main = probe_positions(keys, Key{6}).size();
    const auto r1 = search_steps_pinned(cache, keys, Key{6}, [&](std::size_t, std::size_t) { ++steps_main; });
    const auto r2 = search_full_pinned(cache, keys, Key{6}, [&](std::size_t, std::size_t) { ++full_main; });
    std::ostringstream detail;
    detail << "100 random triples match; key-6 replay main probes naive=" << naive_main
           << " steps-pinned=" << steps_main << " full-pinned=" << full_main;
    const bool ok = naive_main == 4 && steps_main == 2 && full_main == 1 && r1 == 6 && r2 == 6;
    return {ok, detail.str()};
}

Outcome kary_space() {
    const auto w = generate_workload<Key>(1u << 20, 1, 42);
    const auto index = build_kary(w.build_keys, 17, 32);
    const auto overhead = kary_overhead(index);
    constexpr double golden = 0.031280517578125;  // 32800 / 2^20
    std::ostringstream detail;
    detail.precision(12);
    detail << "overhead=" << overhead << " (separators=" << index.separator_count() << ", golden " << golden
           << ", band [0.029, 0.035])";
    return {overhead >= 0.029 && overhead <= 0.035 && overhead == golden, detail.str()};
}

Outcome pipeline_invariance() {
    const auto w = generate_workload<Key>(1u << 18, 1u << 19, 42);
    SearchStructures<Key> s(w.build_keys);
    s.build_pinned().build_kary();
    const std::span<const Key> lookups(w.lookup_keys);

    std::vector<ResultSlot> reference;
    reference.reserve(lookups.size());
    for (const auto k : lookups) {
        const auto hit = find(w.build_keys, k);
        reference.push_back(hit ? *hit : absent_result);
    }
    std::size_t runs = 0;
    std::vector<ResultSlot> results(lookups.size());
    for (const auto variant : all_variants)
        for (const auto reorder : all_reorders)
            for (const auto schedule : all_schedules)
                for (const std::size_t workers : {1, 2, 8})
                    for (const std::size_t batch : {64, 1024}) {
                        std::fill(results.begin(), results.end(), 0);
                        const ExecConfig cfg{workers, batch, 8, schedule, reorder, variant};
                        run_pipeline_into(s, lookups, cfg, std::span<ResultSlot>(results));
                        spot_check(w.build_keys, lookups, std::span<const ResultSlot>(results), runs);
                        ++runs;
                        if (results != reference) {
                            std::ostringstream detail;
                            detail << "results differ for " << to_string(variant) << "/" << to_string(reorder) << "/"
                                   << to_string(schedule) << "/workers=" << workers << "/batch=" << batch;
                            return {false, detail.str()};
                        }
                    }
    return {runs == 216, std::to_string(runs) + " configurations bit-identical to find() over 2^19 lookups"};
}

Outcome permutation_roundtrip() {
    std::mt19937_64 rng(5);
    for (int trial = 0; trial < 10000; ++trial) {
        const std::size_t len = 1 + rng() % 4096;
        const std::uint64_t range = trial % 2 == 0 ? 1 + rng() % 16 : ~0ULL;
        std::vector<Key> values(len);
        for (auto& v : values) {
            v = static_cast<Key>(range == ~0ULL ? rng() : rng() % range);
        }
        const auto [sorted, perm] = block_sort(std::span<const Key>(values));
        std::vector<bool> seen(len, false);
        for (const auto f : perm.forward()) {
            if (f >= len || seen[f]) {
                return {false, "permutation is not a bijection (batch " + std::to_string(trial) + ")"};
            }
            seen[f] = true;
        }
        if (unsort(std::span<const Key>(sorted), perm) != values) {
            return {false, "roundtrip failed (batch " + std::to_string(trial) + ")"};
        }
    }
    return {true, "10000 batches restored exactly"};
}

double mean_prefix(const SearchStructures<Key>& s, const std::vector<Key>& lookups) {
    std::vector<AccessTrace> traces;
    traces.reserve(lookups.size());
    for (const auto k : lookups) {
        traces.push_back(traced_search(s, Variant::naive, k).second);
    }
    return batch_locality(traces).mean_shared_prefix;
}

Outcome locality_trend() {
    // Seed 42 gates; seeds 1-10 must clear the same threshold.
    std::ostringstream detail;
    detail.precision(3);
    bool ok = true;
    double min_ratio = 1e9;
    for (const std::uint64_t seed : {42, 1, 2, 3, 4, 5, 6, 7, 8, 9, 10}) {
        const auto w = generate_workload<Key>(1u << 20, 1u << 14, seed);
        const SearchStructures<Key> s(w.build_keys);
        auto sorted = w.lookup_keys;
        std::sort(sorted.begin(), sorted.end());
        const auto unsorted_prefix = mean_prefix(s, w.lookup_keys);
        const auto sorted_prefix = mean_prefix(s, sorted);
        ok = ok && sorted_prefix >= 2.0 * unsorted_prefix;
        if (seed == 42) {
            detail << "seed 42: sorted=" << sorted_prefix << " unsorted=" << unsorted_prefix
                   << " ratio=" << sorted_prefix / unsorted_prefix;
        } else {
            min_ratio = std::min(min_ratio, sorted_prefix / unsorted_prefix);
        }
    }
    detail << "; seeds 1-10 min ratio=" << min_ratio << " (threshold 2.0)";
    return {ok, detail.str()};
}

Outcome kary_contiguity() {
    const auto w = generate_workload<Key>(1u << 20, 1u << 14, 42);
    SearchStructures<Key> s(w.build_keys);
    s.build_kary(17, 32);
    const auto& index = *s.kary();
    std::size_t reads = 0;
    for (const auto k : w.lookup_keys) {
        const auto trace = traced_search(s, Variant::kary, k).second;
        std::size_t level_reads = 0;
        for (const auto& probe : trace.probes) {
            if (probe.region.kind != RegionKind::level) {
                continue;
            }
            const auto level = index.level(probe.region.level);
            if (probe.region.level != level_reads || probe.width != 16 || probe.position % 16 != 0 ||
                probe.position + probe.width > level.size()) {
                return {false, "non-contiguous node read for key " + std::to_string(k)};
            }
            ++level_reads;
        }
        if (level_reads != index.depth()) {
            return {false, "missing level read for key " + std::to_string(k)};
        }
        reads += level_reads;
    }
    return {true, std::to_string(reads) + " node reads over " + std::to_string(index.depth()) +
                      " levels, each 16 consecutive slots of one level array"};
}

Outcome lpow2_totality() {
    constexpr std::size_t limit = 1u << 20;
    const auto ids = identity_keys<Key>(limit);
    const std::span<const Key> all(ids);
    std::mt19937_64 rng(3);
    for (std::size_t n = 1; n <= limit; ++n) {
        const auto p = lpow2(n);
        if (!(p <= n && n < 2 * p)) {
            return {false, "lpow2 bound violated at n=" + std::to_string(n)};
        }
        const auto bound = static_cast<std::size_t>(std::bit_width(n));
        const auto view = all.subspan(0, n);
        for (const Key key : {Key{0}, static_cast<Key>(n), static_cast<Key>(rng() % n)}) {
            std::size_t probes = 0;
            offset_search(view, key, [&](std::size_t, std::size_t) { ++probes; });
            if (probes > bound) {
                return {false, "probe count exceeds floor(log2 n)+1 at n=" + std::to_string(n)};
            }
        }
    }
    return {true, "n in [1, 2^20]: lpow2 bounds and probe counts hold"};
}

Outcome perf_smoke() {
    BenchGrid grid;
    grid.n_log2 = {22};
    grid.lookups_log2 = 23;
    grid.reps = 3;
    std::ostringstream detail;
    detail << "workers=" << grid.workers.front() << ";";
    const auto records = bench_run(grid);
    std::size_t reported = 0;
    for (const auto& r : records) {
        if (r.skipped_reason.empty() && r.throughput > 0) {
            ++reported;
            detail << ' ' << to_string(r.variant) << '=' << static_cast<long long>(r.throughput / 1e6) << "M/s";
        }
    }
    detail << ". Reported only: GPU speedup factors are not expected to carry over to CPU execution.";
    return {reported == 4, detail.str()};
}

}  // namespace

int main() {
    run("C1", "oracle equivalence", true, oracle_equivalence);
    run("C2", "pinned probe-sequence fidelity", true, pinned_probe_fidelity);
    run("C3", "k-ary space overhead", true, kary_space);
    run("C4", "pipeline output invariance", true, pipeline_invariance);
    run("C5", "permutation roundtrip", true, permutation_roundtrip);
    run("C6", "locality trend (sorted vs unsorted)", true, locality_trend);
    run("C7", "k-ary node contiguity", true, kary_contiguity);
    run("C8", "lpow2 totality and probe bound", true, lpow2_totality);
    run("C9", "perf smoke n=2^22 m=2^23", false, perf_smoke);
    std::printf("%s: %d gating criteria failed\n", g_failures == 0 ? "ACCEPTANCE PASS" : "ACCEPTANCE FAIL",
                g_failures);
    return g_failures == 0 ? 0 : 1;
}
