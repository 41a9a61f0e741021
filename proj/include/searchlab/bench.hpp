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

/// @file bench.hpp
/// @brief Benchmark grid execution and CSV / JSON-lines emission.
///
/// Build and lookup times are medians over the configured repetitions.
/// Workload generation and result-buffer allocation are not timed.
/// throughput = lookups / (lookup_ns * 1e-9), i.e. lookups per second of the
/// median pipeline run. footprint_bytes = base array bytes + auxiliary bytes;
/// overhead_ratio = auxiliary entries / n.

#include <algorithm>
#include <chrono>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <iomanip>
#include <optional>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "searchlab/batch_engine.hpp"
#include "searchlab/workload.hpp"

namespace searchlab {

struct BenchGrid {
    std::vector<std::size_t> n_log2{15, 16, 17, 18, 19, 20, 21, 22, 23, 24};
    /// Lookups per grid point as a power of two; 2 * n when unset.
    std::optional<std::size_t> lookups_log2;
    std::vector<Variant> variants{std::begin(all_variants), std::end(all_variants)};
    std::vector<std::size_t> fanouts{default_kary_fanout};
    std::size_t leaf_chunk = default_leaf_chunk;
    std::size_t pin_budget = default_pin_budget_slots<std::uint32_t>;
    std::vector<std::size_t> workers{default_workers()};
    std::vector<std::size_t> sort_batches{1024};
    std::size_t stage = 8;
    std::vector<Schedule> schedules{Schedule::static_contiguous};
    std::vector<Reorder> reorders{Reorder::none};
    LookupOrder order = LookupOrder::random;
    double hit_ratio = 1.0;
    std::uint64_t seed = 42;
    std::size_t reps = 5;

    void validate() const {
        if (reps < 3) {
            throw config_error("BenchGrid: repetitions must be >= 3 for median timing");
        }
        if (n_log2.empty() || variants.empty() || fanouts.empty() || workers.empty() || sort_batches.empty() ||
            schedules.empty() || reorders.empty()) {
            throw config_error("BenchGrid: every grid axis needs at least one value");
        }
        for (const auto l : n_log2) {
            if (l > 31) {
                throw config_error("BenchGrid: n_log2 must be <= 31 for 32-bit keys");
            }
        }
    }
};

struct BenchRecord {
    Variant variant = Variant::naive;
    std::size_t n = 0;
    std::size_t lookups = 0;
    std::size_t k = 0;
    std::size_t leaf_chunk = 0;
    std::size_t pin_budget = 0;
    std::size_t workers = 0;
    std::size_t sort_batch = 0;
    Schedule schedule = Schedule::static_contiguous;
    Reorder reorder = Reorder::none;
    LookupOrder order = LookupOrder::random;
    std::uint64_t seed = 0;
    std::size_t reps = 0;
    std::uint64_t build_ns = 0;
    std::uint64_t lookup_ns = 0;
    double throughput = 0.0;
    std::size_t footprint_bytes = 0;
    double overhead_ratio = 0.0;
    /// Non-empty for grid points that could not run.
    std::string skipped_reason;
};

inline constexpr const char* bench_csv_header =
    "variant,n,lookups,k,leaf_chunk,pin_budget,workers,sort_batch,schedule,reorder,order,seed,reps,build_ns,"
    "lookup_ns,throughput,footprint_bytes,overhead_ratio";

namespace detail {

inline std::string format_ratio(double value) {
    std::ostringstream out;
    out << std::setprecision(9) << value;
    return out.str();
}

inline std::string format_throughput(double value) {
    std::ostringstream out;
    out << std::fixed << std::setprecision(1) << value;
    return out.str();
}

template <class F>
std::uint64_t time_ns(F&& f) {
    const auto start = std::chrono::steady_clock::now();
    f();
    const auto stop = std::chrono::steady_clock::now();
    return static_cast<std::uint64_t>(std::chrono::duration_cast<std::chrono::nanoseconds>(stop - start).count());
}

inline std::uint64_t median(std::vector<std::uint64_t> values) {
    std::sort(values.begin(), values.end());
    return values[values.size() / 2];
}

}  // namespace detail

inline void write_csv_header(std::ostream& out) { out << bench_csv_header << '\n'; }

/// Skipped grid points are written as `#`-prefixed comment lines.
inline void write_csv_row(std::ostream& out, const BenchRecord& r) {
    if (!r.skipped_reason.empty()) {
        out << "# skipped variant=" << to_string(r.variant) << " n=" << r.n << " k=" << r.k
            << " pin_budget=" << r.pin_budget << ": " << r.skipped_reason << '\n';
        return;
    }
    out << to_string(r.variant) << ',' << r.n << ',' << r.lookups << ',' << r.k << ',' << r.leaf_chunk << ','
        << r.pin_budget << ',' << r.workers << ',' << r.sort_batch << ',' << to_string(r.schedule) << ','
        << to_string(r.reorder) << ',' << to_string(r.order) << ',' << r.seed << ',' << r.reps << ',' << r.build_ns
        << ',' << r.lookup_ns << ',' << detail::format_throughput(r.throughput) << ',' << r.footprint_bytes << ','
        << detail::format_ratio(r.overhead_ratio) << '\n';
}

inline nlohmann::json to_json(const BenchRecord& r) {
    nlohmann::json j{{"variant", to_string(r.variant)},
                     {"n", r.n},
                     {"lookups", r.lookups},
                     {"k", r.k},
                     {"leaf_chunk", r.leaf_chunk},
                     {"pin_budget", r.pin_budget},
                     {"workers", r.workers},
                     {"sort_batch", r.sort_batch},
                     {"schedule", to_string(r.schedule)},
                     {"reorder", to_string(r.reorder)},
                     {"order", to_string(r.order)},
                     {"seed", r.seed},
                     {"reps", r.reps}};
    if (!r.skipped_reason.empty()) {
        j["skipped"] = r.skipped_reason;
        return j;
    }
    j["build_ns"] = r.build_ns;
    j["lookup_ns"] = r.lookup_ns;
    j["throughput"] = r.throughput;
    j["footprint_bytes"] = r.footprint_bytes;
    j["overhead_ratio"] = r.overhead_ratio;
    return j;
}

/// Compares `samples` random result slots against find(); throws
/// std::logic_error on the first mismatch.
template <search_key Key>
void spot_check(const SortedKeys<Key>& keys, std::span<const Key> lookups, std::span<const ResultSlot> results,
                std::uint64_t seed, std::size_t samples = 1024) {
    SplitMix64 rng(seed ^ 0x5bd1e995ULL);
    for (std::size_t s = 0; s < samples; ++s) {
        const auto i = rng.below(lookups.size());
        const auto expected = find(keys, lookups[i]);
        const auto want = expected ? ResultSlot{*expected} : absent_result;
        if (results[i] != want) {
            throw std::logic_error("spot check failed at lookup " + std::to_string(i));
        }
    }
}

/// Runs every grid point and hands each record to `emit` as soon as it is
/// complete. Grid points run sequentially; each may use several workers.
inline std::vector<BenchRecord> bench_run(const BenchGrid& grid,
                                          const std::function<void(const BenchRecord&)>& emit = {}) {
    using Key = std::uint32_t;
    grid.validate();
    std::vector<BenchRecord> records;
    auto push = [&](BenchRecord r) {
        if (emit) {
            emit(r);
        }
        records.push_back(std::move(r));
    };

    for (const auto n_log2 : grid.n_log2) {
        const std::size_t n = std::size_t{1} << n_log2;
        const std::size_t m = grid.lookups_log2 ? std::size_t{1} << *grid.lookups_log2 : 2 * n;
        const auto workload = generate_workload<Key>(n, m, grid.seed, grid.order, grid.hit_ratio);
        const auto& keys = workload.build_keys;
        const std::span<const Key> lookups(workload.lookup_keys);
        std::vector<ResultSlot> results(m);

        for (const auto variant : grid.variants) {
            const bool is_kary = variant == Variant::kary;
            const bool is_pinned = variant == Variant::steps_pinned || variant == Variant::full_pinned;
            const std::vector<std::size_t> fanouts = is_kary ? grid.fanouts : std::vector<std::size_t>{0};
            for (const auto k : fanouts) {
                BenchRecord base;
                base.variant = variant;
                base.n = n;
                base.lookups = m;
                base.k = k;
                base.leaf_chunk = is_kary ? grid.leaf_chunk : 0;
                base.pin_budget = is_pinned ? grid.pin_budget : 0;
                base.order = grid.order;
                base.seed = grid.seed;
                base.reps = grid.reps;

                SearchStructures<Key> structures(keys);
                std::vector<std::uint64_t> build_times;
                try {
                    for (std::size_t r = 0; r < grid.reps; ++r) {
                        build_times.push_back(detail::time_ns([&] {
                            if (is_kary) {
                                structures.build_kary(k, grid.leaf_chunk);
                            } else if (is_pinned) {
                                structures.build_pinned(grid.pin_budget);
                            }
                        }));
                    }
                } catch (const config_error& e) {
                    base.skipped_reason = e.what();
                    push(base);
                    continue;
                }
                base.build_ns = detail::median(build_times);
                const auto aux = structures.auxiliary_bytes(variant);
                base.footprint_bytes = keys.bytes() + aux;
                base.overhead_ratio = static_cast<double>(aux / sizeof(Key)) / static_cast<double>(n);

                for (const auto workers : grid.workers)
                    for (const auto sort_batch : grid.sort_batches)
                        for (const auto schedule : grid.schedules)
                            for (const auto reorder : grid.reorders) {
                                BenchRecord rec = base;
                                rec.workers = workers;
                                rec.sort_batch = sort_batch;
                                rec.schedule = schedule;
                                rec.reorder = reorder;
                                ExecConfig cfg{workers, sort_batch, grid.stage, schedule, reorder, variant};
                                try {
                                    cfg.validate();
                                } catch (const config_error& e) {
                                    rec.skipped_reason = e.what();
                                    push(rec);
                                    continue;
                                }
                                std::vector<std::uint64_t> lookup_times;
                                for (std::size_t r = 0; r < grid.reps; ++r) {
                                    lookup_times.push_back(detail::time_ns([&] {
                                        run_pipeline_into(structures, lookups, cfg, std::span<ResultSlot>(results));
                                    }));
                                }
                                spot_check(keys, lookups, std::span<const ResultSlot>(results), grid.seed);
                                rec.lookup_ns = detail::median(lookup_times);
                                rec.throughput = rec.lookup_ns == 0
                                                     ? 0.0
                                                     : static_cast<double>(m) * 1e9 / static_cast<double>(rec.lookup_ns);
                                push(rec);
                            }
            }
        }
    }
    return records;
}

}  // namespace searchlab
