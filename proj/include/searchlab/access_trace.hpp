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

/// @file access_trace.hpp
/// @brief Probe-level tracing of single lookups and locality metrics over a
/// batch of traces.

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <map>
#include <ostream>
#include <set>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "searchlab/batch_engine.hpp"

namespace searchlab {

enum class RegionKind : std::uint8_t { main, pinned, partial, level };

struct Region {
    RegionKind kind = RegionKind::main;
    std::uint32_t level = 0;  // separator level, kind == level only

    [[nodiscard]] std::string name() const {
        switch (kind) {
            case RegionKind::main: return "main";
            case RegionKind::pinned: return "pinned";
            case RegionKind::partial: return "partial";
            case RegionKind::level: return "level-" + std::to_string(level);
        }
        return "?";
    }

    friend bool operator==(const Region&, const Region&) = default;
};

/// One read: `width` consecutive slots of `region` starting at `position`.
struct Probe {
    Region region;
    std::size_t position = 0;
    std::size_t width = 1;

    friend bool operator==(const Probe&, const Probe&) = default;
};

struct AccessTrace {
    std::vector<Probe> probes;

    [[nodiscard]] std::size_t size() const noexcept { return probes.size(); }
    friend bool operator==(const AccessTrace&, const AccessTrace&) = default;
};

/// Runs one lookup with every probe recorded in execution order. The result
/// is the clamped offset, identical to the untraced variant.
template <search_key Key>
std::pair<std::size_t, AccessTrace> traced_search(const SearchStructures<Key>& s, Variant v, Key key) {
    s.require(v);
    AccessTrace trace;
    auto on_main = [&](std::size_t position, std::size_t) {
        trace.probes.push_back({{RegionKind::main}, position});
    };
    auto on_cached = [&](std::size_t c, std::size_t) { trace.probes.push_back({{RegionKind::pinned}, c}); };
    auto on_partial = [&](std::size_t p, std::size_t) { trace.probes.push_back({{RegionKind::partial}, p}); };

    std::size_t result = 0;
    switch (v) {
        case Variant::naive: result = offset_search(s.keys().span(), key, on_main); break;
        case Variant::steps_pinned:
        case Variant::full_pinned: {
            const auto cursor = pinned_prefix(*s.pinned(), key, v == Variant::full_pinned, on_cached, on_partial);
            result = search_from(s.keys().span(), key, cursor, on_main);
            break;
        }
        case Variant::kary:
            result = kary_search(
                *s.kary(), key,
                [&](std::size_t d, std::size_t first, std::size_t width) {
                    trace.probes.push_back({{RegionKind::level, static_cast<std::uint32_t>(d)}, first, width});
                },
                on_main);
            break;
    }
    return {result, std::move(trace)};
}

/// Length of the longest common prefix of two probe lists.
inline std::size_t shared_prefix(const AccessTrace& a, const AccessTrace& b) noexcept {
    const auto limit = std::min(a.size(), b.size());
    std::size_t i = 0;
    while (i < limit && a.probes[i] == b.probes[i]) {
        ++i;
    }
    return i;
}

struct LocalityReport {
    /// Mean shared_prefix over adjacent trace pairs; 0 for fewer than two traces.
    double mean_shared_prefix = 0.0;
    /// Distinct cache lines touched by main-array probes at each step rank.
    std::vector<std::size_t> distinct_lines_per_step;
    std::map<std::string, std::size_t> region_access_counts;
};

inline constexpr std::size_t default_line_bytes = 64;

inline LocalityReport batch_locality(std::span<const AccessTrace> traces, std::size_t line_bytes = default_line_bytes,
                                     std::size_t key_bytes = 4) {
    if (key_bytes == 0 || line_bytes == 0 || line_bytes % key_bytes != 0) {
        throw usage_error("batch_locality: line_bytes must be a positive multiple of key_bytes");
    }
    LocalityReport report;

    if (traces.size() > 1) {
        std::size_t total = 0;
        for (std::size_t i = 1; i < traces.size(); ++i) {
            total += shared_prefix(traces[i - 1], traces[i]);
        }
        report.mean_shared_prefix = static_cast<double>(total) / static_cast<double>(traces.size() - 1);
    }

    std::vector<std::set<std::size_t>> lines;
    for (const auto& trace : traces) {
        if (trace.size() > lines.size()) {
            lines.resize(trace.size());
        }
        for (std::size_t rank = 0; rank < trace.size(); ++rank) {
            const auto& probe = trace.probes[rank];
            ++report.region_access_counts[probe.region.name()];
            if (probe.region.kind == RegionKind::main) {
                lines[rank].insert(probe.position * key_bytes / line_bytes);
            }
        }
    }
    report.distinct_lines_per_step.reserve(lines.size());
    for (const auto& step : lines) {
        report.distinct_lines_per_step.push_back(step.size());
    }
    return report;
}

/// Emits `lookup_index,step_rank,region,position`, one line per probe.
inline void write_trace_csv(std::ostream& out, std::size_t lookup_index, const AccessTrace& trace) {
    for (std::size_t rank = 0; rank < trace.size(); ++rank) {
        const auto& probe = trace.probes[rank];
        out << lookup_index << ',' << rank << ',' << probe.region.name() << ',' << probe.position << '\n';
    }
}

}  // namespace searchlab
