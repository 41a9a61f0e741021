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

// searchlab command line: bench, verify, trace, gen.

#include <charconv>
#include <cstdint>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "searchlab/searchlab.hpp"

namespace {

using namespace searchlab;
using Key = std::uint32_t;

constexpr int kExitOk = 0;
constexpr int kExitVerifyFailed = 1;
constexpr int kExitConfig = 2;

struct Options {
    std::string n_log2 = "15:24";
    std::optional<std::size_t> lookups_log2;
    std::string variant;
    std::string k = "17";
    std::size_t leaf_chunk = default_leaf_chunk;
    std::size_t pin_budget = default_pin_budget_slots<Key>;
    std::string workers;
    std::string sort_batch = "1024";
    std::size_t stage = 8;
    std::string schedule = "static-contiguous";
    std::string reorder = "none";
    std::string order = "random";
    double hit_ratio = 1.0;
    std::uint64_t seed = 42;
    std::size_t reps = 5;
    std::string out;
    std::string format = "csv";
    std::string verify_range = "0:12";
    std::uint64_t verify_seed = 1;
    std::size_t seeds = 3;
    bool inject_fault = false;
};

std::vector<std::string> split_list(const std::string& text) {
    std::vector<std::string> parts;
    std::stringstream in(text);
    for (std::string item; std::getline(in, item, ',');) {
        if (!item.empty()) {
            parts.push_back(item);
        }
    }
    return parts;
}

std::size_t parse_size(const std::string& text, const char* what) {
    std::size_t value = 0;
    const auto* end = text.data() + text.size();
    const auto [ptr, ec] = std::from_chars(text.data(), end, value);
    if (ec != std::errc{} || ptr != end) {
        throw config_error(std::string("invalid ") + what + ": '" + text + "'");
    }
    return value;
}

std::vector<std::size_t> parse_sizes(const std::string& text, const char* what) {
    std::vector<std::size_t> values;
    for (const auto& item : split_list(text)) {
        values.push_back(parse_size(item, what));
    }
    if (values.empty()) {
        throw config_error(std::string("empty ") + what);
    }
    return values;
}

/// "18", "15:24", "15..24" or "15-24" (inclusive).
std::vector<std::size_t> parse_range(const std::string& text) {
    for (const std::string sep : {":", "..", "-"}) {
        const auto at = text.find(sep);
        if (at == std::string::npos) {
            continue;
        }
        const auto lo = parse_size(text.substr(0, at), "--n-log2");
        const auto hi = parse_size(text.substr(at + sep.size()), "--n-log2");
        if (lo > hi) {
            throw config_error("--n-log2: empty range '" + text + "'");
        }
        std::vector<std::size_t> values;
        for (auto v = lo; v <= hi; ++v) {
            values.push_back(v);
        }
        return values;
    }
    return {parse_size(text, "--n-log2")};
}

template <class Enum, std::size_t N>
std::vector<Enum> parse_enums(const std::string& text, const Enum (&values)[N], const char* what) {
    std::vector<Enum> out;
    for (const auto& item : split_list(text)) {
        const auto v = parse_enum(item, values);
        if (!v) {
            throw config_error(std::string("unknown ") + what + ": '" + item + "'");
        }
        out.push_back(*v);
    }
    if (out.empty()) {
        throw config_error(std::string("empty ") + what);
    }
    return out;
}

LookupOrder parse_order(const std::string& text) {
    if (text == "random") {
        return LookupOrder::random;
    }
    if (text == "sorted") {
        return LookupOrder::sorted;
    }
    throw config_error("unknown --order: '" + text + "'");
}

/// Output stream for --out, or stdout.
class Output {
public:
    explicit Output(const std::string& path) {
        if (!path.empty()) {
            file_ = std::make_unique<std::ofstream>(path);
            if (!*file_) {
                throw config_error("cannot open --out file '" + path + "'");
            }
        }
    }
    std::ostream& stream() { return file_ ? *file_ : std::cout; }

private:
    std::unique_ptr<std::ofstream> file_;
};

void check_format(const Options& o) {
    if (o.format != "csv" && o.format != "json") {
        throw config_error("unknown --format: '" + o.format + "'");
    }
}

int run_bench(const Options& o) {
    check_format(o);
    BenchGrid grid;
    grid.n_log2 = parse_range(o.n_log2);
    grid.lookups_log2 = o.lookups_log2;
    if (!o.variant.empty()) {
        grid.variants = parse_enums(o.variant, all_variants, "--variant");
    }
    grid.fanouts = parse_sizes(o.k, "--k");
    grid.leaf_chunk = o.leaf_chunk;
    grid.pin_budget = o.pin_budget;
    grid.workers = o.workers.empty() ? std::vector<std::size_t>{default_workers()} : parse_sizes(o.workers, "--workers");
    grid.sort_batches = parse_sizes(o.sort_batch, "--sort-batch");
    grid.stage = o.stage;
    grid.schedules = parse_enums(o.schedule, all_schedules, "--schedule");
    grid.reorders = parse_enums(o.reorder, all_reorders, "--reorder");
    grid.order = parse_order(o.order);
    grid.hit_ratio = o.hit_ratio;
    grid.seed = o.seed;
    grid.reps = o.reps;
    grid.validate();
    for (const auto b : grid.sort_batches) {
        for (const auto w : grid.workers) {
            ExecConfig{w, b, grid.stage}.validate();
        }
    }

    Output out(o.out);
    auto& os = out.stream();
    const bool json = o.format == "json";
    if (!json) {
        write_csv_header(os);
    }
    bench_run(grid, [&](const BenchRecord& r) {
        if (json) {
            os << to_json(r).dump() << '\n';
        } else {
            write_csv_row(os, r);
        }
        os.flush();
    });
    return kExitOk;
}

int run_verify(const Options& o) {
    const auto range = parse_range(o.verify_range);
    VerifyOptions opt;
    opt.min_log2 = range.front();
    opt.max_log2 = range.back();
    opt.first_seed = o.verify_seed;
    opt.seeds = o.seeds;
    opt.inject_fault = o.inject_fault;
    if (opt.max_log2 > 24) {
        throw config_error("verify: --n-log2 must stay <= 24");
    }
    const auto report = verify_run(opt, &std::cout);
    std::cout << "verify: " << (report.passed() ? "PASS" : "FAIL") << " arrays=" << report.arrays
              << " checks=" << report.checks << " failures=" << report.failures << '\n';
    return report.passed() ? kExitOk : kExitVerifyFailed;
}

int run_trace(const Options& o) {
    const auto n_log2 = parse_range(o.n_log2).front();
    const auto variants = o.variant.empty() ? std::vector<Variant>{Variant::naive}
                                            : parse_enums(o.variant, all_variants, "--variant");
    if (variants.size() != 1) {
        throw config_error("trace: exactly one --variant expected");
    }
    const auto fanout = parse_sizes(o.k, "--k").front();
    const std::size_t n = std::size_t{1} << n_log2;
    const std::size_t m = std::size_t{1} << o.lookups_log2.value_or(4);
    const auto w = generate_workload<Key>(n, m, o.seed, parse_order(o.order), o.hit_ratio);
    SearchStructures<Key> s(w.build_keys);
    if (variants[0] == Variant::kary) {
        s.build_kary(fanout, o.leaf_chunk);
    } else if (variants[0] != Variant::naive) {
        s.build_pinned(o.pin_budget);
    }

    Output out(o.out);
    std::vector<AccessTrace> traces;
    traces.reserve(m);
    for (std::size_t i = 0; i < m; ++i) {
        traces.push_back(traced_search(s, variants[0], w.lookup_keys[i]).second);
        write_trace_csv(out.stream(), i, traces.back());
    }
    const auto report = batch_locality(traces, default_line_bytes, sizeof(Key));
    std::cerr << "mean_shared_prefix=" << report.mean_shared_prefix << " distinct_lines_per_step=";
    for (std::size_t s = 0; s < report.distinct_lines_per_step.size(); ++s) {
        std::cerr << (s ? "/" : "") << report.distinct_lines_per_step[s];
    }
    std::cerr << '\n';
    return kExitOk;
}

int run_gen(const Options& o) {
    check_format(o);
    const auto n_log2 = parse_range(o.n_log2).front();
    const std::size_t n = std::size_t{1} << n_log2;
    const std::size_t m = o.lookups_log2 ? std::size_t{1} << *o.lookups_log2 : 2 * n;
    const auto w = generate_workload<Key>(n, m, o.seed, parse_order(o.order), o.hit_ratio);

    Output out(o.out);
    auto& os = out.stream();
    if (o.format == "json") {
        nlohmann::json j{{"seed", o.seed},
                         {"order", to_string(w.order)},
                         {"hit_ratio", w.hit_ratio},
                         {"build_keys", std::vector<Key>(w.build_keys.span().begin(), w.build_keys.span().end())},
                         {"lookup_keys", w.lookup_keys}};
        os << j.dump() << '\n';
    } else {
        os << "kind,index,key\n";
        for (std::size_t i = 0; i < n; ++i) {
            os << "build," << i << ',' << w.build_keys[i] << '\n';
        }
        for (std::size_t i = 0; i < m; ++i) {
            os << "lookup," << i << ',' << w.lookup_keys[i] << '\n';
        }
    }
    std::cerr << "build_checksum=" << stream_checksum(w.build_keys.span())
              << " lookup_checksum=" << stream_checksum(std::span<const Key>(w.lookup_keys)) << '\n';
    return kExitOk;
}

void add_shared(CLI::App* cmd, Options& o) {
    cmd->add_option("--n-log2", o.n_log2, "log2 of the build size, or an inclusive range lo:hi");
    cmd->add_option("--lookups-log2", o.lookups_log2, "log2 of the lookup count (default: 2n)");
    cmd->add_option("--variant", o.variant, "naive|steps-pinned|full-pinned|kary (comma list for bench)");
    cmd->add_option("--k", o.k, "K-ary fan-out (comma list for bench)");
    cmd->add_option("--leaf-chunk", o.leaf_chunk, "K-ary leaf range size");
    cmd->add_option("--pin-budget-slots", o.pin_budget, "pinned buffer capacity in keys");
    cmd->add_option("--order", o.order, "random|sorted lookup order");
    cmd->add_option("--hit-ratio", o.hit_ratio, "fraction of lookups drawn from the build set");
    cmd->add_option("--seed", o.seed, "workload seed (first seed for verify)");
    cmd->add_option("--out", o.out, "output file (default: stdout)");
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"searchlab: batched sorted-array search benchmarks"};
    app.require_subcommand(1);
    Options o;

    auto* bench = app.add_subcommand("bench", "run a benchmark grid and emit CSV or JSON lines");
    add_shared(bench, o);
    bench->add_option("--workers", o.workers, "worker count (comma list; default SEARCHLAB_THREADS or cores)");
    bench->add_option("--sort-batch", o.sort_batch, "lookups sorted together (comma list)");
    bench->add_option("--stage", o.stage, "lookups searched in lock-step per worker");
    bench->add_option("--schedule", o.schedule, "static-contiguous|static-strided|dynamic (comma list)");
    bench->add_option("--reorder", o.reorder, "none|lookup|full (comma list)");
    bench->add_option("--reps", o.reps, "repetitions per grid point (>= 3)");
    bench->add_option("--format", o.format, "csv|json");

    auto* verify = app.add_subcommand("verify", "cross-variant equivalence sweep");
    verify->add_option("--n-log2", o.verify_range, "inclusive size range lo:hi (default 0:12)");
    verify->add_option("--seed", o.verify_seed, "first seed (default 1)");
    verify->add_option("--seeds", o.seeds, "number of seeds");
    verify->add_flag("--inject-fault", o.inject_fault, "corrupt one separator per K-ary index");

    auto* trace = app.add_subcommand("trace", "dump per-probe traces: lookup_index,step_rank,region,position");
    add_shared(trace, o);

    auto* gen = app.add_subcommand("gen", "emit a generated workload");
    add_shared(gen, o);
    gen->add_option("--format", o.format, "csv|json");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitConfig;
    }

    try {
        if (bench->parsed()) {
            return run_bench(o);
        }
        if (verify->parsed()) {
            return run_verify(o);
        }
        if (trace->parsed()) {
            return run_trace(o);
        }
        return run_gen(o);
    } catch (const std::invalid_argument& e) {
        std::cerr << "configuration error: " << e.what() << '\n';
        return kExitConfig;
    } catch (const generation_error& e) {
        std::cerr << "configuration error: " << e.what() << '\n';
        return kExitConfig;
    }
}
