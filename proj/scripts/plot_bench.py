#!/usr/bin/env python3
# Copyright (c) 2026, The searchlab Authors.
# SPDX-License-Identifier: Apache-2.0
"""Plot `searchlab bench` CSV output: lookup time and footprint versus n."""

import argparse

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import pandas as pd  # noqa: E402


def label(row):
    name = row["variant"]
    if name == "kary":
        name += f" K={row['k']}"
    return f"{name} {row['schedule']}/{row['reorder']}/w{row['workers']}/b{row['sort_batch']}"


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("csv")
    parser.add_argument("--out", default="bench.png")
    args = parser.parse_args()

    df = pd.read_csv(args.csv, comment="#")
    df["series"] = df.apply(label, axis=1)
    df["ns_per_lookup"] = df["lookup_ns"] / df["lookups"]

    fig, (ax_time, ax_mem) = plt.subplots(1, 2, figsize=(13, 5))
    for series, group in df.groupby("series"):
        group = group.sort_values("n")
        ax_time.plot(group["n"], group["ns_per_lookup"], marker="o", label=series)
        ax_mem.plot(group["n"], group["footprint_bytes"] / 2**20, marker="o", label=series)
    for ax in (ax_time, ax_mem):
        ax.set_xscale("log", base=2)
        ax.set_xlabel("build set size n")
        ax.grid(True, which="both", alpha=0.3)
    ax_mem.set_yscale("log", base=2)
    ax_time.set_ylabel("median lookup time per key [ns]")
    ax_mem.set_ylabel("footprint [MiB]")
    ax_time.legend(fontsize="small")
    fig.tight_layout()
    fig.savefig(args.out, dpi=120)


if __name__ == "__main__":
    main()
