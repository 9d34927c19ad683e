#!/usr/bin/env python3
"""Plot cumulative expected guesses per stage from `grc compare` CSV output.

Usage:
    grc compare --n0 100 --k 5 --format csv --out compare.csv
    python3 scripts/plot_compare.py compare.csv [-o compare.png]
"""

import argparse
import csv
from collections import defaultdict

import matplotlib.pyplot as plt


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("csv_path")
    ap.add_argument("-o", "--out", help="write the figure instead of showing it")
    args = ap.parse_args()

    series = defaultdict(lambda: ([], []))
    optimum = None
    with open(args.csv_path, newline="") as fh:
        for row in csv.DictReader(fh):
            if row["method"] == "theoretical_optimum":
                optimum = float(row["cumulative_expected"])
                continue
            xs, ys = series[row["method"]]
            xs.append(int(row["stage"]))
            ys.append(float(row["cumulative_expected"]))

    fig, ax = plt.subplots(figsize=(7, 4.5))
    for method, (xs, ys) in sorted(series.items()):
        ax.plot(xs, ys, marker="o", markersize=3, label=method)
    if optimum is not None:
        ax.axhline(optimum, linestyle="--", color="gray", linewidth=1,
                   label=f"e ln C = {optimum:.2f}")
    ax.set_xlabel("stage")
    ax.set_ylabel("cumulative expected guesses")
    ax.set_yscale("log")
    ax.legend()
    fig.tight_layout()

    if args.out:
        fig.savefig(args.out, dpi=150)
    else:
        plt.show()


if __name__ == "__main__":
    main()
