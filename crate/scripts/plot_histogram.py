#!/usr/bin/env python3
"""Plot a simulated run-length histogram with its negative binomial overlay.

Usage:
    grc simulate --n0 100 --k 5 --runs 100000 --seed 1 --histogram-out hist.csv
    python3 scripts/plot_histogram.py hist.csv [-o hist.png]
"""

import argparse
import csv

import matplotlib.pyplot as plt


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("csv_path")
    ap.add_argument("-o", "--out", help="write the figure instead of showing it")
    args = ap.parse_args()

    xs, counts, pmf = [], [], []
    with open(args.csv_path, newline="") as fh:
        for row in csv.DictReader(fh):
            xs.append(int(row["x"]))
            counts.append(int(row["count"]))
            pmf.append(float(row["negbin_pmf"]))

    total = sum(counts)
    fig, ax = plt.subplots(figsize=(7, 4.5))
    ax.bar(xs, [c / total for c in counts], width=1.0, alpha=0.5,
           label=f"simulated ({total} runs)")
    ax.plot(xs, pmf, color="C3", linewidth=1.5, label="negative binomial")
    ax.set_xlabel("total number of guesses")
    ax.set_ylabel("probability")
    ax.legend()
    fig.tight_layout()

    if args.out:
        fig.savefig(args.out, dpi=150)
    else:
        plt.show()


if __name__ == "__main__":
    main()
