#!/usr/bin/env python3
"""Plot relative error against missing rate from a sweep results CSV."""
import argparse

import matplotlib.pyplot as plt
import pandas as pd


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("results", help="sweep_results.csv written by `urbancp sweep`")
    ap.add_argument("-o", "--output", default="relative_error.png")
    args = ap.parse_args()

    df = pd.read_csv(args.results)
    df = df[df.status == "ok"]
    kinds = sorted(df.mask_kind.unique())
    fig, axes = plt.subplots(1, len(kinds), figsize=(5 * len(kinds), 4), squeeze=False)
    for ax, kind in zip(axes[0], kinds):
        sub = df[df.mask_kind == kind]
        for (rank, method), g in sub.groupby(["rank", "method"]):
            best = g.groupby("missing_rate").re.min()
            ax.plot(best.index, best.values, marker="o",
                    linestyle="-" if method == "augmented" else "--",
                    label=f"R={rank} {method}")
        ax.set_title(f"{kind} missing values")
        ax.set_xlabel("missing rate")
        ax.set_ylabel("relative error (best seed)")
        ax.legend(fontsize="small")
    fig.tight_layout()
    fig.savefig(args.output, dpi=150)


if __name__ == "__main__":
    main()
