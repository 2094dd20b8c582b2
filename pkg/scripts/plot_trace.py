#!/usr/bin/env python3
"""Plot the standard panels from an exported simulation trace CSV.

Usage:
    python scripts/plot_trace.py trace.csv [--out trace.png]

Panels: attack signals, switching index, estimation error vs. bound.
Kept out of the core package so the library itself never imports matplotlib.
"""

import argparse

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("csv", help="trace CSV produced by `resilientobs run`")
    ap.add_argument("--out", default=None, help="output image (default: <csv>.png)")
    args = ap.parse_args()

    with open(args.csv) as fh:
        columns = fh.readline().strip().split(",")
    data = np.loadtxt(args.csv, delimiter=",", skiprows=1)
    col = {name: data[:, i] for i, name in enumerate(columns)}
    t = col["t"]
    p = sum(1 for c in columns if c.startswith("a") and c[1:].isdigit())

    fig, axes = plt.subplots(3, 1, figsize=(8, 9), sharex=True)

    for i in range(1, p + 1):
        a = col[f"a{i}"]
        if np.any(a != 0):
            axes[0].plot(t, a, label=f"sensor {i}", lw=0.8)
    axes[0].set_ylabel("attack")
    if axes[0].lines:
        axes[0].legend(loc="upper right", fontsize=8)
    else:
        axes[0].text(0.5, 0.5, "no attacks", transform=axes[0].transAxes,
                     ha="center", va="center")

    axes[1].step(t, col["sigma"], where="post")
    axes[1].set_ylabel(r"$\sigma$")
    axes[1].set_yticks(sorted(set(col["sigma"].astype(int))))

    axes[2].semilogy(t, np.maximum(col["err_inf"], 1e-16), label="error", lw=0.8)
    axes[2].semilogy(t, col["err_bound"], label="bound", ls="--", lw=0.8)
    axes[2].set_ylabel(r"$\|\hat{x}-x\|_\infty$")
    axes[2].set_xlabel("t [s]")
    axes[2].legend(loc="upper right", fontsize=8)

    fig.tight_layout()
    out = args.out or args.csv.rsplit(".", 1)[0] + ".png"
    fig.savefig(out, dpi=150)
    print(f"wrote {out}")


if __name__ == "__main__":
    main()
