#!/usr/bin/env python3
"""Render analysis CSVs as figures.

Three kinds, matching the CSV schemas the analyzer emits:

  series     label,N,fidelity            fidelity vs circuit size
  bounds     task,n,m,N,circuit_params,target_params
                                         parameter counts vs circuit size,
                                         one line per entangler arity, with
                                         the target count as a horizontal line
  histogram  bin_low,bin_high,count      configuration counts per infidelity
                                         decade, log-x, the clamp bin at 1e-12

The scripts never recompute physics; they consume CSV files only.

Usage: plot.py --kind histogram --in hist.csv --out hist.png
"""

from __future__ import annotations

import argparse
import csv
import sys

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

EXPECTED_HEADERS = {
    "series": ["label", "N", "fidelity"],
    "bounds": ["task", "n", "m", "N", "circuit_params", "target_params"],
    "histogram": ["bin_low", "bin_high", "count"],
}

PNG_METADATA = {"Software": "qcsynth-figures"}  # no timestamps: identical
# inputs give identical bytes


def read_rows(path, kind):
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        rows = list(reader)
    if not rows:
        raise ValueError(f"{path}: empty input")
    header, body = rows[0], rows[1:]
    if header != EXPECTED_HEADERS[kind]:
        raise ValueError(
            f"{path}: header {header} does not match the {kind} schema "
            f"{EXPECTED_HEADERS[kind]}"
        )
    if not body:
        raise ValueError(f"{path}: no data rows")
    return body


def render_series(rows, ax):
    by_label = {}
    for label, n, fid in rows:
        by_label.setdefault(label, []).append((int(n), float(fid)))
    markers = ["o", "s", "^", "x", "D", "+"]
    for i, (label, pts) in enumerate(sorted(by_label.items())):
        pts.sort()
        ax.plot(
            [p[0] for p in pts],
            [p[1] for p in pts],
            marker=markers[i % len(markers)],
            fillstyle="none",
            label=label,
        )
    ax.set_xlabel("circuit size N")
    ax.set_ylabel("maximum fidelity F")
    ax.set_ylim(None, 1.02)
    if len(by_label) > 1:
        ax.legend()
    ax.grid(True, alpha=0.3)


def render_bounds(rows, ax):
    by_m = {}
    target = None
    for task, n, m, N, cparams, tparams in rows:
        by_m.setdefault(int(m), []).append((int(N), int(cparams)))
        target = int(tparams)
    markers = ["o", "s", "^", "D"]
    for i, (m, pts) in enumerate(sorted(by_m.items())):
        pts.sort()
        ax.plot(
            [p[0] for p in pts],
            [p[1] for p in pts],
            marker=markers[i % len(markers)],
            fillstyle="none",
            label=f"{m}-qubit entanglers",
        )
    ax.axhline(target, color="c", label="target parameters")
    ax.set_xlabel("circuit size N")
    ax.set_ylabel("independent parameters")
    ax.legend()
    ax.grid(True, alpha=0.3)


def render_histogram(rows, ax):
    lows = [float(r[0]) for r in rows]
    highs = [float(r[1]) for r in rows]
    counts = [int(r[2]) for r in rows]
    if any(h <= l for l, h in zip(lows, highs)):
        raise ValueError("bin edges must be increasing")
    # bars span their bins on a log axis; the first bin is the clamp bin,
    # holding everything at or below its lower edge
    ax.bar(
        lows,
        counts,
        width=[h - l for l, h in zip(lows, highs)],
        align="edge",
        edgecolor="black",
        linewidth=0.5,
    )
    ax.set_xscale("log")
    ax.set_xlim(lows[0] * 0.5, highs[-1] * 1.5)
    ax.set_xlabel("infidelity 1-F")
    ax.set_ylabel("configurations")
    ax.grid(True, axis="y", alpha=0.3)


RENDERERS = {
    "series": render_series,
    "bounds": render_bounds,
    "histogram": render_histogram,
}


def render(kind, in_csv, out_path=None):
    """Render one CSV; returns the figure (saved to out_path if given)."""
    rows = read_rows(in_csv, kind)
    fig, ax = plt.subplots(figsize=(6.4, 4.2), dpi=120)
    RENDERERS[kind](rows, ax)
    fig.tight_layout()
    if out_path is not None:
        fig.savefig(out_path, metadata=PNG_METADATA if str(out_path).endswith(".png") else None)
    return fig


def main(argv=None):
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--kind", choices=sorted(RENDERERS), required=True)
    parser.add_argument("--in", dest="in_csv", required=True)
    parser.add_argument("--out", required=True)
    args = parser.parse_args(argv)
    fig = render(args.kind, args.in_csv, args.out)
    plt.close(fig)
    print(f"wrote {args.out}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
