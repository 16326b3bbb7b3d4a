#!/usr/bin/env python3
"""Render experiment CSVs into metric-vs-range plots with bootstrap bands.

Reads the frozen results schema
(`experiment,algorithm,sweep_value,seed,metric,value`), draws one line per
algorithm (mean across seeds at each sweep value) with a shaded 95% bootstrap
confidence band recomputed from the raw per-seed rows (1000 resamples, fixed
seed 0), and writes both an SVG and a PNG.  Rendering is deterministic: the
same CSV produces byte-identical image files.

Usage:
    render.py --csv results.csv --metric l2_error --out fig2.svg [--logx]
"""

from __future__ import annotations

import argparse
import csv
import sys
from collections import defaultdict
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
matplotlib.rcParams["svg.hashsalt"] = "dpse-figures"

import matplotlib.pyplot as plt
import numpy as np

EXPECTED_HEADER = ["experiment", "algorithm", "sweep_value", "seed", "metric", "value"]
BOOTSTRAP_RESAMPLES = 1000
BOOTSTRAP_SEED = 0
CONFIDENCE = 0.95


def load_rows(csv_path: Path) -> list[dict]:
    with open(csv_path, "r", encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header != EXPECTED_HEADER:
            raise SystemExit(
                f"error: unexpected CSV header {header}; expected {EXPECTED_HEADER}"
            )
        rows = []
        for rec in reader:
            if not rec:
                continue
            rows.append(
                dict(
                    experiment=rec[0],
                    algorithm=rec[1],
                    sweep_value=float(rec[2]),
                    seed=int(rec[3]),
                    metric=rec[4],
                    value=float(rec[5]),
                )
            )
    return rows


def bootstrap_band(values: np.ndarray) -> tuple[float, float, float]:
    """Mean and percentile bootstrap interval over seed-level values."""
    mean = float(values.mean())
    if values.size < 2:
        return mean, mean, mean
    gen = np.random.default_rng(BOOTSTRAP_SEED)
    idx = gen.integers(0, values.size, size=(BOOTSTRAP_RESAMPLES, values.size))
    means = values[idx].mean(axis=1)
    lo_q = (1.0 - CONFIDENCE) / 2.0
    lo, hi = np.quantile(means, [lo_q, 1.0 - lo_q])
    return float(lo), mean, float(hi)


def aggregate(rows: list[dict], metric: str) -> dict[str, dict]:
    available = sorted({r["metric"] for r in rows})
    if metric not in available:
        raise SystemExit(
            f"error: metric {metric!r} not present; available metrics: {available}"
        )
    selected = [r for r in rows if r["metric"] == metric and np.isfinite(r["value"])]
    if not selected:
        raise SystemExit(f"error: no finite rows for metric {metric!r}")
    per_curve: dict[str, dict[float, list[float]]] = defaultdict(lambda: defaultdict(list))
    for r in selected:
        per_curve[r["algorithm"]][r["sweep_value"]].append(r["value"])
    curves = {}
    for algorithm in sorted(per_curve):
        sweep = np.array(sorted(per_curve[algorithm]))
        lows, mids, highs = [], [], []
        for s in sweep:
            lo, mid, hi = bootstrap_band(np.array(per_curve[algorithm][s]))
            lows.append(lo)
            mids.append(mid)
            highs.append(hi)
        curves[algorithm] = dict(
            sweep=sweep, low=np.array(lows), mid=np.array(mids), high=np.array(highs)
        )
    return curves


def render(csv_path: Path, metric: str, out_path: Path, logx: bool = False,
           title: str | None = None) -> list[Path]:
    curves = aggregate(load_rows(csv_path), metric)

    fig, ax = plt.subplots(figsize=(6.4, 4.2), dpi=120)
    for algorithm, c in curves.items():
        ax.plot(c["sweep"], c["mid"], marker="o", label=algorithm)
        ax.fill_between(c["sweep"], c["low"], c["high"], alpha=0.2)
    if logx:
        ax.set_xscale("log", base=2)
    ax.set_xlabel("a priori range bound")
    ax.set_ylabel(metric)
    ax.set_title(title or metric)
    ax.legend()
    ax.grid(True, alpha=0.3)
    fig.tight_layout()

    out_path = Path(out_path)
    written = []
    targets = {out_path.suffix.lower().lstrip("."): out_path}
    for ext in ("svg", "png"):
        targets.setdefault(ext, out_path.with_suffix("." + ext))
    for ext, path in sorted(targets.items()):
        fig.savefig(path, format=ext, metadata={"Date": None} if ext == "svg" else None)
        written.append(path)
    plt.close(fig)
    return written


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--csv", required=True, type=Path)
    parser.add_argument("--metric", required=True)
    parser.add_argument("--out", required=True, type=Path)
    parser.add_argument("--logx", action="store_true")
    parser.add_argument("--title", default=None)
    args = parser.parse_args(argv)
    written = render(args.csv, args.metric, args.out, logx=args.logx, title=args.title)
    for path in written:
        print(f"wrote {path}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
