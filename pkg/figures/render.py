#!/usr/bin/env python3
"""Render simulator CSV logs into figures.

Consumes only the documented CSV formats:
  trajectory log   t|k, err_total, err_1..err_m, ...
  states log       t|k, x0_1..x0_n, x{i}_{j} per agent
  benchmark table  topology, m, seconds

Kinds:
  trajectories    per-component source vs. agent state curves (states CSV)
  error-norms     log-y overlay of err_total across runs (trajectory CSVs)
  benchmark-bars  grouped wall-clock bars by topology over m (benchmark CSV)

Rendering is deterministic: fixed figure geometry, fonts, and per-agent
colors, and no timestamp metadata in the output file.
"""

from __future__ import annotations

import argparse
import csv
import re
import sys
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

FIGSIZE = (8.0, 4.5)
DPI = 120

matplotlib.rcParams.update(
    {
        "font.family": "DejaVu Sans",
        "font.size": 10,
        "svg.hashsalt": "figures",
        "axes.prop_cycle": plt.cycler(
            color=plt.cm.tab10(np.linspace(0.0, 1.0, 10))
        ),
    }
)


class CsvFormatError(ValueError):
    """Input CSV does not match the documented contract."""


def _read_rows(path):
    path = Path(path)
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows:
        raise CsvFormatError(f"{path}: file is empty")
    return rows


def _parse_floats(path, rows, width):
    data = np.empty((len(rows) - 1, width))
    for idx, row in enumerate(rows[1:], start=2):
        if len(row) != width:
            raise CsvFormatError(
                f"{path}: row {idx}: expected {width} fields, got {len(row)}"
            )
        for j, cell in enumerate(row):
            try:
                data[idx - 2, j] = float(cell)
            except ValueError:
                raise CsvFormatError(
                    f"{path}: row {idx}: non-numeric value {cell!r}"
                ) from None
    return data


def load_trajectory_csv(path):
    """Trajectory log -> (time axis, err_total, per-agent errors, header)."""
    rows = _read_rows(path)
    header = rows[0]
    if len(header) < 3 or header[0] not in ("t", "k") or header[1] != "err_total":
        raise CsvFormatError(f"{path}: row 1: not a trajectory log header: {header}")
    agent_cols = [i for i, name in enumerate(header) if re.fullmatch(r"err_\d+", name)]
    data = _parse_floats(path, rows, len(header))
    return data[:, 0], data[:, 1], data[:, agent_cols], header[0]


def load_states_csv(path):
    """States log -> (time axis, source states (T,n), agent states (T,m,n))."""
    rows = _read_rows(path)
    header = rows[0]
    if len(header) < 2 or header[0] not in ("t", "k"):
        raise CsvFormatError(f"{path}: row 1: not a states log header: {header}")
    src_cols = [i for i, name in enumerate(header) if re.fullmatch(r"x0_\d+", name)]
    agent_cols = {}
    for i, name in enumerate(header):
        match = re.fullmatch(r"x(\d+)_(\d+)", name)
        if match and match.group(1) != "0":
            agent_cols[(int(match.group(1)), int(match.group(2)))] = i
    if not src_cols or not agent_cols:
        raise CsvFormatError(f"{path}: row 1: no state columns found: {header}")
    n = len(src_cols)
    m = max(i for i, _ in agent_cols)
    data = _parse_floats(path, rows, len(header))
    agents = np.empty((data.shape[0], m, n))
    for (i, j), col in agent_cols.items():
        agents[:, i - 1, j - 1] = data[:, col]
    return data[:, 0], data[:, src_cols], agents, header[0]


def load_benchmark_csv(path):
    """Benchmark table -> list of (topology, m, seconds)."""
    rows = _read_rows(path)
    if rows[0] != ["topology", "m", "seconds"]:
        raise CsvFormatError(f"{path}: row 1: not a benchmark header: {rows[0]}")
    out = []
    for idx, row in enumerate(rows[1:], start=2):
        if len(row) != 3:
            raise CsvFormatError(f"{path}: row {idx}: expected 3 fields")
        try:
            out.append((row[0], int(row[1]), float(row[2])))
        except ValueError:
            raise CsvFormatError(f"{path}: row {idx}: malformed values {row!r}") from None
    return out


def render_trajectories(inputs, out):
    if len(inputs) != 1:
        raise CsvFormatError("trajectories takes exactly one states CSV")
    axis, src, agents, time_name = load_states_csv(inputs[0])
    n = src.shape[1]
    m = agents.shape[1]
    fig, axes = plt.subplots(n, 1, figsize=(FIGSIZE[0], 2.5 * n), sharex=True)
    axes = np.atleast_1d(axes)
    for j in range(n):
        ax = axes[j]
        ax.plot(axis, src[:, j], color="black", linewidth=1.8,
                label="source" if j == 0 else None)
        for i in range(m):
            ax.plot(axis, agents[:, i, j], linewidth=0.9,
                    label=f"agent {i + 1}" if j == 0 else None)
        ax.set_ylabel(f"component {j + 1}")
        ax.grid(True, alpha=0.3)
    axes[-1].set_xlabel(time_name)
    axes[0].legend(loc="upper right", ncol=2, fontsize=8)
    fig.suptitle("source and agent state trajectories")
    _save(fig, out)
    return fig


def render_error_norms(inputs, out):
    if not inputs:
        raise CsvFormatError("error-norms needs at least one trajectory CSV")
    fig, ax = plt.subplots(figsize=FIGSIZE)
    time_name = "t"
    for path in inputs:
        axis, total, _, time_name = load_trajectory_csv(path)
        # log-y cannot render exact zeros; clip to a tiny positive floor
        ax.plot(axis, np.maximum(total, 1e-300), label=Path(path).stem)
    ax.set_yscale("log")
    ax.set_xlabel(time_name)
    ax.set_ylabel("stacked error norm")
    ax.grid(True, which="both", alpha=0.3)
    ax.legend(loc="upper right")
    fig.suptitle("estimation error decay")
    _save(fig, out)
    return fig


def render_benchmark_bars(inputs, out):
    if len(inputs) != 1:
        raise CsvFormatError("benchmark-bars takes exactly one benchmark CSV")
    rows = load_benchmark_csv(inputs[0])
    topologies = sorted({topo for topo, _, _ in rows})
    sizes = sorted({m for _, m, _ in rows})
    lookup = {(topo, m): secs for topo, m, secs in rows}
    fig, ax = plt.subplots(figsize=FIGSIZE)
    width = 0.8 / max(len(topologies), 1)
    base = np.arange(len(sizes), dtype=float)
    for pos, topo in enumerate(topologies):
        heights = [lookup.get((topo, m), 0.0) for m in sizes]
        ax.bar(base + pos * width, heights, width=width, label=topo)
    ax.set_xticks(base + 0.4 - width / 2.0)
    ax.set_xticklabels([str(m) for m in sizes])
    ax.set_xlabel("agent count m")
    ax.set_ylabel("wall-clock seconds")
    ax.legend()
    fig.suptitle("simulation runtime by topology")
    _save(fig, out)
    return fig


def _save(fig, out):
    out = Path(out)
    out.parent.mkdir(parents=True, exist_ok=True)
    kwargs = {"dpi": DPI}
    if out.suffix.lower() == ".svg":
        kwargs["metadata"] = {"Date": None}  # keep output byte-stable
    fig.savefig(out, **kwargs)


KINDS = {
    "trajectories": render_trajectories,
    "error-norms": render_error_norms,
    "benchmark-bars": render_benchmark_bars,
}


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="render", description="Render simulator CSV logs into figures"
    )
    parser.add_argument(
        "--input", action="append", required=True, help="input CSV (repeatable)"
    )
    parser.add_argument("--kind", choices=sorted(KINDS), required=True)
    parser.add_argument("--out", required=True, help="output image path")
    args = parser.parse_args(argv)
    try:
        fig = KINDS[args.kind](args.input, args.out)
    except (CsvFormatError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    plt.close(fig)
    return 0


if __name__ == "__main__":
    sys.exit(main())
