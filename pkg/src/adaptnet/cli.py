"""Command line interface.

Verbs:
  analyze     stability analysis of a configured scenario, no simulation
  run         full pipeline: analysis, simulation, CSV + report emission
  bench       wall-clock scaling table over topologies and network sizes
  topologies  print the built-in topologies at a given size

The output directory resolves in priority order: --out flag, the
ADAPTNET_OUT_DIR environment variable, then ./out.
"""

from __future__ import annotations

import argparse
import os
import sys
from pathlib import Path

import numpy as np

from .config import parse_config
from .errors import AdaptnetError
from .graph import BUILTIN_TOPOLOGIES, laplacian_bundle, normalize_balanced
from .scenario import (
    analyze_scenario,
    emit_report,
    run_scenario,
    timing_benchmark,
    write_benchmark_csv,
)

OUT_DIR_ENV = "ADAPTNET_OUT_DIR"


def _add_common(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", type=Path, help="path to a key=value scenario file")
    parser.add_argument("--out", type=Path, help="output directory")
    parser.add_argument("--seed", type=int, help="override the config seed")
    parser.add_argument(
        "--force-unstable",
        action="store_true",
        help="simulate even when the coupling operator is not certified stable",
    )


def _resolve_out(args) -> Path:
    if args.out is not None:
        return args.out
    env = os.environ.get(OUT_DIR_ENV)
    return Path(env) if env else Path("out")


def _load_config(args):
    if args.config is None:
        raise AdaptnetError("a --config file is required for this command")
    cfg = parse_config(Path(args.config).read_text())
    if args.seed is not None:
        cfg.seed = args.seed
    return cfg


def _cmd_analyze(args) -> int:
    cfg = _load_config(args)
    _, op, report, normalized = analyze_scenario(cfg)
    print(f"scenario: {cfg.mode} / {cfg.topology} / m={cfg.m}")
    if normalized:
        print("note: input network was unbalanced; weights renormalized")
    print(f"laplacian min real eigenvalue: {report.lambda_min_L:.6g}")
    print(f"operator stable: {report.stable}")
    if cfg.mode == "continuous":
        print(f"max real eigenvalue: {report.max_real_eig:.6g}")
        print(
            f"spectral condition: holds={report.spectral_holds}"
            f" margin={report.spectral_margin:.6g}"
            f" (alpha_H={report.alpha_H:.6g}, alpha_F={report.alpha_F:.6g})"
        )
        print(f"separable LMI verified: {report.lmi_verified}")
    else:
        print(f"spectral radius: {report.spectral_radius:.6g}")
        print(
            f"spectral condition: holds={report.spectral_holds}"
            f" margin={report.spectral_margin:.6g}"
            f" (rho_S={report.rho_S:.6g}, rho_A={report.rho_A:.6g})"
        )
    if np.isfinite(report.robust_margin):
        print(f"robust margin: {report.robust_margin:.6g}")
    if np.isfinite(report.iss_constant):
        print(
            f"ISS constant: {report.iss_constant:.6g}"
            f" (epsilon* = {report.epsilon_star:.6g})"
        )
    return 0


def _cmd_run(args) -> int:
    cfg = _load_config(args)
    out_dir = _resolve_out(args)
    report = run_scenario(cfg, out_dir, force_unstable=args.force_unstable)
    text_path, record_path = emit_report(report, out_dir)
    print(Path(text_path).read_text(), end="")
    print(f"report: {text_path}")
    print(f"record: {record_path}")
    return 0


def _cmd_bench(args) -> int:
    out_dir = _resolve_out(args)
    sizes = [int(s) for s in args.sizes.split(",")]
    topologies = args.topologies.split(",")
    rows = timing_benchmark(args.mode, topologies, sizes, steps=args.steps)
    csv_path = Path(out_dir) / f"bench_{args.mode}.csv"
    write_benchmark_csv(rows, csv_path)
    print(f"{'topology':<10} {'m':>6} {'seconds':>10}")
    for topo, m, secs in rows:
        print(f"{topo:<10} {m:>6} {secs:>10.3f}")
    print(f"csv: {csv_path}")
    return 0


def _cmd_topologies(args) -> int:
    for name, builder in BUILTIN_TOPOLOGIES.items():
        net = normalize_balanced(builder(args.m))
        bundle = laplacian_bundle(net)
        print(f"{name} (m={args.m}):")
        print(f"  sensing weights:\n{np.array2string(net.sensing_weights, prefix='  ')}")
        print(f"  source weights: {np.array2string(net.source_weights)}")
        print(f"  laplacian min real eigenvalue: {bundle.min_real_eig:.6g}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="adaptnet",
        description="Distributed adaptive estimation over directed sensor networks",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_analyze = sub.add_parser("analyze", help="stability analysis only")
    _add_common(p_analyze)
    p_analyze.set_defaults(func=_cmd_analyze)

    p_run = sub.add_parser("run", help="analysis + simulation + report")
    _add_common(p_run)
    p_run.set_defaults(func=_cmd_run)

    p_bench = sub.add_parser("bench", help="wall-clock scaling benchmark")
    _add_common(p_bench)
    p_bench.add_argument("--mode", choices=("continuous", "discrete"), default="discrete")
    p_bench.add_argument("--sizes", default="100,150,200,300")
    p_bench.add_argument("--topologies", default="star,cyclic,path")
    p_bench.add_argument("--steps", type=int, default=300)
    p_bench.set_defaults(func=_cmd_bench)

    p_topo = sub.add_parser("topologies", help="print the built-in topologies")
    p_topo.add_argument("--m", type=int, default=4)
    p_topo.set_defaults(func=_cmd_topologies)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except AdaptnetError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
