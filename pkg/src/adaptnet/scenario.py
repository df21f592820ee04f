"""Scenario orchestration: network assembly, analysis, simulation, reports.

The pipeline is: build network -> balance check (with automatic
normalization) -> reachability check -> coupling operator -> stability
checks -> certificates -> simulate -> tail-bound evaluation -> CSV and
report emission. Each stage failure is surfaced with its stage name.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import coupling, graph
from .config import ScenarioConfig
from .continuous import ContinuousSource, simulate_continuous
from .discrete import DiscreteSource, simulate_discrete
from .errors import AdaptnetError, StabilityError
from .trajlog import FLOAT_FMT
from .uncertainty import perturbed_pair


@dataclass
class RunReport:
    mode: str
    topology: str
    m: int
    seed: int
    normalized: bool
    stable: bool
    spectral_holds: bool
    spectral_margin: float
    lmi_verified: bool
    iss_constant: float
    final_error: float
    tail_sup: float
    iss_bound: float
    iss_pass: bool
    disturbance: bool
    wall_seconds: float
    log_csv: str = ""
    states_csv: str = ""
    notes: list = field(default_factory=list)


class _Stage:
    """Context manager that renames any package error with its stage."""

    def __init__(self, name: str):
        self.name = name

    def __enter__(self):
        return self

    def __exit__(self, exc_type, exc, tb):
        if exc is not None and isinstance(exc, AdaptnetError):
            raise type(exc)(f"stage {self.name!r}: {exc}") from exc
        return False


def build_scenario_network(cfg: ScenarioConfig):
    """Network + Laplacian bundle for a config; returns (bundle, normalized)."""
    with _Stage("build-network"):
        if cfg.topology == "custom":
            net = graph.build_network(cfg.sensing_edges, cfg.source_edges, cfg.m)
        elif cfg.topology == "cyclic":
            net = graph.cyclic_network(cfg.m, cfg.ring_weight)
        else:
            net = graph.BUILTIN_TOPOLOGIES[cfg.topology](cfg.m)
    normalized = False
    if not net.is_balanced():
        with _Stage("balance"):
            net = graph.normalize_balanced(net)
        normalized = True
    with _Stage("laplacian"):
        bundle = graph.laplacian_bundle(net)
    return bundle, normalized


def _initial_states(cfg: ScenarioConfig, rng: np.random.Generator):
    n = cfg.n
    if cfg.mode == "continuous":
        pattern = [1.0, -0.5]
    else:
        pattern = [1.0, -0.6]
    x0 = np.array([pattern[i % 2] for i in range(n)])
    agents = rng.uniform(-1.0, 1.0, size=(cfg.m, n))
    return x0, agents


def _build_source(cfg: ScenarioConfig, rng: np.random.Generator):
    disturb = cfg.disturbance_signal if cfg.disturbance else None
    if cfg.mode == "continuous":
        f, g = perturbed_pair(cfg.f_star, cfg.g_star, cfg.f_bound, cfg.g_bound, rng)
        return ContinuousSource(f=f, g=g, excitation=cfg.excitation, disturbance=disturb)
    a, b = perturbed_pair(cfg.a_star, cfg.b_star, cfg.a_bound, cfg.b_bound, rng)
    return DiscreteSource(a=a, b=b, excitation=cfg.excitation, disturbance=disturb)


def _observer_blocks(cfg: ScenarioConfig):
    scale = cfg.h_scale if cfg.mode == "continuous" else cfg.s_scale
    return [scale * np.eye(cfg.n) for _ in range(cfg.m)]


def analyze_scenario(cfg: ScenarioConfig):
    """Stability analysis only: (bundle, operator, StabilityReport, source)."""
    bundle, normalized = build_scenario_network(cfg)
    rng = np.random.default_rng(cfg.seed)
    source = _build_source(cfg, rng)
    blocks = _observer_blocks(cfg)
    with _Stage("stability-analysis"):
        if cfg.mode == "continuous":
            op, report = coupling.analyze(
                bundle,
                blocks,
                source.f,
                "continuous",
                nominal_source=cfg.f_star,
                uncertainty_bound=cfg.f_bound,
            )
        else:
            op, report = coupling.analyze(
                bundle,
                blocks,
                source.a,
                "discrete",
                nominal_source=cfg.a_star,
                uncertainty_bound=cfg.a_bound,
            )
    return bundle, op, report, normalized


def run_scenario(
    cfg: ScenarioConfig, out_dir, force_unstable: bool = False
) -> RunReport:
    """Full pipeline; writes trajectory and state CSVs into ``out_dir``."""
    t_start = time.perf_counter()
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    bundle, op, stab, normalized = analyze_scenario(cfg)
    if not stab.stable and not force_unstable:
        raise StabilityError(
            "stage 'stability-gate': coupling operator is not certified stable; "
            "rerun with the unstable override to simulate anyway"
        )
    rng = np.random.default_rng(cfg.seed)
    source = _build_source(cfg, rng)
    x0_init, agent_init = _initial_states(cfg, rng)
    blocks = _observer_blocks(cfg)

    with _Stage("simulate"):
        if cfg.mode == "continuous":
            run = simulate_continuous(
                bundle,
                np.stack(blocks),
                source,
                cfg.gamma_phi,
                cfg.gamma_psi,
                cfg.horizon,
                x0_init,
                agent_init,
                p_c=stab.P,
                rtol=cfg.rtol,
                atol=cfg.atol,
                n_out=cfg.samples,
            )
            log = run.log
            times = log.t
            tail_mask = times >= times[-1] * 2.0 / 3.0
        else:
            run = simulate_discrete(
                bundle,
                np.stack(blocks),
                source,
                cfg.gamma,
                cfg.floor,
                cfg.steps,
                x0_init,
                agent_init,
            )
            log = run.log
            tail_mask = log.k >= (2 * cfg.steps) // 3

    log_csv = out_dir / f"{cfg.mode}_{cfg.topology}_m{cfg.m}.csv"
    states_csv = out_dir / f"{cfg.mode}_{cfg.topology}_m{cfg.m}_states.csv"
    with _Stage("emit-csv"):
        log.write_csv(log_csv)
        log.write_states_csv(states_csv)

    tail_sup = float(np.max(log.total_error[tail_mask]))
    dist_bound = cfg.disturbance_signal.norm_bound() if cfg.disturbance else 0.0
    iss_bound = stab.iss_constant * np.sqrt(cfg.m) * dist_bound
    iss_pass = bool(
        not cfg.disturbance
        or (np.isfinite(stab.iss_constant) and tail_sup <= iss_bound)
    )
    report = RunReport(
        mode=cfg.mode,
        topology=cfg.topology,
        m=cfg.m,
        seed=cfg.seed,
        normalized=normalized,
        stable=stab.stable,
        spectral_holds=stab.spectral_holds,
        spectral_margin=stab.spectral_margin,
        lmi_verified=stab.lmi_verified,
        iss_constant=stab.iss_constant,
        final_error=float(log.total_error[-1]),
        tail_sup=tail_sup,
        iss_bound=float(iss_bound),
        iss_pass=iss_pass,
        disturbance=cfg.disturbance,
        wall_seconds=time.perf_counter() - t_start,
        log_csv=str(log_csv),
        states_csv=str(states_csv),
    )
    if normalized:
        report.notes.append("input network was unbalanced; weights renormalized")
    return report


_REPORT_FLOATS = (
    "spectral_margin",
    "iss_constant",
    "final_error",
    "tail_sup",
    "iss_bound",
    "wall_seconds",
)
_REPORT_BOOLS = (
    "normalized",
    "stable",
    "spectral_holds",
    "lmi_verified",
    "iss_pass",
    "disturbance",
)
_REPORT_INTS = ("m", "seed")
_REPORT_STRS = ("mode", "topology", "log_csv", "states_csv")


def emit_report(report: RunReport, out_dir) -> tuple:
    """Write the human-readable report and the key=value record; return paths."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    text_path = out_dir / "report.txt"
    record_path = out_dir / "report.kv"
    lines = [
        f"scenario: {report.mode} / {report.topology} / m={report.m} (seed {report.seed})",
        f"operator stable: {report.stable}"
        f" (spectral condition holds: {report.spectral_holds},"
        f" margin {report.spectral_margin:.6g}, LMI verified: {report.lmi_verified})",
        f"final error norm: {report.final_error:.6g}",
        f"tail sup error: {report.tail_sup:.6g}",
    ]
    if report.disturbance:
        lines.append(
            f"ISS bound: {report.iss_bound:.6g}"
            f" (constant {report.iss_constant:.6g}) -> "
            + ("PASS" if report.iss_pass else "FAIL")
        )
    else:
        lines.append("ISS bound: not evaluated (disturbance off)")
    lines.append(f"wall time: {report.wall_seconds:.3f} s")
    lines.append(f"trajectory csv: {report.log_csv}")
    lines.append(f"states csv: {report.states_csv}")
    lines.extend(f"note: {note}" for note in report.notes)
    text_path.write_text("\n".join(lines) + "\n")

    record = []
    for name in _REPORT_STRS:
        record.append(f"{name}={getattr(report, name)}")
    for name in _REPORT_INTS:
        record.append(f"{name}={getattr(report, name)}")
    for name in _REPORT_BOOLS:
        record.append(f"{name}={'true' if getattr(report, name) else 'false'}")
    for name in _REPORT_FLOATS:
        record.append(f"{name}={FLOAT_FMT % getattr(report, name)}")
    record_path.write_text("\n".join(record) + "\n")
    return text_path, record_path


def parse_report_record(text: str) -> RunReport:
    """Inverse of the key=value record written by emit_report."""
    values = {}
    for line in text.splitlines():
        line = line.strip()
        if not line:
            continue
        key, val = line.split("=", 1)
        values[key] = val
    kwargs = {}
    for name in _REPORT_STRS:
        kwargs[name] = values[name]
    for name in _REPORT_INTS:
        kwargs[name] = int(values[name])
    for name in _REPORT_BOOLS:
        kwargs[name] = values[name] == "true"
    for name in _REPORT_FLOATS:
        kwargs[name] = float(values[name])
    return RunReport(**kwargs)


def timing_benchmark(
    mode: str, topologies: list, sizes: list, steps: int = 300, horizon: float = 30.0
) -> list:
    """Wall-clock table rows (topology, m, seconds), simulation only.

    No certificates or dense operators are built; the continuous runs use the
    identity adaptation weight so per-step cost stays near-linear in m for
    the sparse built-in topologies.
    """
    from .config import parse_config

    rows = []
    for topology in topologies:
        for m in sizes:
            cfg = parse_config(f"mode={mode}\ntopology={topology}\nm={m}\n")
            cfg.steps = steps
            cfg.horizon = horizon
            bundle, _ = build_scenario_network(cfg)
            rng = np.random.default_rng(cfg.seed)
            source = _build_source(cfg, rng)
            x0_init, agent_init = _initial_states(cfg, rng)
            blocks = np.stack(_observer_blocks(cfg))
            start = time.perf_counter()
            if mode == "continuous":
                simulate_continuous(
                    bundle,
                    blocks,
                    source,
                    cfg.gamma_phi,
                    cfg.gamma_psi,
                    cfg.horizon,
                    x0_init,
                    agent_init,
                    p_c=None,
                    rtol=cfg.rtol,
                    atol=cfg.atol,
                    n_out=cfg.samples,
                )
            else:
                simulate_discrete(
                    bundle,
                    blocks,
                    source,
                    cfg.gamma,
                    cfg.floor,
                    cfg.steps,
                    x0_init,
                    agent_init,
                )
            rows.append((topology, m, time.perf_counter() - start))
    return rows


def write_benchmark_csv(rows: list, path) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    lines = ["topology,m,seconds"]
    lines.extend(f"{topo},{m},{FLOAT_FMT % secs}" for topo, m, secs in rows)
    path.write_text("\n".join(lines) + "\n")
