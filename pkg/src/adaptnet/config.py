"""Scenario configuration: flat key=value documents with dotted sections.

Format: one assignment per line, ``#`` starts a comment, keys use dotted
section prefixes (``run.horizon = 30``). Matrices are written row by row with
``;`` between rows and ``,`` between entries. Signals are written as
``amp:freq:phase`` terms joined by ``,`` within a component and ``|`` between
components.

Every key has a default taken from the reference benchmark scenario, so the
minimal valid document is ``mode=... topology=... m=...``. Unknown keys and
out-of-range values are rejected with an error naming the key.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigError
from . import signals as sig
from .signals import SignalSpec

MODES = ("continuous", "discrete")
TOPOLOGIES = ("star", "cyclic", "path", "custom")


@dataclass
class ScenarioConfig:
    mode: str
    topology: str
    m: int
    seed: int = 12345
    ring_weight: float = 0.3
    sensing_edges: list = field(default_factory=list)  # custom topology only
    source_edges: list = field(default_factory=list)
    # continuous source
    f_star: np.ndarray = None
    g_star: np.ndarray = None
    f_bound: float = 0.55
    g_bound: float = 0.50
    # discrete source
    a_star: np.ndarray = None
    b_star: np.ndarray = None
    a_bound: float = 0.10
    b_bound: float = 0.07
    excitation: SignalSpec = None
    disturbance_signal: SignalSpec = None
    disturbance: bool = False
    # observers
    h_scale: float = -2.0
    s_scale: float = 0.5
    gamma_phi: float = 10.0
    gamma_psi: float = 10.0
    gamma: float = 1.3
    floor: float = 0.01
    # run
    horizon: float = 30.0
    rtol: float = 1e-6
    atol: float = 1e-8
    steps: int = 300
    samples: int = 501
    # certificate
    epsilon_search: bool = True

    @property
    def n(self) -> int:
        src = self.f_star if self.mode == "continuous" else self.a_star
        return src.shape[0]

    @property
    def p(self) -> int:
        src = self.g_star if self.mode == "continuous" else self.b_star
        return src.shape[1]


def _default_continuous_nominals():
    return np.array([[0.0, 1.0], [-1.0, -0.5]]), np.array([[0.0], [1.0]])


def _default_discrete_nominals():
    return np.array([[0.9, 0.1], [-0.1, 0.95]]), np.array([[0.05], [0.10]])


def _parse_matrix(key: str, text: str) -> np.ndarray:
    try:
        rows = [
            [float(x) for x in row.split(",")]
            for row in text.split(";")
            if row.strip()
        ]
        mat = np.array(rows, dtype=float)
    except ValueError as exc:
        raise ConfigError(f"key {key!r}: malformed matrix {text!r}") from exc
    if mat.ndim != 2 or mat.size == 0:
        raise ConfigError(f"key {key!r}: matrix must be nonempty and rectangular")
    return mat


def _parse_signal(key: str, text: str) -> SignalSpec:
    components = []
    for comp in text.split("|"):
        terms = []
        for term in comp.split(","):
            term = term.strip()
            if not term:
                continue
            parts = term.split(":")
            if len(parts) not in (2, 3):
                raise ConfigError(
                    f"key {key!r}: term {term!r} must be amp:freq or amp:freq:phase"
                )
            try:
                vals = [float(x) for x in parts]
            except ValueError as exc:
                raise ConfigError(f"key {key!r}: non-numeric term {term!r}") from exc
            phase = vals[2] if len(vals) == 3 else 0.0
            terms.append(sig.SinusoidTerm(vals[0], vals[1], phase))
        components.append(tuple(terms))
    return SignalSpec(components=tuple(components))


def _parse_edges(key: str, text: str, with_target: bool) -> list:
    edges = []
    for chunk in text.split(","):
        chunk = chunk.strip()
        if not chunk:
            continue
        parts = chunk.split(":")
        want = 3 if with_target else 2
        if len(parts) != want:
            raise ConfigError(f"key {key!r}: edge {chunk!r} needs {want} fields")
        try:
            idx = [int(x) for x in parts[:-1]]
            weight = float(parts[-1])
        except ValueError as exc:
            raise ConfigError(f"key {key!r}: malformed edge {chunk!r}") from exc
        edges.append(tuple(idx) + (weight,))
    return edges


def _to_bool(key: str, text: str) -> bool:
    lowered = text.lower()
    if lowered in ("on", "true", "yes", "1"):
        return True
    if lowered in ("off", "false", "no", "0"):
        return False
    raise ConfigError(f"key {key!r}: expected on/off, got {text!r}")


def _to_float(key: str, text: str) -> float:
    try:
        return float(text)
    except ValueError as exc:
        raise ConfigError(f"key {key!r}: expected a number, got {text!r}") from exc


def _to_int(key: str, text: str) -> int:
    try:
        return int(text)
    except ValueError as exc:
        raise ConfigError(f"key {key!r}: expected an integer, got {text!r}") from exc


_REQUIRED = ("mode", "topology", "m")

# key -> (attribute, converter); converters taking (key, text)
_SCALAR_KEYS = {
    "seed": ("seed", _to_int),
    "topology.ring_weight": ("ring_weight", _to_float),
    "source.f_bound": ("f_bound", _to_float),
    "source.g_bound": ("g_bound", _to_float),
    "source.a_bound": ("a_bound", _to_float),
    "source.b_bound": ("b_bound", _to_float),
    "source.disturbance": ("disturbance", _to_bool),
    "observer.h_scale": ("h_scale", _to_float),
    "observer.s_scale": ("s_scale", _to_float),
    "observer.gamma_phi": ("gamma_phi", _to_float),
    "observer.gamma_psi": ("gamma_psi", _to_float),
    "observer.gamma": ("gamma", _to_float),
    "observer.floor": ("floor", _to_float),
    "run.horizon": ("horizon", _to_float),
    "run.rtol": ("rtol", _to_float),
    "run.atol": ("atol", _to_float),
    "run.steps": ("steps", _to_int),
    "run.samples": ("samples", _to_int),
    "certificate.epsilon_search": ("epsilon_search", _to_bool),
}
_MATRIX_KEYS = {
    "source.f_star": "f_star",
    "source.g_star": "g_star",
    "source.a_star": "a_star",
    "source.b_star": "b_star",
}
_SIGNAL_KEYS = {
    "source.excitation": "excitation",
    "source.disturbance_signal": "disturbance_signal",
}


def parse_config(text: str) -> ScenarioConfig:
    """Parse and fully validate a configuration document."""
    assignments = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected key=value, got {raw!r}")
        key, value = (part.strip() for part in line.split("=", 1))
        if not key or not value:
            raise ConfigError(f"line {lineno}: empty key or value in {raw!r}")
        if key in assignments:
            raise ConfigError(f"line {lineno}: duplicate key {key!r}")
        assignments[key] = value

    missing = [k for k in _REQUIRED if k not in assignments]
    if missing:
        raise ConfigError(f"missing required keys: {', '.join(missing)}")

    mode = assignments.pop("mode")
    if mode not in MODES:
        raise ConfigError(f"key 'mode': must be one of {MODES}, got {mode!r}")
    topology = assignments.pop("topology")
    if topology not in TOPOLOGIES:
        raise ConfigError(f"key 'topology': must be one of {TOPOLOGIES}, got {topology!r}")
    m = _to_int("m", assignments.pop("m"))
    if m < 1:
        raise ConfigError(f"key 'm': must be >= 1, got {m}")

    cfg = ScenarioConfig(mode=mode, topology=topology, m=m)
    for key, value in assignments.items():
        if key in _SCALAR_KEYS:
            attr, conv = _SCALAR_KEYS[key]
            setattr(cfg, attr, conv(key, value))
        elif key in _MATRIX_KEYS:
            setattr(cfg, _MATRIX_KEYS[key], _parse_matrix(key, value))
        elif key in _SIGNAL_KEYS:
            setattr(cfg, _SIGNAL_KEYS[key], _parse_signal(key, value))
        elif key == "topology.edges":
            cfg.sensing_edges = _parse_edges(key, value, with_target=True)
        elif key == "topology.source_edges":
            cfg.source_edges = _parse_edges(key, value, with_target=False)
        else:
            raise ConfigError(f"unknown key {key!r}")

    _apply_defaults(cfg)
    _validate(cfg)
    return cfg


def _apply_defaults(cfg: ScenarioConfig) -> None:
    if cfg.mode == "continuous":
        if cfg.f_star is None or cfg.g_star is None:
            f, g = _default_continuous_nominals()
            cfg.f_star = f if cfg.f_star is None else cfg.f_star
            cfg.g_star = g if cfg.g_star is None else cfg.g_star
        if cfg.excitation is None:
            cfg.excitation = sig.continuous_excitation()
        if cfg.disturbance_signal is None:
            cfg.disturbance_signal = sig.continuous_disturbance()
    else:
        if cfg.a_star is None or cfg.b_star is None:
            a, b = _default_discrete_nominals()
            cfg.a_star = a if cfg.a_star is None else cfg.a_star
            cfg.b_star = b if cfg.b_star is None else cfg.b_star
        if cfg.excitation is None:
            cfg.excitation = sig.discrete_excitation()
        if cfg.disturbance_signal is None:
            cfg.disturbance_signal = sig.discrete_disturbance()


def _validate(cfg: ScenarioConfig) -> None:
    def require(cond, key, msg):
        if not cond:
            raise ConfigError(f"key {key!r}: {msg}")

    if cfg.mode == "continuous":
        n = cfg.f_star.shape[0]
        require(cfg.f_star.shape == (n, n), "source.f_star", "must be square")
        require(cfg.g_star.shape[0] == n, "source.g_star", "row count must match f_star")
        require(
            cfg.excitation.dim == cfg.g_star.shape[1],
            "source.excitation",
            "component count must match g_star columns",
        )
        require(cfg.h_scale < 0, "observer.h_scale", "must be negative (Hurwitz observer)")
        require(cfg.horizon > 0, "run.horizon", "must be positive")
        require(cfg.rtol > 0 and cfg.atol > 0, "run.rtol", "tolerances must be positive")
        require(cfg.samples >= 2, "run.samples", "need at least 2 output samples")
        require(
            cfg.gamma_phi > 0 and cfg.gamma_psi > 0,
            "observer.gamma_phi",
            "adaptation gains must be positive",
        )
    else:
        n = cfg.a_star.shape[0]
        require(cfg.a_star.shape == (n, n), "source.a_star", "must be square")
        require(cfg.b_star.shape[0] == n, "source.b_star", "row count must match a_star")
        require(
            cfg.excitation.dim == cfg.b_star.shape[1],
            "source.excitation",
            "component count must match b_star columns",
        )
        require(
            abs(cfg.s_scale) < 1, "observer.s_scale", "must be Schur (|s_scale| < 1)"
        )
        require(0 < cfg.gamma < 2, "observer.gamma", "must lie in (0, 2)")
        require(cfg.floor > 0, "observer.floor", "must be positive")
        require(cfg.steps >= 1, "run.steps", "must be >= 1")
    require(
        cfg.disturbance_signal.dim == n,
        "source.disturbance_signal",
        "component count must match the state dimension",
    )
    for key, attr in (
        ("source.f_bound", "f_bound"),
        ("source.g_bound", "g_bound"),
        ("source.a_bound", "a_bound"),
        ("source.b_bound", "b_bound"),
    ):
        require(getattr(cfg, attr) >= 0, key, "must be nonnegative")
    require(0 < cfg.ring_weight < 0.5, "topology.ring_weight", "must lie in (0, 0.5)")
    if cfg.topology == "custom":
        require(bool(cfg.source_edges), "topology.source_edges", "custom topology needs source edges")
    else:
        require(
            not cfg.sensing_edges and not cfg.source_edges,
            "topology.edges",
            "edge lists are only valid with topology=custom",
        )
