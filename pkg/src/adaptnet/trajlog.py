"""Trajectory logs and their CSV serialization.

All floats are written with 17 significant digits so a run can be reproduced
bit-for-bit from its CSV output.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path

import numpy as np

FLOAT_FMT = "%.17g"


def _fmt(x) -> str:
    return FLOAT_FMT % float(x)


def _write_rows(path, header: list, rows) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        for row in rows:
            writer.writerow([_fmt(x) for x in row])


@dataclass
class ContinuousLog:
    """Sampled continuous-time run: error norms, parameter errors, Lyapunov."""

    t: np.ndarray  # (n_out,)
    agent_errors: np.ndarray  # (n_out, m), per-agent |x_i - z_i|
    total_error: np.ndarray  # (n_out,), stacked-error norm
    phi_frob: np.ndarray  # (n_out,), sqrt(sum_i |F_hat_i - F|_F^2)
    psi_frob: np.ndarray  # (n_out,)
    lyapunov: np.ndarray  # (n_out,)
    source_states: np.ndarray  # (n_out, n)
    agent_states: np.ndarray  # (n_out, m, n)

    @property
    def m(self) -> int:
        return self.agent_errors.shape[1]

    def write_csv(self, path) -> None:
        m = self.m
        header = ["t", "err_total"] + [f"err_{i + 1}" for i in range(m)] + [
            "phi_frob",
            "psi_frob",
            "lyapunov",
        ]
        rows = (
            [self.t[k], self.total_error[k]]
            + list(self.agent_errors[k])
            + [self.phi_frob[k], self.psi_frob[k], self.lyapunov[k]]
            for k in range(len(self.t))
        )
        _write_rows(path, header, rows)

    def write_states_csv(self, path) -> None:
        _write_states(path, "t", self.t, self.source_states, self.agent_states)


@dataclass
class DiscreteLog:
    """Per-step discrete run: error norms, parameter error, reconstruction."""

    k: np.ndarray  # (K + 1,), step indices
    agent_errors: np.ndarray  # (K + 1, m)
    total_error: np.ndarray  # (K + 1,)
    xi_frob: np.ndarray  # (K + 1,), sqrt(V_k)
    v: np.ndarray  # (K + 1,), V_k = sum_i |[A_hat, B_hat]_i - [A, B]|_F^2
    recon_residual: np.ndarray  # (K + 1,), |eps_reconstructed - eps_true|
    source_states: np.ndarray  # (K + 1, n)
    agent_states: np.ndarray  # (K + 1, m, n)

    @property
    def m(self) -> int:
        return self.agent_errors.shape[1]

    def write_csv(self, path) -> None:
        m = self.m
        header = ["k", "err_total"] + [f"err_{i + 1}" for i in range(m)] + [
            "xi_frob",
            "V_k",
            "recon_residual",
        ]
        rows = (
            [self.k[j], self.total_error[j]]
            + list(self.agent_errors[j])
            + [self.xi_frob[j], self.v[j], self.recon_residual[j]]
            for j in range(len(self.k))
        )
        _write_rows(path, header, rows)

    def write_states_csv(self, path) -> None:
        _write_states(path, "k", self.k, self.source_states, self.agent_states)


def _write_states(path, time_name, times, source_states, agent_states):
    n = source_states.shape[1]
    m = agent_states.shape[1]
    header = [time_name] + [f"x0_{j + 1}" for j in range(n)] + [
        f"x{i + 1}_{j + 1}" for i in range(m) for j in range(n)
    ]
    rows = (
        [times[k]] + list(source_states[k]) + list(agent_states[k].reshape(-1))
        for k in range(len(times))
    )
    _write_rows(path, header, rows)
