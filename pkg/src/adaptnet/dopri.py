"""Explicit Dormand-Prince 5(4) integrator with dense output.

Embedded pair with first-same-as-last stage reuse, a PI step-size controller,
and quartic dense output so results can be sampled on a uniform grid that is
independent of the accepted step sequence.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import SimulationError

# Butcher tableau of the Dormand-Prince 5(4) pair.
C = np.array([0.0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1.0, 1.0])
A = np.array(
    [
        [0.0, 0.0, 0.0, 0.0, 0.0, 0.0],
        [1 / 5, 0.0, 0.0, 0.0, 0.0, 0.0],
        [3 / 40, 9 / 40, 0.0, 0.0, 0.0, 0.0],
        [44 / 45, -56 / 15, 32 / 9, 0.0, 0.0, 0.0],
        [19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729, 0.0, 0.0],
        [9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656, 0.0],
    ]
)
B = np.array([35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84])
# Difference between the 5th and embedded 4th order weights.
E = np.array([71 / 57600, 0.0, -71 / 16695, 71 / 1920, -17253 / 339200, 22 / 525, -1 / 40])
# Coefficients of the quartic interpolant on each accepted step.
P_DENSE = np.array(
    [
        [1.0, -8048581381 / 2820520608, 8663915743 / 2820520608, -12715105075 / 11282082432],
        [0.0, 0.0, 0.0, 0.0],
        [0.0, 131558114200 / 32700410799, -68118460800 / 10900136933, 87487479700 / 32700410799],
        [0.0, -1754552775 / 470086768, 14199869525 / 1410260304, -10690763975 / 1880347072],
        [0.0, 127303824393 / 49829197408, -318862633887 / 49829197408, 701980252875 / 199316789632],
        [0.0, -282668133 / 205662961, 2019193451 / 616988883, -1453857185 / 822651844],
        [0.0, 40617522 / 29380423, -110615467 / 29380423, 69997945 / 29380423],
    ]
)

SAFETY = 0.9
MIN_FACTOR = 0.2
MAX_FACTOR = 5.0
# PI controller exponents (Hairer's DOPRI5 defaults).
ALPHA = 0.7 / 5.0
BETA = 0.4 / 5.0


@dataclass
class IntegrationResult:
    t: np.ndarray  # uniform sample times, shape (n_out,)
    y: np.ndarray  # sampled states, shape (n_out, dim)
    n_steps: int
    n_accepted: int
    n_rejected: int
    n_rhs_evals: int


def _error_norm(err: np.ndarray, y0: np.ndarray, y1: np.ndarray, rtol, atol) -> float:
    scale = atol + rtol * np.maximum(np.abs(y0), np.abs(y1))
    return float(np.sqrt(np.mean((err / scale) ** 2)))


def _initial_step(f, t0, y0, f0, rtol, atol) -> float:
    scale = atol + rtol * np.abs(y0)
    d0 = np.sqrt(np.mean((y0 / scale) ** 2))
    d1 = np.sqrt(np.mean((f0 / scale) ** 2))
    h0 = 1e-6 if d0 < 1e-5 or d1 < 1e-5 else 0.01 * d0 / d1
    y1 = y0 + h0 * f0
    f1 = f(t0 + h0, y1)
    d2 = np.sqrt(np.mean(((f1 - f0) / scale) ** 2)) / h0
    if max(d1, d2) <= 1e-15:
        h1 = max(1e-6, h0 * 1e-3)
    else:
        h1 = (0.01 / max(d1, d2)) ** 0.2
    return min(100.0 * h0, h1)


def integrate(
    f,
    t_span: tuple,
    y0,
    rtol: float = 1e-6,
    atol: float = 1e-8,
    n_out: int = 501,
    max_steps: int = 1_000_000,
) -> IntegrationResult:
    """Integrate ``y' = f(t, y)`` over ``t_span`` and sample on a uniform grid.

    Raises SimulationError on non-finite states, step-size underflow (below
    1e-14 times the horizon) or step-budget exhaustion.
    """
    t0, t1 = float(t_span[0]), float(t_span[1])
    if not t1 > t0:
        raise SimulationError(f"empty time span ({t0}, {t1})")
    if n_out < 2:
        raise SimulationError(f"need at least 2 output samples, got {n_out}")
    y = np.asarray(y0, dtype=float).copy()
    dim = y.size
    t_out = np.linspace(t0, t1, n_out)
    y_out = np.empty((n_out, dim))
    y_out[0] = y
    next_out = 1

    k = np.empty((7, dim))
    k[0] = f(t0, y)
    n_rhs = 1
    h = min(_initial_step(f, t0, y, k[0], rtol, atol), t1 - t0)
    n_rhs += 1
    t = t0
    errold = 1e-4
    n_steps = n_accepted = n_rejected = 0
    h_floor = 1e-14 * (t1 - t0)

    while t < t1:
        if n_steps >= max_steps:
            raise SimulationError(f"step budget {max_steps} exhausted at t={t:.6g}")
        h = min(h, t1 - t)
        if h < h_floor:
            raise SimulationError(f"step size underflow at t={t:.6g}")
        n_steps += 1
        for s in range(1, 6):
            k[s] = f(t + C[s] * h, y + h * (A[s, :s] @ k[:s]))
        y_new = y + h * (B @ k[:6])
        k[6] = f(t + h, y_new)
        n_rhs += 6
        if not np.all(np.isfinite(y_new)):
            raise SimulationError(f"non-finite state at t={t:.6g}")
        err = _error_norm(h * (E @ k), y, y_new, rtol, atol)

        if err <= 1.0:
            n_accepted += 1
            # dense output for all uniform samples inside (t, t + h]
            if next_out < n_out and t_out[next_out] <= t + h + 1e-15 * (t1 - t0):
                q = k.T @ P_DENSE  # (dim, 4)
                while next_out < n_out and t_out[next_out] <= t + h + 1e-15 * (t1 - t0):
                    x = (t_out[next_out] - t) / h
                    px = np.array([x, x * x, x**3, x**4])
                    y_out[next_out] = y + h * (q @ px)
                    next_out += 1
            t += h
            y = y_new
            k[0] = k[6]  # first-same-as-last
            err = max(err, 1e-10)
            factor = SAFETY * err ** (-ALPHA) * errold ** BETA
            h *= min(MAX_FACTOR, max(MIN_FACTOR, factor))
            errold = err
        else:
            n_rejected += 1
            h *= min(1.0, max(MIN_FACTOR, SAFETY * err ** (-0.2)))

    y_out[n_out - 1] = y  # endpoint exactly from the last accepted state
    return IntegrationResult(
        t=t_out,
        y=y_out,
        n_steps=n_steps,
        n_accepted=n_accepted,
        n_rejected=n_rejected,
        n_rhs_evals=n_rhs,
    )
