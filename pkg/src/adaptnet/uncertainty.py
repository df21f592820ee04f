"""Norm-bounded random perturbations of nominal source matrices."""

from __future__ import annotations

import numpy as np

from .errors import LinalgError


def scaled_perturbation(shape: tuple, bound: float, rng: np.random.Generator) -> np.ndarray:
    """Random matrix with spectral norm exactly ``bound``.

    Draws entries from Unif[-1, 1] and rescales so the 2-norm saturates the
    bound, which makes the robustness margins tight rather than conservative.
    """
    if bound < 0:
        raise LinalgError(f"perturbation bound must be nonnegative, got {bound}")
    if bound == 0:
        return np.zeros(shape)
    raw = rng.uniform(-1.0, 1.0, size=shape)
    norm = np.linalg.norm(raw, 2)
    if norm == 0:  # pragma: no cover - probability zero
        raw = np.ones(shape)
        norm = np.linalg.norm(raw, 2)
    return bound * raw / norm


def perturbed_pair(
    nominal_a: np.ndarray,
    nominal_b: np.ndarray,
    a_bound: float,
    b_bound: float,
    rng: np.random.Generator,
) -> tuple[np.ndarray, np.ndarray]:
    """(A* + dA, B* + dB) with |dA|_2 = a_bound, |dB|_2 = b_bound."""
    da = scaled_perturbation(nominal_a.shape, a_bound, rng)
    db = scaled_perturbation(nominal_b.shape, b_bound, rng)
    return nominal_a + da, nominal_b + db
