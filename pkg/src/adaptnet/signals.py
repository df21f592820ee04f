"""Deterministic vector-valued excitation and disturbance signals.

A signal is a tuple of components, each component a sum of sinusoid terms
``a * sin(w t + phi)``. Cosines are encoded as phase-shifted sines. Every
signal therefore carries an exact supremum bound, which the ISS checks need.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class SinusoidTerm:
    amplitude: float
    frequency: float
    phase: float = 0.0

    def __call__(self, t):
        return self.amplitude * np.sin(self.frequency * np.asarray(t) + self.phase)


@dataclass(frozen=True)
class SignalSpec:
    """Vector signal; ``components[i]`` is the tuple of terms of entry i."""

    components: tuple

    @property
    def dim(self) -> int:
        return len(self.components)

    def __call__(self, t) -> np.ndarray:
        t = np.asarray(t, dtype=float)
        out = np.zeros((self.dim,) + t.shape)
        for i, terms in enumerate(self.components):
            for term in terms:
                out[i] += term(t)
        return out

    def component_bounds(self) -> np.ndarray:
        """Per-component bound: sum of |amplitude| (tight for a single term)."""
        return np.array(
            [sum(abs(term.amplitude) for term in terms) for terms in self.components]
        )

    def norm_bound(self) -> float:
        """Supremum bound on the Euclidean norm of the signal."""
        return float(np.linalg.norm(self.component_bounds()))


def zero_signal(dim: int) -> SignalSpec:
    return SignalSpec(components=tuple(() for _ in range(dim)))


def _cos(amplitude: float, frequency: float, phase: float = 0.0) -> SinusoidTerm:
    return SinusoidTerm(amplitude, frequency, phase + np.pi / 2.0)


# Benchmark scenario signals. Continuous time uses t in seconds, discrete time
# uses the step index k.


def continuous_excitation() -> SignalSpec:
    """v0(t) = 0.7 sin(0.5 t) + 1.5 cos(1.0 t + pi/6), scalar."""
    return SignalSpec(
        components=(
            (SinusoidTerm(0.7, 0.5), _cos(1.5, 1.0, np.pi / 6.0)),
        )
    )


def continuous_disturbance() -> SignalSpec:
    """d0(t) = 5.5 [sin(0.1 t), 0.5 cos(0.3 t)]."""
    return SignalSpec(
        components=(
            (SinusoidTerm(5.5, 0.1),),
            (_cos(2.75, 0.3),),
        )
    )


def discrete_excitation() -> SignalSpec:
    """u0_k = 0.9 sin(0.05 k) + 0.6 cos(0.1 k + pi/5), scalar."""
    return SignalSpec(
        components=(
            (SinusoidTerm(0.9, 0.05), _cos(0.6, 0.1, np.pi / 5.0)),
        )
    )


def discrete_disturbance() -> SignalSpec:
    """delta0_k = 0.05 [0.7 sin(0.05 k), 0.5 cos(0.09 k)]."""
    return SignalSpec(
        components=(
            (SinusoidTerm(0.05 * 0.7, 0.05),),
            (_cos(0.05 * 0.5, 0.09),),
        )
    )
