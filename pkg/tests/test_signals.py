"""Sinusoid signal specs and their supremum bounds."""

import numpy as np

from adaptnet.signals import (
    SignalSpec,
    SinusoidTerm,
    continuous_disturbance,
    continuous_excitation,
    discrete_disturbance,
    discrete_excitation,
    zero_signal,
)


def test_sinusoid_term():
    term = SinusoidTerm(2.0, 0.5, np.pi / 2.0)
    np.testing.assert_allclose(term(0.0), 2.0)
    np.testing.assert_allclose(term(np.pi), 2.0 * np.cos(0.5 * np.pi), atol=1e-12)


def test_signal_vectorized_and_bounds():
    spec = SignalSpec(
        components=(
            (SinusoidTerm(1.0, 2.0), SinusoidTerm(0.5, 3.0, 0.1)),
            (SinusoidTerm(-2.0, 1.0),),
        )
    )
    assert spec.dim == 2
    t = np.linspace(0.0, 10.0, 101)
    vals = spec(t)
    assert vals.shape == (2, 101)
    np.testing.assert_allclose(
        vals[0], np.sin(2.0 * t) + 0.5 * np.sin(3.0 * t + 0.1)
    )
    np.testing.assert_allclose(spec.component_bounds(), [1.5, 2.0])
    np.testing.assert_allclose(spec.norm_bound(), np.hypot(1.5, 2.0))
    # sampled values never exceed the component bounds
    assert np.all(np.abs(vals) <= spec.component_bounds()[:, None] + 1e-12)


def test_zero_signal():
    spec = zero_signal(3)
    np.testing.assert_array_equal(spec(1.7), np.zeros(3))
    assert spec.norm_bound() == 0.0


def test_continuous_excitation_values():
    # v0(t) = 0.7 sin(0.5 t) + 1.5 cos(t + pi/6)
    spec = continuous_excitation()
    assert spec.dim == 1
    for t in (0.0, 1.0, 3.7):
        expected = 0.7 * np.sin(0.5 * t) + 1.5 * np.cos(1.0 * t + np.pi / 6.0)
        np.testing.assert_allclose(spec(t)[0], expected, atol=1e-12)
    np.testing.assert_allclose(spec.component_bounds(), [2.2])


def test_continuous_disturbance_values():
    # d0(t) = 5.5 [sin(0.1 t), 0.5 cos(0.3 t)]
    spec = continuous_disturbance()
    assert spec.dim == 2
    for t in (0.0, 2.0, 9.3):
        np.testing.assert_allclose(spec(t)[0], 5.5 * np.sin(0.1 * t), atol=1e-12)
        np.testing.assert_allclose(spec(t)[1], 2.75 * np.cos(0.3 * t), atol=1e-12)
    np.testing.assert_allclose(spec.norm_bound(), np.hypot(5.5, 2.75))


def test_discrete_excitation_values():
    # u0_k = 0.9 sin(0.05 k) + 0.6 cos(0.1 k + pi/5)
    spec = discrete_excitation()
    for k in (0, 5, 123):
        expected = 0.9 * np.sin(0.05 * k) + 0.6 * np.cos(0.1 * k + np.pi / 5.0)
        np.testing.assert_allclose(spec(float(k))[0], expected, atol=1e-12)


def test_discrete_disturbance_values():
    # delta0_k = 0.05 [0.7 sin(0.05 k), 0.5 cos(0.09 k)]
    spec = discrete_disturbance()
    for k in (0, 17, 250):
        np.testing.assert_allclose(
            spec(float(k))[0], 0.035 * np.sin(0.05 * k), atol=1e-12
        )
        np.testing.assert_allclose(
            spec(float(k))[1], 0.025 * np.cos(0.09 * k), atol=1e-12
        )
    np.testing.assert_allclose(spec.norm_bound(), np.hypot(0.035, 0.025))
