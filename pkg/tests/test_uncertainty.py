"""Norm-saturating random perturbations."""

import numpy as np
import pytest

from adaptnet.errors import LinalgError
from adaptnet.uncertainty import perturbed_pair, scaled_perturbation


def test_norm_saturates_bound():
    rng = np.random.default_rng(0)
    for bound in (0.1, 0.55, 3.0):
        delta = scaled_perturbation((2, 2), bound, rng)
        np.testing.assert_allclose(np.linalg.norm(delta, 2), bound, rtol=1e-12)


def test_zero_bound_is_zero():
    rng = np.random.default_rng(0)
    np.testing.assert_array_equal(scaled_perturbation((3, 2), 0.0, rng), 0.0)


def test_negative_bound_rejected():
    with pytest.raises(LinalgError):
        scaled_perturbation((2, 2), -0.1, np.random.default_rng(0))


def test_perturbed_pair_norms_and_determinism():
    a = np.array([[0.9, 0.1], [-0.1, 0.95]])
    b = np.array([[0.05], [0.10]])
    a1, b1 = perturbed_pair(a, b, 0.10, 0.07, np.random.default_rng(12345))
    a2, b2 = perturbed_pair(a, b, 0.10, 0.07, np.random.default_rng(12345))
    np.testing.assert_array_equal(a1, a2)
    np.testing.assert_array_equal(b1, b2)
    np.testing.assert_allclose(np.linalg.norm(a1 - a, 2), 0.10, rtol=1e-12)
    np.testing.assert_allclose(np.linalg.norm(b1 - b, 2), 0.07, rtol=1e-12)
