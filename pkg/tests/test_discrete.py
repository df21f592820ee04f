"""Discrete-time normalized-gradient observers: updates, monotonicity, identities."""

import numpy as np
import pytest

from adaptnet.coupling import build_S
from adaptnet.discrete import (
    DiscreteSource,
    normalized_gradient_check,
    reconstruct_epsilon,
    simulate_discrete,
)
from adaptnet.errors import SimulationError
from adaptnet.graph import (
    cyclic_network,
    laplacian_bundle,
    path_network,
    star_network,
)
from adaptnet.signals import discrete_excitation
from adaptnet.uncertainty import perturbed_pair

A_STAR = np.array([[0.9, 0.1], [-0.1, 0.95]])
B_STAR = np.array([[0.05], [0.10]])

STAR4 = laplacian_bundle(star_network(4))
CYCLIC4 = laplacian_bundle(cyclic_network(4))
PATH4 = laplacian_bundle(path_network(4))


def reference_source(seed=12345):
    rng = np.random.default_rng(seed)
    a, b = perturbed_pair(A_STAR, B_STAR, 0.10, 0.07, rng)
    return DiscreteSource(a=a, b=b, excitation=discrete_excitation()), rng


def s_blocks(m):
    return np.stack([0.5 * np.eye(2)] * m)


def reference_run(bundle, gamma=1.3, steps=300, seed=12345):
    source, rng = reference_source(seed)
    x0 = np.array([1.0, -0.6])
    agents = rng.uniform(-1.0, 1.0, (bundle.laplacian.shape[0], 2))
    return simulate_discrete(
        bundle, s_blocks(bundle.laplacian.shape[0]), source, gamma, 0.01,
        steps, x0, agents,
    )


class TestStep:
    def test_exact_estimates_freeze(self):
        source, rng = reference_source()
        run = simulate_discrete(
            STAR4,
            s_blocks(4),
            source,
            1.3,
            0.01,
            50,
            np.array([1.0, -0.6]),
            rng.uniform(-1.0, 1.0, (4, 2)),
            a_hat_init=np.tile(source.a, (4, 1, 1)),
            b_hat_init=np.tile(source.b, (4, 1, 1)),
        )
        assert np.max(run.eps_sq) == 0.0
        np.testing.assert_allclose(run.log.v, 0.0, atol=1e-14)

    def test_vanishing_gain_freezes_parameters(self):
        # gamma -> 0: parameters essentially constant, error follows the
        # frozen-parameter linear recursion
        source, rng = reference_source()
        x0 = np.array([1.0, -0.6])
        agents = rng.uniform(-1.0, 1.0, (4, 2))
        run = simulate_discrete(
            STAR4, s_blocks(4), source, 1e-14, 0.01, 40, x0, agents
        )
        # replay the recursion with A_hat = B_hat = 0 held fixed
        x = agents.copy()
        z0 = x0.copy()
        s = 0.5 * np.eye(2)
        w0 = np.diag(STAR4.adjacency_0)
        for k in range(40):
            u = source.excitation(float(k))
            z = STAR4.adjacency_m @ x + w0[:, None] * z0[None, :]
            x = np.einsum("ij,mj->mi", s, x) + np.einsum("ij,mj->mi", -s, z)
            z0 = source.a @ z0 + source.b @ u
        np.testing.assert_allclose(run.log.agent_states[-1], x, atol=1e-9)

    def test_per_agent_oracle_first_step(self):
        source, rng = reference_source()
        x0 = np.array([1.0, -0.6])
        agents = rng.uniform(-1.0, 1.0, (4, 2))
        a_hat0 = rng.standard_normal((4, 2, 2))
        b_hat0 = rng.standard_normal((4, 2, 1))
        run = simulate_discrete(
            CYCLIC4, s_blocks(4), source, 1.3, 0.01, 1, x0, agents,
            a_hat_init=a_hat0, b_hat_init=b_hat0,
        )
        # independent scalar-loop oracle for step 0
        u = source.excitation(0.0)
        s = 0.5 * np.eye(2)
        w = CYCLIC4.adjacency_m
        w0 = np.diag(CYCLIC4.adjacency_0)
        x_next = np.empty((4, 2))
        eps_sq_total = 0.0
        for i in range(4):
            z_i = sum(w[i, j] * agents[j] for j in range(4)) + w0[i] * x0
            x_next[i] = s @ agents[i] + (a_hat0[i] - s) @ z_i + b_hat0[i] @ u
            eps_i = (a_hat0[i] - source.a) @ z_i + (b_hat0[i] - source.b) @ u
            eps_sq_total += float(eps_i @ eps_i)
        np.testing.assert_allclose(run.eps_sq[0], eps_sq_total, rtol=1e-12)
        np.testing.assert_allclose(run.log.agent_states[-1], x_next, atol=1e-12)
        x0_next = source.a @ x0 + source.b @ u
        np.testing.assert_allclose(run.log.source_states[-1], x0_next, atol=1e-12)

    def test_parameter_update_formula(self):
        source, rng = reference_source()
        x0 = np.array([1.0, -0.6])
        agents = rng.uniform(-1.0, 1.0, (4, 2))
        a_hat0 = rng.standard_normal((4, 2, 2))
        b_hat0 = rng.standard_normal((4, 2, 1))
        gamma = 0.7
        run = simulate_discrete(
            STAR4, s_blocks(4), source, gamma, 0.01, 1, x0, agents,
            a_hat_init=a_hat0, b_hat_init=b_hat0,
        )
        u = source.excitation(0.0)
        v_expected = 0.0
        for i in range(4):
            z_i = x0  # star: z_i = x0
            eps_i = (a_hat0[i] - source.a) @ z_i + (b_hat0[i] - source.b) @ u
            n_hat = max(0.01, float(z_i @ z_i + u @ u))
            a_next = a_hat0[i] - gamma * np.outer(eps_i, z_i) / n_hat
            b_next = b_hat0[i] - gamma * np.outer(eps_i, u) / n_hat
            v_expected += np.sum((a_next - source.a) ** 2)
            v_expected += np.sum((b_next - source.b) ** 2)
        np.testing.assert_allclose(run.log.v[-1], v_expected, rtol=1e-12)


class TestReconstruction:
    def test_single_agent_identity(self):
        bundle = laplacian_bundle(star_network(1))
        s_op = build_S(bundle, [0.5 * np.eye(2)], A_STAR)
        e_now = np.array([0.3, -0.2])
        e_next = np.array([1.0, 0.4])
        recon = reconstruct_epsilon(e_next, e_now, s_op, bundle)
        np.testing.assert_allclose(recon, e_next - s_op.matrix @ e_now, atol=1e-12)

    def test_zero_mismatch(self):
        s_op = build_S(CYCLIC4, list(s_blocks(4)), A_STAR)
        e_now = np.random.default_rng(0).standard_normal(8)
        e_next = s_op.matrix @ e_now
        recon = reconstruct_epsilon(e_next, e_now, s_op, CYCLIC4)
        np.testing.assert_allclose(recon, 0.0, atol=1e-10)

    def test_residual_along_disturbance_free_run(self):
        for bundle in (STAR4, CYCLIC4, PATH4):
            run = reference_run(bundle, steps=100)
            eps_norm = np.sqrt(run.eps_sq)
            # relative to the mismatch magnitude, floored for tiny steps
            rel = run.log.recon_residual[1:] / np.maximum(eps_norm, 1e-12)
            assert np.max(rel) <= 1e-8


class TestMonotonicity:
    def test_v_nonincreasing_within_gain_range(self):
        for gamma in (0.5, 1.3, 1.9):
            run = reference_run(STAR4, gamma=gamma, steps=120)
            assert np.all(np.diff(run.log.v) <= 0.0)

    def test_v_increases_outside_range(self):
        run = reference_run(STAR4, gamma=2.5, steps=120)
        assert np.any(np.diff(run.log.v) > 0.0)

    def test_summability_bound(self):
        run = reference_run(CYCLIC4, steps=300)
        v0 = run.log.v[0]
        bound = v0 / (run.gamma * (2.0 - run.gamma))
        assert run.summability_sum() <= bound + 1e-12

    def test_xi_frob_consistent(self):
        run = reference_run(PATH4, steps=50)
        np.testing.assert_allclose(run.log.xi_frob**2, run.log.v, rtol=1e-12)


class TestGradient:
    def test_normalized_gradient_matches_finite_differences(self):
        worst = normalized_gradient_check(np.random.default_rng(77), trials=20)
        assert worst <= 1e-5


class TestValidation:
    def test_gamma_must_be_positive(self):
        source, rng = reference_source()
        with pytest.raises(SimulationError):
            simulate_discrete(
                STAR4, s_blocks(4), source, 0.0, 0.01, 10,
                np.zeros(2), np.zeros((4, 2)),
            )

    def test_regularizer_must_be_positive(self):
        source, _ = reference_source()
        with pytest.raises(SimulationError):
            simulate_discrete(
                STAR4, s_blocks(4), source, 1.3, 0.0, 10,
                np.zeros(2), np.zeros((4, 2)),
            )

    def test_steps_must_be_positive(self):
        source, _ = reference_source()
        with pytest.raises(SimulationError):
            simulate_discrete(
                STAR4, s_blocks(4), source, 1.3, 0.01, 0,
                np.zeros(2), np.zeros((4, 2)),
            )

    def test_gain_shape_rejected(self):
        source, _ = reference_source()
        with pytest.raises(SimulationError):
            simulate_discrete(
                STAR4, np.zeros((3, 2, 2)), source, 1.3, 0.01, 10,
                np.zeros(2), np.zeros((4, 2)),
            )
