"""Continuous-time adaptive observer network: dynamics, Lyapunov decrease."""

import numpy as np
import pytest

from adaptnet.continuous import (
    ContinuousSource,
    estimation_error,
    lyapunov_value,
    make_rhs,
    simulate_continuous,
)
from adaptnet.coupling import build_H, certificate_continuous
from adaptnet.errors import SimulationError
from adaptnet.graph import (
    cyclic_network,
    laplacian_bundle,
    path_network,
    star_network,
)
from adaptnet.linalg import kron
from adaptnet.signals import continuous_excitation, zero_signal
from adaptnet.uncertainty import perturbed_pair

F_STAR = np.array([[0.0, 1.0], [-1.0, -0.5]])
G_STAR = np.array([[0.0], [1.0]])
GAMMA = 10.0

STAR4 = laplacian_bundle(star_network(4))
CYCLIC4 = laplacian_bundle(cyclic_network(4))
PATH4 = laplacian_bundle(path_network(4))


def reference_source(seed=12345, disturbance=None):
    rng = np.random.default_rng(seed)
    f, g = perturbed_pair(F_STAR, G_STAR, 0.55, 0.50, rng)
    return ContinuousSource(
        f=f, g=g, excitation=continuous_excitation(), disturbance=disturbance
    )


def h_blocks(m):
    return np.stack([-2.0 * np.eye(2)] * m)


class TestRhs:
    def test_equilibrium_fixed_point(self):
        # agents equal to the source, estimates exact: everything co-moves
        source = ContinuousSource(
            f=F_STAR, g=G_STAR, excitation=continuous_excitation()
        )
        rhs, layout = make_rhs(STAR4, h_blocks(4), source, GAMMA, GAMMA)
        x0 = np.array([1.0, -0.5])
        y = layout.pack(
            x0, np.tile(x0, (4, 1)), np.tile(F_STAR, (4, 1, 1)), np.tile(G_STAR, (4, 1, 1))
        )
        dx0, dx, df, dg = layout.unpack(rhs(0.7, y))
        np.testing.assert_allclose(df, 0.0, atol=1e-14)
        np.testing.assert_allclose(dg, 0.0, atol=1e-14)
        # all agent derivatives equal the source derivative
        np.testing.assert_allclose(dx, np.tile(dx0, (4, 1)), atol=1e-12)

    def test_single_agent_reduction(self):
        # m = 1 with w_10 = 1: z_1 = x0, the law is a single adaptive observer
        bundle = laplacian_bundle(star_network(1))
        source = reference_source()
        rhs, layout = make_rhs(bundle, h_blocks(1), source, GAMMA, GAMMA)
        rng = np.random.default_rng(0)
        x0 = rng.standard_normal(2)
        x1 = rng.standard_normal(2)
        f_hat = rng.standard_normal((1, 2, 2))
        g_hat = rng.standard_normal((1, 2, 1))
        y = layout.pack(x0, x1[None], f_hat, g_hat)
        _, dx, df, dg = layout.unpack(rhs(0.0, y))
        v = source.excitation(0.0)
        h = -2.0 * np.eye(2)
        expected_dx = h @ x1 + (f_hat[0] - h) @ x0 + g_hat[0] @ v
        np.testing.assert_allclose(dx[0], expected_dx, atol=1e-12)
        xi = x1 - x0  # L = [1], P = I
        np.testing.assert_allclose(df[0], -GAMMA * np.outer(xi, x0), atol=1e-12)
        np.testing.assert_allclose(dg[0], -GAMMA * np.outer(xi, v), atol=1e-12)

    def test_stacked_vs_per_agent_oracle(self):
        # hand-assembled per-agent derivative on the cyclic network
        bundle = CYCLIC4
        source = reference_source()
        rhs, layout = make_rhs(bundle, h_blocks(4), source, GAMMA, GAMMA)
        rng = np.random.default_rng(5)
        x0 = rng.standard_normal(2)
        x = rng.standard_normal((4, 2))
        f_hat = rng.standard_normal((4, 2, 2))
        g_hat = rng.standard_normal((4, 2, 1))
        y = layout.pack(x0, x, f_hat, g_hat)
        dx0, dx, df, dg = layout.unpack(rhs(0.3, y))

        v = source.excitation(0.3)
        w = bundle.adjacency_m
        w0 = np.diag(bundle.adjacency_0)
        h = -2.0 * np.eye(2)
        z = np.array([sum(w[i, j] * x[j] for j in range(4)) + w0[i] * x0 for i in range(4)])
        err = x - z
        xi = np.array([sum(bundle.laplacian[j, i] * err[j] for j in range(4)) for i in range(4)])
        np.testing.assert_allclose(dx0, source.f @ x0 + source.g @ v, atol=1e-12)
        for i in range(4):
            np.testing.assert_allclose(
                dx[i], h @ x[i] + (f_hat[i] - h) @ z[i] + g_hat[i] @ v, atol=1e-12
            )
            np.testing.assert_allclose(df[i], -GAMMA * np.outer(xi[i], z[i]), atol=1e-12)
            np.testing.assert_allclose(dg[i], -GAMMA * np.outer(xi[i], v), atol=1e-12)

    def test_rejects_bad_gains(self):
        source = reference_source()
        with pytest.raises(SimulationError):
            make_rhs(STAR4, h_blocks(4), source, 0.0, GAMMA)

    def test_rejects_bad_pc_shape(self):
        source = reference_source()
        with pytest.raises(SimulationError):
            make_rhs(STAR4, h_blocks(4), source, GAMMA, GAMMA, p_c=np.eye(3))


class TestLyapunovIdentities:
    def test_lyapunov_value_trace_arithmetic(self):
        # lone Phi_1 = I_2 with gain 10 contributes 2/10
        phi = np.zeros((4, 2, 2))
        phi[0] = np.eye(2)
        v = lyapunov_value(np.zeros((4, 2)), phi, np.zeros((4, 2, 1)), 10.0, 10.0)
        np.testing.assert_allclose(v, 0.2, atol=1e-14)

    def test_cross_term_cancellation(self):
        # at random states, analytic dV/dt along the disturbance-free flow
        # equals -e^T Q e exactly (the adaptation cancels the cross terms)
        source = reference_source()
        op = build_H(CYCLIC4, list(h_blocks(4)), source.f)
        p_c, _ = certificate_continuous(op)
        rhs, layout = make_rhs(CYCLIC4, h_blocks(4), source, GAMMA, GAMMA, p_c=p_c)
        lap_kron = kron(CYCLIC4.laplacian, np.eye(2))
        rng = np.random.default_rng(42)
        for _ in range(20):
            x0 = rng.standard_normal(2)
            x = rng.standard_normal((4, 2))
            f_hat = rng.standard_normal((4, 2, 2))
            g_hat = rng.standard_normal((4, 2, 1))
            y = layout.pack(x0, x, f_hat, g_hat)
            dx0, dx, df, dg = layout.unpack(rhs(1.3, y))
            e_bar = lap_kron @ (x - x0[None, :]).reshape(-1)
            de_bar = lap_kron @ (dx - dx0[None, :]).reshape(-1)
            phi = f_hat - source.f[None]
            psi = g_hat - source.g[None]
            v_dot = (
                2.0 * e_bar @ (p_c @ de_bar)
                + 2.0 * np.sum(phi * df) / GAMMA
                + 2.0 * np.sum(psi * dg) / GAMMA
            )
            expected = -e_bar @ e_bar  # Q = I
            np.testing.assert_allclose(v_dot, expected, rtol=1e-8, atol=1e-10)

    def test_finite_difference_v_dot(self):
        source = reference_source()
        op = build_H(CYCLIC4, list(h_blocks(4)), source.f)
        p_c, _ = certificate_continuous(op)
        rhs, layout = make_rhs(CYCLIC4, h_blocks(4), source, GAMMA, GAMMA, p_c=p_c)
        lap_kron = kron(CYCLIC4.laplacian, np.eye(2))
        rng = np.random.default_rng(9)
        y = layout.pack(
            rng.standard_normal(2),
            rng.standard_normal((4, 2)),
            rng.standard_normal((4, 2, 2)),
            rng.standard_normal((4, 2, 1)),
        )

        def v_of(yy):
            x0, x, f_hat, g_hat = layout.unpack(yy)
            e_rows = (lap_kron @ (x - x0[None, :]).reshape(-1)).reshape(4, 2)
            return lyapunov_value(
                e_rows, f_hat - source.f[None], g_hat - source.g[None],
                GAMMA, GAMMA, p_c=p_c,
            )

        t = 0.8
        f_val = rhs(t, y)
        step = 1e-6
        fd = (v_of(y + step * f_val) - v_of(y - step * f_val)) / (2.0 * step)
        x0, x, f_hat, g_hat = layout.unpack(y)
        e_bar = lap_kron @ (x - x0[None, :]).reshape(-1)
        analytic = -e_bar @ e_bar
        np.testing.assert_allclose(fd, analytic, rtol=1e-4)


class TestSimulate:
    def test_invariant_equilibrium_stays_zero(self):
        # exact estimates and zero initial error: the error stays at zero
        source = ContinuousSource(
            f=F_STAR, g=G_STAR, excitation=continuous_excitation()
        )
        x0 = np.array([1.0, -0.5])
        run = simulate_continuous(
            STAR4,
            h_blocks(4),
            source,
            GAMMA,
            GAMMA,
            10.0,
            x0,
            np.tile(x0, (4, 1)),
            f_hat_init=np.tile(F_STAR, (4, 1, 1)),
            g_hat_init=np.tile(G_STAR, (4, 1, 1)),
            n_out=101,
        )
        assert np.max(run.log.total_error) <= 1e-9

    def test_zero_disturbance_lyapunov_nonincreasing(self):
        source = reference_source()
        op = build_H(STAR4, list(h_blocks(4)), source.f)
        p_c, _ = certificate_continuous(op)
        rng = np.random.default_rng(1)
        run = simulate_continuous(
            STAR4,
            h_blocks(4),
            source,
            GAMMA,
            GAMMA,
            10.0,
            np.array([1.0, -0.5]),
            rng.uniform(-1.0, 1.0, (4, 2)),
            p_c=p_c,
            n_out=201,
        )
        v = run.log.lyapunov
        assert np.all(np.diff(v) <= 1e-6 * v[0])
        assert np.all(np.isfinite(run.log.total_error))

    def test_error_definition_matches_helper(self):
        source = reference_source()
        rng = np.random.default_rng(2)
        agents = rng.standard_normal((4, 2))
        x0 = rng.standard_normal(2)
        err = estimation_error(CYCLIC4, x0, agents)
        lap_kron = kron(CYCLIC4.laplacian, np.eye(2))
        expected = (lap_kron @ (agents - x0[None, :]).reshape(-1)).reshape(4, 2)
        np.testing.assert_allclose(err, expected, atol=1e-12)

    def test_disturbance_free_error_decreases_across_horizons(self):
        # |e(T)| for T in {10, 20, 30} per topology, expected monotone decay
        for bundle in (STAR4, CYCLIC4, PATH4):
            # one rng stream: source perturbation draws first, then agent init
            rng = np.random.default_rng(12345)
            f, g = perturbed_pair(F_STAR, G_STAR, 0.55, 0.50, rng)
            source = ContinuousSource(f=f, g=g, excitation=continuous_excitation())
            op = build_H(bundle, list(h_blocks(4)), source.f)
            p_c, _ = certificate_continuous(op)
            run = simulate_continuous(
                bundle,
                h_blocks(4),
                source,
                GAMMA,
                GAMMA,
                30.0,
                np.array([1.0, -0.5]),
                rng.uniform(-1.0, 1.0, (4, 2)),
                p_c=p_c,
                n_out=301,
            )
            e10 = run.log.total_error[100]
            e20 = run.log.total_error[200]
            e30 = run.log.total_error[300]
            assert e30 < e20 < e10

    def test_signal_dimension_mismatch(self):
        source = ContinuousSource(
            f=F_STAR, g=np.zeros((2, 3)), excitation=continuous_excitation()
        )
        with pytest.raises(SimulationError):
            make_rhs(STAR4, h_blocks(4), source, GAMMA, GAMMA)

    def test_zero_signal_source_decay(self):
        # no excitation, no disturbance, stable true source: errors decay
        source = ContinuousSource(
            f=np.array([[-1.0, 0.0], [0.0, -1.0]]),
            g=G_STAR,
            excitation=zero_signal(1),
        )
        rng = np.random.default_rng(3)
        run = simulate_continuous(
            STAR4,
            h_blocks(4),
            source,
            GAMMA,
            GAMMA,
            20.0,
            np.array([0.5, -0.5]),
            rng.uniform(-1.0, 1.0, (4, 2)),
            n_out=101,
        )
        assert run.log.total_error[-1] < 1e-6
