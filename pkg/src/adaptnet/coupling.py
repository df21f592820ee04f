"""Network coupling operators and their stability machinery.

Builds the mn-by-mn operators that govern the stacked estimation-error
dynamics, evaluates the spectral and LMI sufficient conditions (nominal and
robust), and computes Lyapunov/Stein certificates together with the
input-to-state-stability constants derived from them.

All sufficient conditions are one-way: ``holds=False`` never implies
instability, and the operator's ``stable`` flag always comes from a direct
eigenvalue computation.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import linalg
from .errors import LinalgError, StabilityError
from .graph import LaplacianBundle
from .linalg import Spectrum, eigenvalues, kron, solve_lyapunov_continuous, solve_stein, sym

NEG_DEF_TOL = 1e-10


@dataclass(frozen=True)
class CouplingOperator:
    """Assembled coupling operator with its stability classification.

    ``omega`` is the disturbance input matrix (laplacian (x) I_n), kept here
    because the ISS constants depend on it.
    """

    kind: str  # "continuous" | "discrete"
    matrix: np.ndarray
    spectrum: Spectrum
    stable: bool
    omega: np.ndarray
    bundle: LaplacianBundle = field(repr=False)
    block_dim: int = 0  # n

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]


@dataclass(frozen=True)
class IssConstants:
    """ISS gain constant and the epsilon at which the bound is tightest."""

    constant: float
    epsilon_star: float


@dataclass
class StabilityReport:
    """Everything the analysis pipeline learns about one scenario's operator."""

    kind: str
    lambda_min_L: float
    alpha_H: float = float("nan")  # spectral damping, min_i |Re lambda_max(H_i)|
    alpha_H_sym: float = float("nan")  # min_i -lambda_max(Sym H_i)
    alpha_F: float = float("nan")
    rho_S: float = float("nan")
    rho_A: float = float("nan")
    spectral_margin: float = float("nan")
    spectral_holds: bool = False
    stable: bool = False
    max_real_eig: float = float("nan")
    spectral_radius: float = float("nan")
    lmi_verified: bool = False
    robust_margin: float = float("nan")
    iss_constant: float = float("nan")
    epsilon_star: float = float("nan")
    P: np.ndarray | None = None
    Q: np.ndarray | None = None


def _block_diag(blocks: list[np.ndarray], n: int) -> np.ndarray:
    m = len(blocks)
    out = np.zeros((m * n, m * n))
    for i, b in enumerate(blocks):
        if b.shape != (n, n):
            raise LinalgError(
                f"observer block {i + 1} has shape {b.shape}, expected ({n},{n})"
            )
        out[i * n : (i + 1) * n, i * n : (i + 1) * n] = b
    return out


def _assemble(bundle: LaplacianBundle, blocks, source_block) -> tuple[np.ndarray, np.ndarray, int]:
    blocks = [linalg.as_matrix(b, "observer block") for b in blocks]
    source_block = linalg.as_matrix(source_block, "source block")
    n = source_block.shape[0]
    if source_block.shape != (n, n):
        raise LinalgError("source block must be square")
    m = bundle.laplacian.shape[0]
    if len(blocks) != m:
        raise LinalgError(f"expected {m} observer blocks, got {len(blocks)}")
    eye_n = np.eye(n)
    op = kron(bundle.laplacian, eye_n) @ _block_diag(blocks, n) + kron(
        bundle.adjacency_m, eye_n
    ) @ kron(np.eye(m), source_block)
    omega = kron(bundle.laplacian, eye_n)
    return op, omega, n


def build_H(bundle: LaplacianBundle, observer_blocks, f0) -> CouplingOperator:
    """Continuous coupling operator (laplacian (x) I) H + (adjacency (x) I) F0."""
    op, omega, n = _assemble(bundle, observer_blocks, f0)
    spec = eigenvalues(op)
    return CouplingOperator(
        kind="continuous",
        matrix=op,
        spectrum=spec,
        stable=bool(spec.max_real_part < -NEG_DEF_TOL),
        omega=omega,
        bundle=bundle,
        block_dim=n,
    )


def build_S(bundle: LaplacianBundle, observer_blocks, a0) -> CouplingOperator:
    """Discrete coupling operator (laplacian (x) I) S + (adjacency (x) I) A0."""
    op, omega, n = _assemble(bundle, observer_blocks, a0)
    spec = eigenvalues(op)
    return CouplingOperator(
        kind="discrete",
        matrix=op,
        spectrum=spec,
        stable=bool(spec.spectral_radius < 1.0 - NEG_DEF_TOL),
        omega=omega,
        bundle=bundle,
        block_dim=n,
    )


def damping_metrics(observer_blocks) -> tuple[float, float]:
    """(alpha_H, alpha_H_sym) for a list of Hurwitz observer blocks.

    alpha_H is the slowest spectral decay rate min_i |Re lambda_max(H_i)|;
    alpha_H_sym is min_i of -lambda_max(Sym H_i), the quantity the LMI route
    actually needs (the two coincide for normal blocks).
    """
    alpha_h = np.inf
    alpha_h_sym = np.inf
    for i, h in enumerate(observer_blocks):
        h = linalg.as_matrix(h)
        mr = eigenvalues(h).max_real_part
        if mr >= 0.0:
            raise StabilityError(f"observer block {i + 1} is not Hurwitz")
        alpha_h = min(alpha_h, abs(mr))
        alpha_h_sym = min(alpha_h_sym, -float(np.max(np.linalg.eigvalsh(sym(h)))))
    return float(alpha_h), float(alpha_h_sym)


def spectral_condition_continuous(
    bundle: LaplacianBundle, observer_blocks, f0
) -> tuple[bool, float]:
    """Sufficient spectral test for the continuous operator.

    margin = lambda_min(L) * alpha_H - |A_m|_2 * alpha_F, with
    alpha_F = max Re lambda(F0). Positive margin implies the operator is
    Hurwitz only within the condition's domain of validity; it is never
    treated as necessary.
    """
    alpha_h, _ = damping_metrics(observer_blocks)
    alpha_f = eigenvalues(f0).max_real_part
    margin = bundle.min_real_eig * alpha_h - np.linalg.norm(
        bundle.adjacency_m, 2
    ) * alpha_f
    return bool(margin > 0), float(margin)


def spectral_condition_discrete(
    bundle: LaplacianBundle, observer_blocks, a0
) -> tuple[bool, float]:
    """Sufficient spectral test for the discrete operator.

    margin = lambda_min(L) * (1 - rho_S) - |A_m|_2 * rho_A.
    """
    rho_s = 0.0
    for i, s in enumerate(observer_blocks):
        r = eigenvalues(s).spectral_radius
        if r >= 1.0:
            raise StabilityError(f"observer block {i + 1} is not Schur-stable")
        rho_s = max(rho_s, r)
    rho_a = eigenvalues(a0).spectral_radius
    margin = bundle.min_real_eig * (1.0 - rho_s) - np.linalg.norm(
        bundle.adjacency_m, 2
    ) * rho_a
    return bool(margin > 0), float(margin)


def default_laplacian_candidate(bundle: LaplacianBundle) -> np.ndarray:
    """Default P for the LMI checks: the solution of L^T P + P L = I.

    Positive stability of the Laplacian guarantees P > 0. This verifies the
    LMI formulas against a concrete candidate; no semidefinite search is done.
    """
    m = bundle.laplacian.shape[0]
    return solve_lyapunov_continuous(-bundle.laplacian, np.eye(m))


def _require_pd_candidate(p: np.ndarray) -> np.ndarray:
    p = linalg.as_matrix(p, "candidate P")
    if not linalg.is_positive_definite(p):
        raise LinalgError("candidate P is not positive definite")
    return p


def _neg_definite(mat: np.ndarray) -> bool:
    scale = max(np.linalg.norm(mat), 1e-300)
    return bool(np.max(np.linalg.eigvalsh(sym(mat))) < -NEG_DEF_TOL * scale)


def verify_lmi_separable(
    bundle: LaplacianBundle, observer_blocks, f0, candidate_p_l
) -> bool:
    """Check the graph-separable LMI for a concrete candidate P.

    The verified object is H_op^T (P (x) I) + (P (x) I) H_op < 0, the
    Lyapunov form the separable inequality certifies; a True result therefore
    implies the coupling operator is Hurwitz.
    """
    p = _require_pd_candidate(candidate_p_l)
    op, _, n = _assemble(bundle, observer_blocks, f0)
    big_p = kron(p, np.eye(n))
    return _neg_definite(op.T @ big_p + big_p @ op)


def verify_lmi_practical(
    bundle: LaplacianBundle, alpha_h: float, alpha_f: float, candidate_p_l
) -> bool:
    """Scalar-bound version of the LMI: -alpha_h (L^T P + P L) + 2 alpha_f Sym(P A_m) < 0."""
    if alpha_h <= 0:
        raise StabilityError(f"alpha_h must be positive, got {alpha_h}")
    p = _require_pd_candidate(candidate_p_l)
    lap = bundle.laplacian
    mat = -alpha_h * (lap.T @ p + p @ lap) + 2.0 * alpha_f * sym(p @ bundle.adjacency_m)
    return _neg_definite(mat)


def verify_lmi_robust(
    bundle: LaplacianBundle,
    alpha_h: float,
    f_star,
    f_bound: float,
    tau: float,
    candidate_p_l,
) -> bool:
    """Robust LMI with slack tau against norm-bounded source uncertainty.

    True iff both the tau-augmented inequality
    -alpha_h (L^T P + P L) (x) I + 2 Sym((P A_m) (x) Sym(F*)) + tau I < 0
    and the gate 2 |P A_m|_2 * f_bound < tau hold.
    """
    if tau <= 0:
        raise StabilityError(f"tau must be positive, got {tau}")
    if f_bound < 0:
        raise StabilityError(f"f_bound must be nonnegative, got {f_bound}")
    if alpha_h <= 0:
        raise StabilityError(f"alpha_h must be positive, got {alpha_h}")
    p = _require_pd_candidate(candidate_p_l)
    f_star = linalg.as_matrix(f_star, "f_star")
    n = f_star.shape[0]
    lap = bundle.laplacian
    pam = p @ bundle.adjacency_m
    mat = (
        -alpha_h * kron(lap.T @ p + p @ lap, np.eye(n))
        + 2.0 * sym(kron(pam, sym(f_star)))
        + tau * np.eye(lap.shape[0] * n)
    )
    gate = 2.0 * np.linalg.norm(pam, 2) * f_bound < tau
    return bool(_neg_definite(mat) and gate)


def robust_schur_margin(
    bundle: LaplacianBundle, observer_blocks, a_star, a_bound: float
) -> tuple[bool, float]:
    """Discrete spectral margin with rho_A replaced by rho(A*) + a_bound."""
    if a_bound < 0:
        raise StabilityError(f"a_bound must be nonnegative, got {a_bound}")
    rho_s = 0.0
    for i, s in enumerate(observer_blocks):
        r = eigenvalues(s).spectral_radius
        if r >= 1.0:
            raise StabilityError(f"observer block {i + 1} is not Schur-stable")
        rho_s = max(rho_s, r)
    rho_star = eigenvalues(a_star).spectral_radius
    margin = bundle.min_real_eig * (1.0 - rho_s) - np.linalg.norm(
        bundle.adjacency_m, 2
    ) * (rho_star + a_bound)
    return bool(margin > 0), float(margin)


def _golden_section_min(f, lo: float, hi: float, width: float = 1e-6) -> float:
    """Golden-section minimizer for a unimodal scalar function on (lo, hi)."""
    invphi = (np.sqrt(5.0) - 1.0) / 2.0
    a, b = lo, hi
    c = b - invphi * (b - a)
    d = a + invphi * (b - a)
    fc, fd = f(c), f(d)
    while b - a > width:
        if fc < fd:
            b, d, fd = d, c, fc
            c = b - invphi * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + invphi * (b - a)
            fd = f(d)
    return 0.5 * (a + b)


def certificate_continuous(op: CouplingOperator, q=None) -> tuple[np.ndarray, IssConstants]:
    """Lyapunov certificate and continuous ISS constant.

    Solves H_op^T P + P H_op = -Q and minimizes over eps in (0, 1)
    c(eps) = sqrt(beta / (alpha * lambda_min(P))) with
    alpha = (1 - eps) lambda_min(Q), beta = (1/eps) lambda_max(P W W^T P),
    W the disturbance input matrix.
    """
    if op.kind != "continuous":
        raise StabilityError("certificate_continuous requires a continuous operator")
    if not op.stable:
        raise StabilityError("operator is not Hurwitz; no certificate exists")
    q = np.eye(op.dim) if q is None else linalg.as_matrix(q, "q")
    p = solve_lyapunov_continuous(op.matrix, q)
    lam_min_q = float(np.min(np.linalg.eigvalsh(sym(q))))
    lam_min_p = float(np.min(np.linalg.eigvalsh(p)))
    pw = p @ op.omega
    beta_core = float(np.max(np.linalg.eigvalsh(pw @ pw.T)))

    def cost(eps: float) -> float:
        alpha = (1.0 - eps) * lam_min_q
        beta = beta_core / eps
        return float(np.sqrt(beta / (alpha * lam_min_p)))

    eps_star = _golden_section_min(cost, 1e-9, 1.0 - 1e-9)
    return p, IssConstants(constant=cost(eps_star), epsilon_star=eps_star)


def certificate_discrete(op: CouplingOperator, q=None) -> tuple[np.ndarray, IssConstants]:
    """Stein certificate and discrete ISS constant.

    Solves S_op^T P S_op - P = -Q and minimizes over eps in (0, 1)
    c(eps) = sqrt(beta / (alpha * lambda_min(P))) with
    alpha = (1 - eps) lambda_min(Q) / lambda_max(P),
    beta = (1/eps) lambda_max(P W Q^{-1} W^T P).
    """
    if op.kind != "discrete":
        raise StabilityError("certificate_discrete requires a discrete operator")
    if not op.stable:
        raise StabilityError("operator is not Schur-stable; no certificate exists")
    q = np.eye(op.dim) if q is None else linalg.as_matrix(q, "q")
    p = solve_stein(op.matrix, q)
    lam_min_q = float(np.min(np.linalg.eigvalsh(sym(q))))
    lam_min_p = float(np.min(np.linalg.eigvalsh(p)))
    lam_max_p = float(np.max(np.linalg.eigvalsh(p)))
    pw = p @ op.omega
    core = pw @ np.linalg.solve(sym(q), pw.T)
    beta_core = float(np.max(np.linalg.eigvalsh(sym(core))))

    def cost(eps: float) -> float:
        alpha = (1.0 - eps) * lam_min_q / lam_max_p
        beta = beta_core / eps
        return float(np.sqrt(beta / (alpha * lam_min_p)))

    eps_star = _golden_section_min(cost, 1e-9, 1.0 - 1e-9)
    return p, IssConstants(constant=cost(eps_star), epsilon_star=eps_star)


def analyze(
    bundle: LaplacianBundle,
    observer_blocks,
    source_matrix,
    kind: str,
    nominal_source=None,
    uncertainty_bound: float = 0.0,
    q=None,
) -> tuple[CouplingOperator, StabilityReport]:
    """Full stability analysis: spectral + LMI + robust checks + certificate.

    ``source_matrix`` is the perturbed matrix actually driving the dynamics;
    ``nominal_source`` (if given) is its known nominal part used by the robust
    checks together with ``uncertainty_bound``.
    """
    report = StabilityReport(kind=kind, lambda_min_L=bundle.min_real_eig)
    if kind == "continuous":
        op = build_H(bundle, observer_blocks, source_matrix)
        report.alpha_H, report.alpha_H_sym = damping_metrics(observer_blocks)
        report.alpha_F = eigenvalues(source_matrix).max_real_part
        report.spectral_holds, report.spectral_margin = spectral_condition_continuous(
            bundle, observer_blocks, source_matrix
        )
        candidate = default_laplacian_candidate(bundle)
        report.lmi_verified = verify_lmi_separable(
            bundle, observer_blocks, source_matrix, candidate
        )
        if nominal_source is not None:
            report.robust_margin = _robust_tau_slack(
                bundle, report.alpha_H_sym, nominal_source, uncertainty_bound, candidate
            )
    elif kind == "discrete":
        op = build_S(bundle, observer_blocks, source_matrix)
        report.rho_S = max(eigenvalues(s).spectral_radius for s in observer_blocks)
        report.rho_A = eigenvalues(source_matrix).spectral_radius
        report.spectral_holds, report.spectral_margin = spectral_condition_discrete(
            bundle, observer_blocks, source_matrix
        )
        if nominal_source is not None:
            _, report.robust_margin = robust_schur_margin(
                bundle, observer_blocks, nominal_source, uncertainty_bound
            )
    else:
        raise StabilityError(f"unknown operator kind {kind!r}")
    report.stable = op.stable
    report.max_real_eig = op.spectrum.max_real_part
    report.spectral_radius = op.spectrum.spectral_radius
    if op.stable and op.dim <= linalg.LYAPUNOV_DIM_CAP:
        if kind == "continuous":
            p, iss = certificate_continuous(op, q)
        else:
            p, iss = certificate_discrete(op, q)
        report.P = p
        report.Q = np.eye(op.dim) if q is None else np.asarray(q, dtype=float)
        report.iss_constant = iss.constant
        report.epsilon_star = iss.epsilon_star
    return op, report


def _robust_tau_slack(
    bundle, alpha_h, f_star, f_bound, candidate, taus=None
) -> float:
    """Best slack tau - 2|P A_m| f over a log grid; negative means infeasible."""
    pam_norm = 2.0 * np.linalg.norm(
        np.asarray(candidate) @ bundle.adjacency_m, 2
    )
    best = -np.inf
    taus = taus if taus is not None else [10.0 ** k for k in range(-6, 4)]
    for tau in taus:
        try:
            ok = verify_lmi_robust(bundle, alpha_h, f_star, f_bound, tau, candidate)
        except StabilityError:
            continue
        if ok:
            best = max(best, tau - pam_norm * f_bound)
    if best == -np.inf:
        # report how far the gate is from any feasible tau
        best = -pam_norm * max(f_bound, 1.0)
    return float(best)
