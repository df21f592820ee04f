"""Dense real linear algebra used throughout the package.

Everything here operates on plain ``numpy.ndarray`` matrices of float64 and is
pure: no function mutates its inputs, so all routines are safe to call from
multiple threads.

Tolerances are scale-relative (multiplied by a norm of the input) so the same
checks stay meaningful across magnitudes.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import LinalgError, StabilityError

# Kronecker products larger than this many entries are refused outright.
KRON_ENTRY_CAP = 10_000_000

# Vectorized Lyapunov/Stein solves are O(dim^6); refuse beyond desk scale.
LYAPUNOV_DIM_CAP = 64


def as_matrix(a, name: str = "matrix") -> np.ndarray:
    """Validate and convert ``a`` to a 2-D float64 array with finite entries."""
    arr = np.asarray(a, dtype=float)
    if arr.ndim != 2 or arr.size == 0:
        raise LinalgError(f"{name} must be a nonempty 2-D array, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise LinalgError(f"{name} contains non-finite entries")
    return arr


def _require_square(a: np.ndarray, name: str = "matrix") -> np.ndarray:
    if a.shape[0] != a.shape[1]:
        raise LinalgError(f"{name} must be square, got shape {a.shape}")
    return a


@dataclass(frozen=True)
class Spectrum:
    """Eigenvalues of a real square matrix plus the two scalars used everywhere.

    Attributes
    ----------
    eigenvalues : complex ndarray, one entry per matrix dimension.
    max_real_part : max over Re(lambda_i).
    spectral_radius : max over |lambda_i|.
    """

    eigenvalues: np.ndarray
    max_real_part: float
    spectral_radius: float

    @property
    def min_real_part(self) -> float:
        return float(np.min(self.eigenvalues.real))


def kron(a, b, entry_cap: int = KRON_ENTRY_CAP) -> np.ndarray:
    """Kronecker product with a size guard.

    Block (i, j) of the result equals ``a[i, j] * b``.
    """
    a = as_matrix(a, "a")
    b = as_matrix(b, "b")
    entries = a.shape[0] * b.shape[0] * a.shape[1] * b.shape[1]
    if entries > entry_cap:
        raise LinalgError(
            f"kron result would have {entries} entries, above the cap {entry_cap}"
        )
    return np.kron(a, b)


def eigenvalues(a) -> Spectrum:
    """All eigenvalues of a real square matrix.

    Raises
    ------
    LinalgError
        If the underlying QR iteration fails to converge; never returns
        silently wrong values.
    """
    a = _require_square(as_matrix(a))
    try:
        w = np.linalg.eigvals(a)
    except np.linalg.LinAlgError as exc:  # pragma: no cover - hard to trigger
        raise LinalgError(f"eigenvalue iteration did not converge: {exc}") from exc
    return Spectrum(
        eigenvalues=w,
        max_real_part=float(np.max(w.real)),
        spectral_radius=float(np.max(np.abs(w))),
    )


def eigenpairs(a) -> tuple[np.ndarray, np.ndarray]:
    """Eigenvalues and right eigenvectors, residual-checked.

    Each returned pair satisfies ``|a v - lambda v| <= 1e-8 |a|_F`` (scaled by
    the unit-norm eigenvector).
    """
    a = _require_square(as_matrix(a))
    try:
        w, v = np.linalg.eig(a)
    except np.linalg.LinAlgError as exc:  # pragma: no cover
        raise LinalgError(f"eigenvalue iteration did not converge: {exc}") from exc
    scale = np.linalg.norm(a)
    res = np.linalg.norm(a @ v - v * w, axis=0) / np.maximum(
        np.linalg.norm(v, axis=0), 1e-300
    )
    if np.any(res > 1e-8 * max(scale, 1e-300)):
        raise LinalgError("eigenpair residual check failed")
    return w, v


def _check_spd_rhs(q: np.ndarray, name: str = "q") -> np.ndarray:
    q = _require_square(as_matrix(q, name), name)
    if not is_positive_definite(q):
        raise LinalgError(f"{name} must be symmetric positive definite")
    return q


def _solve_sylvester_vectorized(coeff: np.ndarray, q: np.ndarray) -> np.ndarray:
    """Solve coeff @ vec(P) = -vec(q) and return the symmetrized reshape."""
    dim = q.shape[0]
    try:
        p_vec = np.linalg.solve(coeff, -q.reshape(-1))
    except np.linalg.LinAlgError as exc:
        raise LinalgError(f"vectorized Sylvester system is singular: {exc}") from exc
    p = p_vec.reshape(dim, dim)
    asym = np.linalg.norm(p - p.T) / max(np.linalg.norm(p), 1e-300)
    if asym > 1e-6:
        raise LinalgError(
            f"solution asymmetry {asym:.2e} exceeds 1e-6; system is ill-conditioned"
        )
    return 0.5 * (p + p.T)


def solve_lyapunov_continuous(h, q, dim_cap: int = LYAPUNOV_DIM_CAP) -> np.ndarray:
    """Solve ``h^T P + P h = -q`` for symmetric P > 0.

    ``h`` must be Hurwitz and ``q`` symmetric positive definite; otherwise the
    solution may be indefinite and the call is refused.
    """
    h = _require_square(as_matrix(h, "h"), "h")
    q = _check_spd_rhs(q)
    if h.shape != q.shape:
        raise LinalgError(f"dimension mismatch: h {h.shape} vs q {q.shape}")
    if h.shape[0] > dim_cap:
        raise LinalgError(
            f"dimension {h.shape[0]} above the vectorized-solve cap {dim_cap}"
        )
    if eigenvalues(h).max_real_part >= 0.0:
        raise StabilityError("h is not Hurwitz; refusing Lyapunov solve")
    n = h.shape[0]
    eye = np.eye(n)
    # Row-major vec: vec(h^T P) = (h^T (x) I) vec(P), vec(P h) = (I (x) h^T) vec(P).
    coeff = np.kron(h.T, eye) + np.kron(eye, h.T)
    p = _solve_sylvester_vectorized(coeff, q)
    residual = np.linalg.norm(h.T @ p + p @ h + q) / np.linalg.norm(q)
    if residual > 1e-8:
        raise LinalgError(f"Lyapunov residual {residual:.2e} exceeds 1e-8")
    return p


def solve_stein(s, q, dim_cap: int = LYAPUNOV_DIM_CAP) -> np.ndarray:
    """Solve ``s^T P s - P = -q`` for symmetric P > 0.

    ``s`` must be Schur-stable (spectral radius < 1).
    """
    s = _require_square(as_matrix(s, "s"), "s")
    q = _check_spd_rhs(q)
    if s.shape != q.shape:
        raise LinalgError(f"dimension mismatch: s {s.shape} vs q {q.shape}")
    if s.shape[0] > dim_cap:
        raise LinalgError(
            f"dimension {s.shape[0]} above the vectorized-solve cap {dim_cap}"
        )
    if eigenvalues(s).spectral_radius >= 1.0:
        raise StabilityError("s is not Schur-stable; refusing Stein solve")
    n = s.shape[0]
    coeff = np.kron(s.T, s.T) - np.eye(n * n)
    p = _solve_sylvester_vectorized(coeff, q)
    residual = np.linalg.norm(s.T @ p @ s - p + q) / np.linalg.norm(q)
    if residual > 1e-8:
        raise LinalgError(f"Stein residual {residual:.2e} exceeds 1e-8")
    return p


def is_positive_definite(a) -> bool:
    """True iff the symmetric part of ``a`` has all eigenvalues > 1e-10 |a|_F.

    ``a`` must already be symmetric within 1e-10 |a|_F; asymmetric input is an
    error rather than a silent False.
    """
    a = _require_square(as_matrix(a))
    scale = np.linalg.norm(a)
    if np.linalg.norm(a - a.T) > 1e-10 * max(scale, 1e-300):
        raise LinalgError("matrix is asymmetric beyond tolerance")
    w = np.linalg.eigvalsh(0.5 * (a + a.T))
    return bool(np.min(w) > 1e-10 * scale)


def sym(a) -> np.ndarray:
    """Symmetric part (a + a^T) / 2."""
    a = _require_square(as_matrix(a))
    return 0.5 * (a + a.T)


def left_inverse_laplacian(l) -> np.ndarray:
    """Return ``(l^T l)^{-1} l^T`` for a square positive-stable ``l``.

    For a square invertible ``l`` this equals ``l^{-1}``; the product with
    ``l`` is checked against the identity to 1e-10 * m.
    """
    l = _require_square(as_matrix(l, "l"), "l")
    m = l.shape[0]
    if eigenvalues(l).min_real_part <= 0.0:
        raise LinalgError("laplacian has eigenvalues with nonpositive real part")
    try:
        result = np.linalg.solve(l.T @ l, l.T)
    except np.linalg.LinAlgError as exc:
        raise LinalgError(f"laplacian is numerically singular: {exc}") from exc
    if np.linalg.norm(result @ l - np.eye(m)) > 1e-10 * m:
        raise LinalgError("left-inverse residual check failed; l is ill-conditioned")
    return result
