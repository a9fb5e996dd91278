"""Dense Lyapunov solves, stability and the Gaussian CI determinant test."""

from __future__ import annotations

import warnings
from enum import Enum
from typing import Iterable, Sequence

import numpy as np
from scipy.linalg import LinAlgWarning, lapack, lu_factor, lu_solve

from .graph_core import DirectedGraph

DEFAULT_TOL = 1e-7


class SingularSystemError(np.linalg.LinAlgError):
    """The Kronecker system is singular, so the Lyapunov solution is not unique."""


class CIVerdict(str, Enum):
    INDEPENDENT = "independent"
    DEPENDENT = "dependent"
    INCONCLUSIVE = "inconclusive"


def as_matrix(A, square: bool = True) -> np.ndarray:
    """Validate a real matrix: 2-d, finite, optionally square."""
    A = np.asarray(A, dtype=float)
    if A.ndim != 2:
        raise ValueError(f"expected a matrix, got shape {A.shape}")
    if square and A.shape[0] != A.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {A.shape}")
    if not np.all(np.isfinite(A)):
        raise ValueError("matrix has non-finite entries")
    return A


def _same_shape(*mats):
    shapes = {m.shape for m in mats}
    if len(shapes) != 1:
        raise ValueError(f"dimension mismatch: {sorted(shapes)}")


def kronecker_operator(M: np.ndarray) -> np.ndarray:
    """Matrix of ``S -> M S + S M^T`` acting on column-major ``vec(S)``."""
    n = M.shape[0]
    eye = np.eye(n)
    return np.kron(eye, M) + np.kron(M, eye)


def solve_lyapunov(M, C) -> np.ndarray:
    """Solve ``M S + S M^T = -C`` by LU on the vectorized system."""
    M, C = as_matrix(M), as_matrix(C)
    _same_shape(M, C)
    n = M.shape[0]
    if n == 0:
        return np.zeros((0, 0))
    A = kronecker_operator(M)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", LinAlgWarning)
        lu, piv = lu_factor(A, check_finite=False)
    anorm = np.abs(A).sum(axis=0).max()
    rcond, info = lapack.dgecon(lu, anorm, norm="1")
    if info != 0 or anorm == 0 or rcond < n * n * np.finfo(float).eps:
        raise SingularSystemError(
            f"Kronecker system singular (rcond={rcond:.3g}); M has eigenvalues "
            "summing to zero")
    x = lu_solve((lu, piv), -C.reshape(-1, order="F"), check_finite=False)
    S = x.reshape((n, n), order="F")
    return (S + S.T) / 2


def lyapunov_residual(M, S, C) -> float:
    M, S, C = as_matrix(M), as_matrix(S), as_matrix(C)
    _same_shape(M, S, C)
    if M.size == 0:
        return 0.0
    return float(np.abs(M @ S + S @ M.T + C).max())


def residual_bound(M, S, C, rel: float = 1e-8) -> float:
    """Backward-stability threshold ``rel * (|M| |S| + |C|)`` in the max norm."""
    norm = lambda A: float(np.abs(A).max()) if np.size(A) else 0.0
    return rel * (norm(M) * norm(S) + norm(C))


def is_positive_definite(S) -> bool:
    """Cholesky test; rejects matrices that are visibly asymmetric."""
    S = as_matrix(S)
    scale = float(np.abs(S).max()) if S.size else 0.0
    if np.abs(S - S.T).max(initial=0.0) > 1e-10 * scale:
        raise ValueError("matrix is not symmetric")
    if S.size == 0:
        return True
    _, info = lapack.dpotrf(S, lower=True)
    return info == 0


def is_stable(M) -> bool:
    """True iff every eigenvalue of M has negative real part.

    Uses the Lyapunov criterion: the solution for ``C = I`` must exist and be
    positive definite.  A second solve with ``M + eps I`` guards spectra that
    sit numerically on the imaginary axis.
    """
    M = as_matrix(M)
    n = M.shape[0]
    if n == 0:
        return True
    eps = 1e-9 * max(float(np.abs(M).max()), 1.0)
    eye = np.eye(n)
    for shifted in (M, M + eps * eye):
        try:
            S = solve_lyapunov(shifted, eye)
        except SingularSystemError:
            return False
        if not is_positive_definite(S):
            return False
    return True


def respects_graph(M, g: DirectedGraph, atol: float = 0.0) -> bool:
    """Off-diagonal support of M lies in the edges: ``M[j, i] != 0`` needs ``i -> j``."""
    M = as_matrix(M)
    if M.shape != (g.n, g.n):
        raise ValueError("drift size does not match the graph")
    for r, c in zip(*np.nonzero(np.abs(M) > atol)):
        if r != c and not g.has_edge(int(c) + 1, int(r) + 1):
            return False
    return True


def minor_indices(i: int, j: int, K: Iterable[int], n: int):
    """Ascending 0-based row and column indices of ``Sigma_{iK, jK}``."""
    K = set(K)
    if i == j:
        raise ValueError("i and j must differ")
    if i in K or j in K:
        raise ValueError("K must not contain i or j")
    for v in K | {i, j}:
        if not (isinstance(v, (int, np.integer)) and 1 <= v <= n):
            raise ValueError(f"vertex {v!r} outside 1..{n}")
    rows = sorted(K | {i})
    cols = sorted(K | {j})
    return [v - 1 for v in rows], [v - 1 for v in cols]


def minor_scale(S: np.ndarray, rows: Sequence[int], cols: Sequence[int]) -> float:
    """Product of ``max(|row a|, |column b|)`` over matched positions (a, b).

    Norms are taken over the full rows and columns of ``S``, which bounds
    ``|det S[rows, cols]|`` (Hadamard) and keeps the bound away from zero
    when the submatrix itself is tiny.
    """
    rn = np.linalg.norm(S, axis=1)
    cn = np.linalg.norm(S, axis=0)
    return float(np.prod([max(rn[a], cn[b]) for a, b in zip(rows, cols)]))


def gaussian_minor(S, i: int, j: int, K: Sequence[int]):
    """``(det Sigma_{iK, jK}, scale)`` with rows and columns in ascending order."""
    S = as_matrix(S)
    rows, cols = minor_indices(i, j, K, S.shape[0])
    sub = S[np.ix_(rows, cols)]
    return float(np.linalg.det(sub)), minor_scale(S, rows, cols)


def gaussian_ci_test(S, i: int, j: int, K: Sequence[int] = (),
                     tol: float = DEFAULT_TOL) -> CIVerdict:
    d, scale = gaussian_minor(S, i, j, K)
    if abs(d) <= tol * scale:
        return CIVerdict.INDEPENDENT
    if abs(d) > 10 * tol * scale:
        return CIVerdict.DEPENDENT
    return CIVerdict.INCONCLUSIVE


def random_stable_drift(g: DirectedGraph, rng: np.random.Generator,
                        low: float = 0.5, high: float = 2.0) -> np.ndarray:
    """Random drift supported on ``g`` made stable by strict row dominance.

    Edge weights are uniform in ``+-[low, high]``; each diagonal entry is
    minus the absolute row sum minus a uniform draw in ``[low, high]``.
    """
    n = g.n
    M = np.zeros((n, n))
    for a, b in sorted(g.edges):
        M[b - 1, a - 1] = rng.choice([-1.0, 1.0]) * rng.uniform(low, high)
    for v in range(n):
        M[v, v] = -(np.abs(M[v]).sum() + rng.uniform(low, high))
    return M
