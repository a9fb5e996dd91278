"""Euler-Maruyama simulation of stationary diffusions and Fisher-z CI tests.

Two drift families are supported, both of the form
``f(x) = A x + B tanh(x)``:

* linear: ``A = M`` (stable, supported on the graph), ``B = 0``;
* tanh: ``A = -rate I`` and ``B[i, j] = w_ij`` for each edge ``j -> i``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Dict, Optional, Sequence

import numpy as np
from numba import njit
from scipy.stats import norm

from .graph_core import DirectedGraph, Edge
from .lyapunov_numeric import as_matrix, is_stable, respects_graph

DIVERGENCE_BOUND = 1e8
MAX_CONDITION = 1e12


class SimulationDivergedError(ArithmeticError):
    pass


class NearSingularError(np.linalg.LinAlgError):
    """The conditioning block of the sample covariance is near singular."""


@dataclass(frozen=True)
class DriftSpec:
    kind: str
    A: np.ndarray
    B: np.ndarray
    graph: Optional[DirectedGraph] = None
    rate: float = 0.0

    @classmethod
    def linear(cls, M, g: Optional[DirectedGraph] = None) -> "DriftSpec":
        M = as_matrix(M)
        if not is_stable(M):
            raise ValueError("linear drift must be stable")
        if g is not None and not respects_graph(M, g):
            raise ValueError("linear drift is not supported on the graph")
        return cls("linear", M, np.zeros_like(M), g)

    @classmethod
    def tanh(cls, g: DirectedGraph, weights: Optional[Dict[Edge, float]] = None,
             rate: float = 1.0) -> "DriftSpec":
        if not rate > 0:
            raise ValueError("tanh drift needs rate > 0")
        weights = weights or {}
        if set(weights) - set(g.edges):
            raise ValueError("weights given for edges not in the graph")
        B = np.zeros((g.n, g.n))
        for a, b in g.edges:
            B[b - 1, a - 1] = float(weights.get((a, b), 1.0))
        return cls("tanh", -rate * np.eye(g.n), B, g, float(rate))

    @property
    def n(self) -> int:
        return self.A.shape[0]

    def decay_rate(self) -> float:
        """Slowest relaxation rate: spectral gap of ``M``, or ``rate`` for
        the tanh family (the diagonal of its Jacobian; exact on DAGs)."""
        if self.kind == "linear":
            return float(-np.linalg.eigvals(self.A).real.max())
        return self.rate

    def __call__(self, x: np.ndarray) -> np.ndarray:
        return self.A @ x + self.B @ np.tanh(x)

    def to_json(self) -> dict:
        if self.kind == "linear":
            return {"kind": "linear", "M": self.A.tolist()}
        return {"kind": "tanh",
                "graph": {"n": self.graph.n, "edges": [list(e) for e in sorted(self.graph.edges)]},
                "weights": [[a, b, self.B[b - 1, a - 1]] for a, b in sorted(self.graph.edges)],
                "rate": self.rate}

    @classmethod
    def from_json(cls, obj) -> "DriftSpec":
        kind = obj.get("kind")
        if kind == "linear":
            g = None
            if "graph" in obj:
                g = DirectedGraph.from_edges(obj["graph"]["n"], map(tuple, obj["graph"]["edges"]))
            return cls.linear(np.array(obj["M"], float), g)
        if kind == "tanh":
            g = DirectedGraph.from_edges(obj["graph"]["n"], map(tuple, obj["graph"]["edges"]))
            w = {(int(a), int(b)): float(v) for a, b, v in obj.get("weights", [])}
            return cls.tanh(g, w, float(obj.get("rate", 1.0)))
        raise ValueError(f"unknown drift kind {kind!r}")


@dataclass(frozen=True)
class SimConfig:
    n_samples: int = 10_000
    dt: float = 0.01
    burn_in: int = 10_000
    thinning: int = 100
    seed: int = 0
    diffusion: Optional[Sequence[float]] = field(default=None)

    def __post_init__(self):
        if not self.dt > 0:
            raise ValueError("dt must be positive")
        if self.n_samples < 100:
            raise ValueError("n_samples must be at least 100")
        if self.burn_in < 0 or self.thinning < 1:
            raise ValueError("burn_in must be >= 0 and thinning >= 1")
        if not 0 <= self.seed < 2 ** 64:
            raise ValueError("seed must be a 64-bit unsigned integer")
        if self.diffusion is not None and not all(c > 0 for c in self.diffusion):
            raise ValueError("diffusion entries must be positive")

    def diffusion_diag(self, n: int) -> np.ndarray:
        if self.diffusion is None:
            return np.full(n, 2.0)
        c = np.asarray(self.diffusion, float)
        if c.shape != (n,):
            raise ValueError(f"diffusion must have {n} entries")
        return c

    @classmethod
    def from_json(cls, obj) -> "SimConfig":
        known = {"n_samples", "dt", "burn_in", "thinning", "seed", "diffusion"}
        extra = set(obj) - known
        if extra:
            raise ValueError(f"unknown config keys {sorted(extra)}")
        return cls(**obj)


@njit(cache=True)
def _run(A, B, tanh_cols, x, rng, scale, dt, burn, thin, out, bound):
    """Euler-Maruyama loop; returns the failing step (1-based) on
    divergence, else 0."""
    n = x.shape[0]
    f = np.empty(n)
    th = np.zeros(n)
    total = burn + out.shape[0] * thin
    for step in range(1, total + 1):
        for a in tanh_cols:
            th[a] = math.tanh(x[a])
        for a in range(n):
            acc = 0.0
            for b in range(n):
                acc += A[a, b] * x[b] + B[a, b] * th[b]
            f[a] = acc
        for a in range(n):
            x[a] += f[a] * dt + scale[a] * rng.standard_normal()
            if not abs(x[a]) <= bound:
                return step
        k = step - burn
        if k > 0 and k % thin == 0:
            out[k // thin - 1, :] = x
    return 0


def simulate(spec: DriftSpec, cfg: SimConfig) -> np.ndarray:
    """``n_samples x n`` matrix of retained states, starting from ``X = 0``.

    Normals come from a Philox generator seeded with ``cfg.seed``, drawn in
    step order and coordinate order within a step.
    """
    n = spec.n
    scale = np.sqrt(cfg.dt * cfg.diffusion_diag(n))
    rng = np.random.Generator(np.random.Philox(cfg.seed))
    out = np.empty((cfg.n_samples, n))
    A = np.ascontiguousarray(spec.A, dtype=float)
    B = np.ascontiguousarray(spec.B, dtype=float)
    tanh_cols = np.flatnonzero(np.any(B != 0, axis=0))
    bad = _run(A, B, tanh_cols, np.zeros(n), rng, scale, cfg.dt,
               cfg.burn_in, cfg.thinning, out, DIVERGENCE_BOUND)
    if bad:
        raise SimulationDivergedError(
            f"state left |x| <= {DIVERGENCE_BOUND:g} at step {bad}; "
            f"dt={cfg.dt} is likely too large for this drift")
    return out


def relaxation_thinning(spec: DriftSpec, dt: float, times: float = 2.0) -> int:
    """Steps spanning ``times`` relaxation times, so that retained states have
    lag-one autocorrelation about ``exp(-times)``."""
    return max(1, math.ceil(times / (dt * spec.decay_rate())))


def partial_correlation(S, i: int, j: int, K: Sequence[int] = ()) -> float:
    """Partial correlation of ``i, j`` given ``K`` (1-based) from a covariance."""
    S = as_matrix(S)
    n = S.shape[0]
    K = [int(k) for k in K]
    if i == j or {i, j} & set(K) or len(set(K)) != len(K):
        raise ValueError("i, j and K must be distinct")
    if not all(1 <= v <= n for v in [i, j, *K]):
        raise ValueError(f"index outside 1..{n}")
    a = [i - 1, j - 1]
    P = S[np.ix_(a, a)]
    if K:
        k = [v - 1 for v in K]
        Skk = S[np.ix_(k, k)]
        if np.linalg.cond(Skk) > MAX_CONDITION:
            raise NearSingularError("conditioning block has condition number > 1e12")
        Sak = S[np.ix_(a, k)]
        P = P - Sak @ np.linalg.solve(Skk, Sak.T)
    return float(np.clip(P[0, 1] / math.sqrt(P[0, 0] * P[1, 1]), -1.0, 1.0))


def _check_samples(samples, K) -> np.ndarray:
    X = np.asarray(samples, float)
    if X.ndim != 2:
        raise ValueError("samples must be a 2-d array")
    N, n = X.shape
    if len(K) > n - 2:
        raise ValueError("conditioning set too large")
    if N <= len(K) + 3:
        raise ValueError("need more samples than |K| + 3")
    return X


def empirical_partial_correlation(samples, i: int, j: int, K: Sequence[int] = ()) -> float:
    K = list(K)
    X = _check_samples(samples, K)
    return partial_correlation(np.cov(X, rowvar=False), i, j, K)


class Decision(str, Enum):
    REJECT = "reject"
    FAIL_TO_REJECT = "fail-to-reject"


def fisher_z(samples, i: int, j: int, K: Sequence[int] = ()) -> float:
    K = list(K)
    r = empirical_partial_correlation(samples, i, j, K)
    N = np.asarray(samples).shape[0]
    r = min(max(r, -1 + 1e-15), 1 - 1e-15)
    return math.atanh(r) * math.sqrt(N - len(K) - 3)


def fisher_z_ci_test(samples, i: int, j: int, K: Sequence[int] = (),
                     alpha: float = 0.01) -> Decision:
    """Two-sided test of zero partial correlation at level ``alpha``."""
    if not 0 < alpha < 1:
        raise ValueError("alpha must lie in (0, 1)")
    z = fisher_z(samples, i, j, K)
    crit = norm.ppf(1 - alpha / 2)
    return Decision.REJECT if abs(z) > crit else Decision.FAIL_TO_REJECT
