"""Exhaustive agreement check between separation and the Gaussian models.

For every directed graph on ``n`` vertices and every elementary statement,
an implied statement must give a vanishing minor under random stable drifts
and a not-implied one must yield a verified witness.
"""

from __future__ import annotations

from typing import Iterable, Iterator, Optional

import numpy as np

from .graph_core import DirectedGraph
from .lyapunov_numeric import (
    DEFAULT_TOL, SingularSystemError, gaussian_minor, random_stable_drift,
    solve_lyapunov,
)
from .markov import enumerate_elementary_ci
from .minor_checks import CheckReport
from .witness import find_witness, verify_witness


def all_graphs(n: int) -> Iterator[DirectedGraph]:
    """All ``2^(n(n-1))`` directed graphs without self-loops on ``1..n``."""
    pairs = [(a, b) for a in range(1, n + 1) for b in range(1, n + 1) if a != b]
    for mask in range(1 << len(pairs)):
        yield DirectedGraph(n, frozenset(p for k, p in enumerate(pairs) if mask >> k & 1))


def check_graph(g: DirectedGraph, rng: np.random.Generator, rep: CheckReport,
                drifts: int = 20, tol: float = DEFAULT_TOL) -> None:
    stmts = enumerate_elementary_ci(g)
    implied = [s for s in stmts if s.implied]
    sigmas = []
    if implied:
        eye2 = 2 * np.eye(g.n)
        while len(sigmas) < drifts:
            try:
                sigmas.append(solve_lyapunov(random_stable_drift(g, rng), eye2))
            except SingularSystemError:  # pragma: no cover - dominance makes this unreachable
                continue
    for s in stmts:
        (i,), (j,) = s.I, s.J
        K = sorted(s.K)
        label = f"{sorted(g.edges)} ({i},{j}|{K})"
        if s.implied:
            worst = max(abs(d) / scale for d, scale in
                        (gaussian_minor(S, i, j, K) for S in sigmas))
            rep.record(worst <= tol, f"{label}: implied but |minor|/scale = {worst:.3g}")
        else:
            try:
                problems = verify_witness(find_witness(g, i, j, K), tol)
            except Exception as exc:  # report, don't abort the sweep
                problems = [repr(exc)]
            rep.record(not problems, f"{label}: {problems}")


def equivalence_harness(n: int = 4, drifts: int = 20, seed: int = 0,
                    tol: float = DEFAULT_TOL,
                    graphs: Optional[Iterable[DirectedGraph]] = None) -> CheckReport:
    rep = CheckReport(f"separation agrees with Gaussian CI on all graphs, n={n}")
    rng = np.random.default_rng(seed)
    for g in (all_graphs(n) if graphs is None else graphs):
        check_graph(g, rng, rep, drifts, tol)
    return rep
