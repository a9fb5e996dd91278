"""Separation in bidirected graphs and the trek-separation CI decision."""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from itertools import combinations
from typing import FrozenSet, Iterable, List, Optional, Tuple, Union

from .graph_core import BidirectedGraph, DirectedGraph, _check_vertex, trek_graph

DEFAULT_MAX_N = 12


class SetOverlapError(ValueError):
    """The sets of a CI query are not pairwise disjoint (or I/J empty)."""


class EnumerationCapError(ValueError):
    """Exhaustive enumeration refused because n exceeds the configured cap."""


@dataclass(frozen=True)
class CIStatement:
    I: FrozenSet[int]
    J: FrozenSet[int]
    K: FrozenSet[int]
    implied: bool
    evidence: Optional[Tuple[int, ...]] = None

    @property
    def verdict(self) -> str:
        return "implied-independent" if self.implied else "not-implied"

    def to_json(self) -> dict:
        """Elementary statements use the ``i``/``j`` keys; others ``I``/``J``."""
        if len(self.I) == 1 and len(self.J) == 1:
            head = {"i": next(iter(self.I)), "j": next(iter(self.J))}
        else:
            head = {"I": sorted(self.I), "J": sorted(self.J)}
        return {
            **head,
            "K": sorted(self.K),
            "implied": self.implied,
            "evidence": list(self.evidence) if self.evidence else None,
        }

    def __str__(self):
        def fmt(s):
            return "{" + ",".join(map(str, sorted(s))) + "}"
        rel = "_||_" if self.implied else "not _||_"
        return f"{fmt(self.I)} {rel} {fmt(self.J)} | {fmt(self.K)}"


def _as_set(n: int, S: Iterable[int]) -> FrozenSet[int]:
    S = frozenset(S)
    for v in S:
        _check_vertex(n, v)
    return S


def _check_query(n, I, J, K=()) -> Tuple[FrozenSet[int], ...]:
    I, J, K = _as_set(n, I), _as_set(n, J), _as_set(n, K)
    if not I or not J:
        raise SetOverlapError("I and J must be nonempty")
    if I & J or I & K or J & K:
        raise SetOverlapError("I, J, K must be pairwise disjoint")
    return I, J, K


def connecting_path(bg: BidirectedGraph, I, J, through) -> Optional[Tuple[int, ...]]:
    """Shortest path from I to J whose interior lies in ``through``.

    Among the shortest such paths the lexicographically smallest vertex
    sequence is returned; ``None`` when I and J are disconnected.
    """
    I, J, through = set(I), set(J), set(through)
    dist = {}
    queue = deque()
    for v in J:
        dist[v] = 0
        queue.append(v)
    while queue:
        v = queue.popleft()
        for w in bg.neighbors(v):
            if w in through and w not in dist:
                dist[w] = dist[v] + 1
                queue.append(w)

    def reach(i):
        best = [dist[w] + 1 for w in bg.neighbors(i) if w in dist]
        return min(best, default=None)

    starts = [(d, i) for i in sorted(I) if (d := reach(i)) is not None]
    if not starts:
        return None
    length, x = min(starts)
    path = [x]
    remaining = length
    while remaining > 0:
        x = min(w for w in bg.neighbors(x)
                if w in dist and dist[w] == remaining - 1
                and (remaining > 1 or w in J))
        path.append(x)
        remaining -= 1
    return tuple(path)


def separated(bg: BidirectedGraph, I, J, S) -> bool:
    """True iff every path from I to J in ``bg`` meets S."""
    I, J, S = _check_query(bg.n, I, J, S)
    rest = frozenset(bg.vertices) - S - I - J
    return connecting_path(bg, I, J, rest | I | J) is None


def ci_implied(g: DirectedGraph, I, J, K=(), bg: Optional[BidirectedGraph] = None
               ) -> CIStatement:
    """Decide whether I _||_ J | K holds for every compatible drift.

    ``bg`` may pass a precomputed trek graph of ``g``.
    """
    I, J, K = _check_query(g.n, I, J, K)
    if bg is None:
        bg = trek_graph(g)
    path = connecting_path(bg, I, J, K)
    return CIStatement(I, J, K, path is None, path)


def _check_cap(n: int, max_n: int) -> None:
    if n > max_n:
        raise EnumerationCapError(
            f"n={n} exceeds the enumeration cap {max_n}; raise it explicitly")


def enumerate_elementary_ci(g: Union[DirectedGraph, BidirectedGraph],
                            max_n: int = DEFAULT_MAX_N) -> List[CIStatement]:
    """Every ``(i, j | K)`` with ``i < j``, in lexicographic order of (i, j, K).

    ``g`` is either a directed graph or an already built trek graph.
    """
    _check_cap(g.n, max_n)
    bg = g if isinstance(g, BidirectedGraph) else trek_graph(g)
    out = []
    for i in bg.vertices:
        for j in range(i + 1, bg.n + 1):
            others = [v for v in bg.vertices if v not in (i, j)]
            Ks = [c for size in range(len(others) + 1)
                  for c in combinations(others, size)]
            for K in sorted(Ks):
                K = frozenset(K)
                path = connecting_path(bg, {i}, {j}, K)
                out.append(CIStatement(frozenset({i}), frozenset({j}), K,
                                       path is None, path))
    return out


def is_connected_set(bg: BidirectedGraph, A) -> bool:
    A = set(A)
    if not A:
        return False
    start = min(A)
    seen = {start}
    queue = deque([start])
    while queue:
        v = queue.popleft()
        for w in bg.neighbors(v):
            if w in A and w not in seen:
                seen.add(w)
                queue.append(w)
    return seen == A


def spouse_closure(bg: BidirectedGraph, A) -> FrozenSet[int]:
    """A together with all its neighbours in ``bg``."""
    out = set(A)
    for v in A:
        out.update(bg.neighbors(v))
    return frozenset(out)


def connected_set_statements(bg: BidirectedGraph, max_n: int = DEFAULT_MAX_N
                             ) -> List[Tuple[FrozenSet[int], FrozenSet[int]]]:
    """Pairs (A, V \\ Sp(A)) for all nonempty connected A with a nonempty rest."""
    _check_cap(bg.n, max_n)
    V = frozenset(bg.vertices)
    subsets = [c for size in range(1, bg.n + 1)
               for c in combinations(sorted(V), size)]
    out = []
    for A in sorted(subsets):
        if not is_connected_set(bg, A):
            continue
        rest = V - spouse_closure(bg, A)
        if rest:
            out.append((frozenset(A), rest))
    return out
