"""Explicit Ornstein-Uhlenbeck witnesses for conditional dependence.

The pipeline follows the constructive proof of trek separation being
complete: take a connecting path in the trek graph, realize its edges by
treks, resolve trek intersections until the union is a zig-zag, put unit
weights on it, make nodes outside the conditioning set near-copies of their
parents (large ``m``), solve the Lyapunov equation and embed the result.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, FrozenSet, Iterable, Iterator, List, Optional, Sequence, Tuple

import numpy as np

from .formats import FormatError, graph_from_json, graph_to_json, matrix_from_json, matrix_to_json
from .graph_core import DirectedGraph, Edge, Trek, shortest_trek
from .lyapunov_numeric import (
    CIVerdict, gaussian_ci_test, gaussian_minor, is_positive_definite,
    is_stable, lyapunov_residual, residual_bound, respects_graph,
    solve_lyapunov,
)
from .markov import ci_implied

M_SCHEDULE = (1e2, 1e3, 1e4)
MARGIN_REL = 1e-6


class WitnessPreconditionError(ValueError):
    """No witness can exist: the statement is implied by separation."""


class SweepExhaustedError(RuntimeError):
    """Every (zeta, m) in the schedule gave a minor below the margin."""


class ConstructionError(RuntimeError):
    """Internal invariant of the construction violated."""


def zeta_schedule(limit: int = 8) -> Iterator[Fraction]:
    """1, 1/2, 2, 1/3, 3, ... up to ``limit``."""
    yield Fraction(1)
    for k in range(2, limit + 1):
        yield Fraction(1, k)
        yield Fraction(k)


# --------------------------------------------------------------------------
# zig-zag extraction


@dataclass(frozen=True)
class ZigZag:
    """Treks ``T_1..T_p`` glued at join nodes, with a tail per join.

    ``treks[a]`` runs from ``joins[a-1]`` (or ``i``) to ``joins[a]`` (or
    ``j``).  ``tails[a]`` is the directed path from ``joins[a]`` down to a
    node of the conditioning set.
    """

    treks: Tuple[Trek, ...]
    joins: Tuple[int, ...] = ()
    tails: Tuple[Tuple[int, ...], ...] = ()

    @property
    def endpoints(self) -> Tuple[int, int]:
        return self.treks[0].source, self.treks[-1].sink

    def vertices(self) -> FrozenSet[int]:
        out = set()
        for t in self.treks:
            out |= t.vertices()
        for tail in self.tails:
            out |= set(tail)
        return frozenset(out)

    def edges(self) -> FrozenSet[Edge]:
        out = set()
        for t in self.treks:
            out.update(t.edges())
        for tail in self.tails:
            out.update(zip(tail, tail[1:]))
        return frozenset(out)

    def graph(self, n: int) -> DirectedGraph:
        return DirectedGraph(n, self.edges())

    def is_valid_in(self, g: DirectedGraph, K: Iterable[int] = ()) -> bool:
        """Structural check: edges in ``g``, joins and tails consistent,
        and the union is a tree (hence acyclic)."""
        K = set(K)
        if len(self.joins) != len(self.treks) - 1 or len(self.tails) != len(self.joins):
            return False
        if not all(g.has_edge(a, b) for a, b in self.edges()):
            return False
        for a, k in enumerate(self.joins):
            t1, t2 = self.treks[a], self.treks[a + 1]
            if t1.sink != k or t2.source != k or t1.lengths[1] == 0 or t2.lengths[0] == 0:
                return False
            tail = self.tails[a]
            if tail[0] != k or tail[-1] not in K:
                return False
        V, E = self.vertices(), self.edges()
        return len(E) == len(V) - 1 and _connected(V, E)

    def to_json(self) -> dict:
        return {
            "treks": [{"left": list(t.left), "right": list(t.right)} for t in self.treks],
            "joins": list(self.joins),
            "tails": [list(t) for t in self.tails],
        }

    @classmethod
    def from_json(cls, obj) -> "ZigZag":
        return cls(tuple(Trek(t["left"], t["right"]) for t in obj["treks"]),
                   tuple(obj["joins"]), tuple(tuple(t) for t in obj["tails"]))


def _connected(V, E) -> bool:
    V = set(V)
    if not V:
        return True
    nb = {v: set() for v in V}
    for a, b in E:
        nb[a].add(b)
        nb[b].add(a)
    start = min(V)
    seen, stack = {start}, [start]
    while stack:
        for w in nb[stack.pop()]:
            if w not in seen:
                seen.add(w)
                stack.append(w)
    return seen == V


def _suffix(path: Sequence[int], x: int) -> Tuple[int, ...]:
    return tuple(path[path.index(x):])


def _glued(t1: Trek, t2: Trek) -> Optional[int]:
    """The collider if consecutive treks overlap exactly in a shared tail.

    The overlap must be a common suffix ``x..k`` of the right side of ``t1``
    and the left side of ``t2`` with ``x`` not a top node.
    """
    shared = t1.vertices() & t2.vertices()
    R, L = t1.right, t2.left
    xs = [v for v in R[1:] if v in shared]
    if not xs:
        return None
    x = xs[0]
    if x not in L[1:]:
        return None
    tail = _suffix(R, x)
    if tail != _suffix(L, x) or set(tail) != shared:
        return None
    return x


def _sides(t: Trek):
    return set(t.left), set(t.right)


def _resolve_once(path: List[int], treks: List[Trek], g: DirectedGraph) -> bool:
    """Apply the first applicable resolution; False when none is needed."""
    s = len(treks)
    for p in range(s):
        Lp, Rp = _sides(treks[p])
        for q in range(p + 1, s):
            if q == p + 1 and _glued(treks[p], treks[q]) is not None:
                continue
            Lq, Rq = _sides(treks[q])
            if not (treks[p].vertices() & treks[q].vertices()):
                continue
            # left-left, left-right, right-right: a trek joins v_p and v_{q+1}
            if Lp & Lq or Lp & Rq or Rp & Rq:
                _shortcut(path, treks, g, p, q + 1)
                return True
            # right-left
            if q > p + 1:
                _shortcut(path, treks, g, p, q)
                return True
            L = treks[q].left
            x = next(v for v in L if v in Rp)
            left = L[:L.index(x)] + _suffix(treks[p].right, x)
            treks[q] = Trek(left, treks[q].right)
            return True
    return False


def _shortcut(path, treks, g, a: int, b: int) -> None:
    """Replace ``path[a..b]`` by the single trek-graph edge ``path[a] - path[b]``."""
    t = shortest_trek(g, path[a], path[b])
    if t is None:
        raise ConstructionError("shortcut endpoints have no trek")
    path[a + 1:b] = []
    treks[a:b] = [t]


def extract_zigzag(g: DirectedGraph, i: int, j: int, K: Iterable[int],
                   max_rounds: int = 10_000) -> ZigZag:
    K = frozenset(K)
    stmt = ci_implied(g, {i}, {j}, K)
    if stmt.implied:
        raise WitnessPreconditionError(
            f"{i} and {j} are separated given {sorted(K)}; no witness exists")
    path = list(stmt.evidence)
    treks = [shortest_trek(g, a, b) for a, b in zip(path, path[1:])]
    for _ in range(max_rounds):
        if not _resolve_once(path, treks, g):
            break
    else:
        raise ConstructionError("trek intersection resolution did not terminate")
    joins, tails = [], []
    for a in range(len(treks) - 1):
        x = _glued(treks[a], treks[a + 1])
        joins.append(x)
        tails.append(_suffix(treks[a].right, x))
    out = []
    for a, t in enumerate(treks):
        left = t.left if a == 0 else t.left[:t.left.index(joins[a - 1]) + 1]
        right = t.right if a == len(treks) - 1 else t.right[:t.right.index(joins[a]) + 1]
        out.append(Trek(left, right))
    z = ZigZag(tuple(out), tuple(joins), tuple(tails))
    if not z.is_valid_in(g, K):
        raise ConstructionError(f"extracted structure is not a zig-zag: {z}")
    return z


# --------------------------------------------------------------------------
# drift matrices on a local vertex order


def _local(vertices: Iterable[int]) -> Tuple[List[int], Dict[int, int]]:
    order = sorted(vertices)
    return order, {v: k for k, v in enumerate(order)}


def _check_zeta(zeta) -> Fraction:
    zeta = Fraction(zeta)
    if zeta <= 0:
        raise ValueError("zeta must be positive")
    return zeta


def build_trek_drift(trek: Trek, zeta=1, weights: Optional[Dict[Edge, float]] = None
                     ) -> np.ndarray:
    """Drift on the trek's vertices (ascending order): diagonal
    ``-1/(2 zeta)`` and ``M[b, a] = weight`` on each trek edge ``a -> b``."""
    zeta = _check_zeta(zeta)
    weights = weights or {}
    order, idx = _local(trek.vertices())
    M = np.eye(len(order)) * (-1 / (2 * float(zeta)))
    for a, b in trek.edges():
        M[idx[b], idx[a]] = float(weights.get((a, b), 1.0))
    return M


def _parent_on(trek: Trek, k: int) -> int:
    for side in (trek.left, trek.right):
        if k in side[1:]:
            return side[side.index(k) - 1]
    raise ValueError(f"{k} is not a non-top node of {trek}")


def trek_minus(trek: Trek, k: int) -> Trek:
    """The shorter trek with node ``k`` removed and its neighbours joined."""
    i, j, t = trek.source, trek.sink, trek.top
    if k in (i, j) or k not in trek.vertices():
        raise ValueError("k must be an interior node of the trek")
    if k != t:
        left = tuple(v for v in trek.left if v != k)
        right = tuple(v for v in trek.right if v != k)
        return Trek(left, right)
    cl, cr = trek.left[1], trek.right[1]
    if len(trek.right) == 2:
        # c_l becomes the top with c_l -> c_r
        return Trek(trek.left[1:], (cl, cr))
    # c_r becomes the top with c_l <- c_r
    return Trek((cr,) + trek.left[1:], trek.right[1:])


def perfect_correlation_drift(trek: Trek, k: int, m: float, zeta=1) -> np.ndarray:
    """Trek drift whose row ``k`` is ``m * (e_pa(k) - e_k)``.

    As ``m`` grows, ``X_k`` tracks its parent and the covariance of the other
    nodes approaches the one of :func:`trek_minus` (``trek``, ``k``).
    """
    if len(trek.vertices()) < 4:
        raise ValueError("perfect correlation needs a trek with at least 4 nodes")
    if k in (trek.source, trek.sink, trek.top) or k not in trek.vertices():
        raise ValueError("k must be an interior node other than the top")
    if m <= 0:
        raise ValueError("m must be positive")
    M = build_trek_drift(trek, zeta)
    order, idx = _local(trek.vertices())
    M[idx[k], :] = 0.0
    M[idx[k], idx[k]] = -m
    M[idx[k], idx[_parent_on(trek, k)]] = m
    return M


# --------------------------------------------------------------------------
# zig-zag witness


@dataclass
class ZigZagDrift:
    """Drift on the zig-zag vertices plus bookkeeping of the construction."""

    vertices: List[int]
    M: np.ndarray
    copies: Dict[int, int] = field(default_factory=dict)
    isolated: List[int] = field(default_factory=list)


def _first_in(seq: Iterable[int], K) -> Optional[int]:
    return next((v for v in seq if v in K), None)


def zigzag_drift(z: ZigZag, K: Iterable[int], zeta=1, m: float = 1e3) -> ZigZagDrift:
    """Assemble the drift used to certify dependence on a zig-zag.

    * unit weights on the edges, diagonal ``-1/(2 zeta)``;
    * interior non-top trek nodes outside K copy their parent;
    * on each tail, the first node ``l`` in K ends the tail (later nodes are
      cut loose) and, when the join is outside K, every tail node up to ``l``
      copies its parent so that ``l`` stands in for the join;
    * a top node outside K is stood in for by the nearest K node below it
      (on the right unless the right side reduces to a single edge).
    """
    zeta = _check_zeta(zeta)
    K = set(K)
    i, j = z.endpoints
    fixed = K | {i, j}
    V = z.vertices()
    edges = set()
    for t in z.treks:
        edges.update(t.edges())
    copies: Dict[int, int] = {}
    isolated: List[int] = []

    for t in z.treks:
        for side in (t.left, t.right):
            for a in range(1, len(side) - 1):
                if side[a] not in fixed:
                    copies[side[a]] = side[a - 1]
        top = t.top
        l_len, r_len = t.lengths
        if top in fixed or l_len == 0 or r_len == 0:
            continue
        inner_left = [v for v in t.left[1:-1] if v in K]
        inner_right = [v for v in t.right[1:-1] if v in K]
        if not inner_left and not inner_right:
            continue
        side = t.left if not inner_right else t.right
        k = _first_in(side[1:-1], K)
        copies[k] = side[side.index(k) - 1]

    for join, tail in zip(z.joins, z.tails):
        h = next(a for a, v in enumerate(tail) if v in K)
        edges.update(zip(tail[:h + 1], tail[1:h + 1]))
        isolated.extend(tail[h + 1:])
        if join not in K:
            for a in range(1, h + 1):
                copies[tail[a]] = tail[a - 1]

    order, idx = _local(V)
    M = np.eye(len(order)) * (-1 / (2 * float(zeta)))
    for a, b in edges:
        M[idx[b], idx[a]] = 1.0
    for k, pa in copies.items():
        M[idx[k], :] = 0.0
        M[idx[k], idx[k]] = -m
        M[idx[k], idx[pa]] = m
    return ZigZagDrift(order, M, copies, sorted(isolated))


def zigzag_witness(z: ZigZag, i: int, j: int, K: Iterable[int], zeta=1,
                   m: float = 1e3):
    """``(M, Sigma, minor_value, vertices)`` on the zig-zag's vertices.

    The minor is ``|Sigma_{iK', jK'}|`` with ``K' = K`` restricted to the
    zig-zag, rows and columns in ascending vertex order.
    """
    if (i, j) != z.endpoints:
        raise ValueError("i and j must be the zig-zag endpoints")
    K = set(K)
    d = zigzag_drift(z, K, zeta, m)
    if not is_stable(d.M):
        raise ConstructionError("assembled zig-zag drift is not stable")
    S = solve_lyapunov(d.M, 2 * np.eye(len(d.vertices)))
    idx = {v: a + 1 for a, v in enumerate(d.vertices)}
    Kl = [idx[v] for v in K if v in idx]
    value, _ = gaussian_minor(S, idx[i], idx[j], Kl)
    return d.M, S, value, d.vertices


def _det(S, idx, rows, cols) -> float:
    if not rows:
        return 1.0
    r = [idx[v] for v in sorted(rows)]
    c = [idx[v] for v in sorted(cols)]
    return float(np.linalg.det(S[np.ix_(r, c)]))


def zigzag_minor_factors(z: ZigZag, K: Iterable[int], S, vertices: Sequence[int]):
    """Split the zig-zag minor at the first join.

    With ``l`` the first K node on the first tail, ``T`` the K nodes inside
    the first trek, ``L`` the K nodes cut off behind ``l`` and ``K'`` the
    rest, the specialized covariance is block triangular and
    ``|minor| = |Sigma_{lK', jK'}| * |Sigma_{iT, lT}| * |Sigma_L|`` in
    absolute value.  Returns the three determinants.
    """
    if not z.joins:
        raise ValueError("a single trek has no factorization")
    K = set(K)
    i, j = z.endpoints
    idx = {v: a for a, v in enumerate(vertices)}
    first, tail = z.treks[0], z.tails[0]
    h = next(a for a, v in enumerate(tail) if v in K)
    l = tail[h]
    T = K & (first.vertices() - {i, first.sink})
    L = K & set(tail[h + 1:])
    Kp = (K & set(vertices)) - T - L - {l}
    return (_det(S, idx, Kp | {l}, Kp | {j}),
            _det(S, idx, T | {i}, T | {l}),
            _det(S, idx, L, L))


def embed_subgraph_witness(n: int, sub_vertices: Sequence[int], M_sub, S_sub):
    """Extend a pair on ``sub_vertices`` to all ``n`` vertices.

    The other vertices get drift ``-1`` and covariance ``1``, independent of
    everything, which solves the Lyapunov equation for ``C = 2I`` exactly.
    """
    sub = list(sub_vertices)
    M_sub, S_sub = np.asarray(M_sub, float), np.asarray(S_sub, float)
    if M_sub.shape != (len(sub), len(sub)) or S_sub.shape != M_sub.shape:
        raise ValueError("dimension mismatch between vertex list and matrices")
    if len(set(sub)) != len(sub) or not all(1 <= v <= n for v in sub):
        raise ValueError("sub_vertices must be distinct vertices in 1..n")
    M, S = -np.eye(n), np.eye(n)
    pos = [v - 1 for v in sub]
    M[np.ix_(pos, pos)] = M_sub
    S[np.ix_(pos, pos)] = S_sub
    return M, S


# --------------------------------------------------------------------------
# search and verification


@dataclass
class Witness:
    graph: DirectedGraph
    i: int
    j: int
    K: FrozenSet[int]
    M: np.ndarray
    Sigma: np.ndarray
    minor_value: float
    margin: float
    zeta: Fraction
    m_approx: int
    zigzag: ZigZag

    def to_json(self) -> dict:
        return {
            "graph": graph_to_json(self.graph),
            "i": self.i,
            "j": self.j,
            "K": sorted(self.K),
            "M": matrix_to_json(self.M),
            "Sigma": matrix_to_json(self.Sigma),
            "zeta": str(self.zeta),
            "m_approx": self.m_approx,
            "minor_value": self.minor_value,
            "margin": self.margin,
            "zigzag": self.zigzag.to_json(),
        }

    @classmethod
    def from_json(cls, obj) -> "Witness":
        try:
            return cls(graph_from_json(obj["graph"]), int(obj["i"]), int(obj["j"]),
                       frozenset(int(k) for k in obj["K"]),
                       matrix_from_json(obj["M"]), matrix_from_json(obj["Sigma"]),
                       float(obj["minor_value"]), float(obj["margin"]),
                       Fraction(obj["zeta"]), int(obj["m_approx"]),
                       ZigZag.from_json(obj["zigzag"]))
        except FormatError:
            raise
        except (KeyError, TypeError, ValueError, ZeroDivisionError) as exc:
            raise FormatError(f"malformed witness bundle: {exc!r}") from exc


def find_witness(g: DirectedGraph, i: int, j: int, K: Iterable[int] = (),
                 m_schedule: Sequence[float] = M_SCHEDULE, zeta_limit: int = 8,
                 margin_rel: float = MARGIN_REL) -> Witness:
    K = frozenset(K)
    z = extract_zigzag(g, i, j, K)
    needs_m = bool(zigzag_drift(z, K).copies)
    tried = []
    for m in (m_schedule if needs_m else m_schedule[:1]):
        for zeta in zeta_schedule(zeta_limit):
            M_sub, S_sub, value, verts = zigzag_witness(z, i, j, K, zeta, m)
            M, S = embed_subgraph_witness(g.n, verts, M_sub, S_sub)
            d, scale = gaussian_minor(S, i, j, sorted(K))
            margin = margin_rel * scale
            tried.append((m, zeta, d, margin))
            if abs(d) > margin:
                w = Witness(g, i, j, K, M, S, d, margin, zeta, int(m) if needs_m else 0, z)
                failures = verify_witness(w)
                if not failures:
                    return w
                tried[-1] += (failures,)
    raise SweepExhaustedError(
        f"no (zeta, m) gave a minor above the margin for ({i},{j}|{sorted(K)}); "
        f"tried {len(tried)} settings, last {tried[-1]}")


def verify_witness(w: Witness, tol: float = 1e-7) -> List[str]:
    """Independent re-check of every witness invariant; empty when sound."""
    failures = []
    M, S, n = w.M, w.Sigma, w.graph.n
    if M.shape != (n, n) or S.shape != (n, n):
        return [f"matrix shapes {M.shape}, {S.shape} do not match n={n}"]
    if not (np.all(np.isfinite(M)) and np.all(np.isfinite(S))):
        return ["non-finite matrix entries"]
    if not respects_graph(M, w.graph):
        failures.append("support: M has an entry off the graph's edges")
    if not is_stable(M):
        failures.append("stability: M is not stable")
    C = 2 * np.eye(n)
    res = lyapunov_residual(M, S, C)
    if res > residual_bound(M, S, C):
        failures.append(f"residual: {res:.3g} exceeds {residual_bound(M, S, C):.3g}")
    try:
        pd = is_positive_definite(S)
    except ValueError:
        pd = False
    if not pd:
        failures.append("positive definiteness: Sigma fails Cholesky")
    d, scale = gaussian_minor(S, w.i, w.j, sorted(w.K))
    if not abs(w.minor_value) > w.margin:
        failures.append(f"margin: |minor_value| {abs(w.minor_value):.3g} <= {w.margin:.3g}")
    if abs(d - w.minor_value) > 1e-8 * max(abs(d), scale * 1e-12):
        failures.append(f"minor: recomputed {d:.6g} differs from stored {w.minor_value:.6g}")
    verdict = gaussian_ci_test(S, w.i, w.j, sorted(w.K), tol)
    if verdict is not CIVerdict.DEPENDENT:
        failures.append(f"ci test: verdict {verdict.value}, expected dependent")
    return failures
