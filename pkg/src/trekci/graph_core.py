"""Directed graphs, ancestor sets, treks and the trek graph.

Vertices are the integers ``1..n``.  Self-loops ``i -> i`` are implicitly
present on every vertex and are never stored.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from functools import cached_property
from typing import FrozenSet, Iterable, Iterator, Optional, Tuple

Edge = Tuple[int, int]


class VertexError(ValueError):
    """A vertex index outside ``1..n``."""


class CyclicGraphError(ValueError):
    """An operation that needs a DAG received a graph with a directed cycle."""


def _check_vertex(n: int, v: int) -> None:
    if not (isinstance(v, int) and 1 <= v <= n):
        raise VertexError(f"vertex {v!r} outside 1..{n}")


@dataclass(frozen=True)
class DirectedGraph:
    n: int
    edges: FrozenSet[Edge] = field(default_factory=frozenset)

    def __post_init__(self):
        if self.n < 0:
            raise ValueError("vertex count must be nonnegative")
        edges = frozenset((int(a), int(b)) for a, b in self.edges)
        for a, b in edges:
            _check_vertex(self.n, a)
            _check_vertex(self.n, b)
            if a == b:
                raise ValueError(f"self-loop {a}->{a} must not be stored")
        object.__setattr__(self, "edges", edges)

    @classmethod
    def from_edges(cls, n: int, edges: Iterable[Edge]) -> "DirectedGraph":
        """Build a graph, silently dropping self-loops."""
        return cls(n, frozenset((a, b) for a, b in edges if a != b))

    @property
    def vertices(self) -> range:
        return range(1, self.n + 1)

    @cached_property
    def _parents(self):
        pa = {v: set() for v in self.vertices}
        for a, b in self.edges:
            pa[b].add(a)
        return {v: tuple(sorted(s)) for v, s in pa.items()}

    @cached_property
    def _children(self):
        ch = {v: set() for v in self.vertices}
        for a, b in self.edges:
            ch[a].add(b)
        return {v: tuple(sorted(s)) for v, s in ch.items()}

    def parents(self, v: int) -> Tuple[int, ...]:
        """Proper parents of ``v`` in ascending order (self-loop excluded)."""
        _check_vertex(self.n, v)
        return self._parents[v]

    def children(self, v: int) -> Tuple[int, ...]:
        _check_vertex(self.n, v)
        return self._children[v]

    def has_edge(self, a: int, b: int) -> bool:
        return (a, b) in self.edges

    def add_edges(self, extra: Iterable[Edge]) -> "DirectedGraph":
        return DirectedGraph.from_edges(self.n, set(self.edges) | set(extra))

    def __repr__(self):
        es = ", ".join(f"{a}->{b}" for a, b in sorted(self.edges))
        return f"DirectedGraph(n={self.n}, [{es}])"


@dataclass(frozen=True)
class Trek:
    """Two directed paths sharing their first vertex, the top node.

    ``left`` runs from the top down to the source endpoint, ``right`` from
    the top down to the sink endpoint.
    """

    left: Tuple[int, ...]
    right: Tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "left", tuple(self.left))
        object.__setattr__(self, "right", tuple(self.right))
        if not self.left or not self.right or self.left[0] != self.right[0]:
            raise ValueError("both sides of a trek must start at the top node")

    @property
    def top(self) -> int:
        return self.left[0]

    @property
    def source(self) -> int:
        return self.left[-1]

    @property
    def sink(self) -> int:
        return self.right[-1]

    @property
    def lengths(self) -> Tuple[int, int]:
        return len(self.left) - 1, len(self.right) - 1

    def edges(self) -> list:
        """Edges of both sides, with multiplicity (left side first)."""
        out = list(zip(self.left, self.left[1:]))
        out += list(zip(self.right, self.right[1:]))
        return out

    def vertices(self) -> FrozenSet[int]:
        return frozenset(self.left) | frozenset(self.right)

    def sequence(self) -> Tuple[int, ...]:
        """Vertices read from the source endpoint over the top to the sink."""
        return tuple(reversed(self.left)) + self.right[1:]

    def reversed(self) -> "Trek":
        return Trek(self.right, self.left)

    def is_valid_in(self, g: DirectedGraph) -> bool:
        return all(g.has_edge(a, b) for a, b in self.edges())

    def __repr__(self):
        up = "<-".join(str(v) for v in reversed(self.left))
        down = "->".join(str(v) for v in self.right)
        return f"Trek({up} | {down})"


@dataclass(frozen=True)
class BidirectedGraph:
    n: int
    adj: FrozenSet[FrozenSet[int]] = field(default_factory=frozenset)

    def __post_init__(self):
        adj = frozenset(frozenset(e) for e in self.adj)
        for e in adj:
            if len(e) != 2:
                raise ValueError("bidirected edges join two distinct vertices")
            for v in e:
                _check_vertex(self.n, v)
        object.__setattr__(self, "adj", adj)

    @classmethod
    def from_pairs(cls, n: int, pairs: Iterable[Edge]) -> "BidirectedGraph":
        return cls(n, frozenset(frozenset(p) for p in pairs if p[0] != p[1]))

    @property
    def vertices(self) -> range:
        return range(1, self.n + 1)

    def has_edge(self, a: int, b: int) -> bool:
        return a != b and frozenset((a, b)) in self.adj

    @cached_property
    def _nbrs(self):
        nb = {v: set() for v in self.vertices}
        for e in self.adj:
            a, b = tuple(e)
            nb[a].add(b)
            nb[b].add(a)
        return {v: tuple(sorted(s)) for v, s in nb.items()}

    def neighbors(self, v: int) -> Tuple[int, ...]:
        _check_vertex(self.n, v)
        return self._nbrs[v]

    def pairs(self) -> list:
        """Edges as sorted ``(a, b)`` with ``a < b``, in lexicographic order."""
        return sorted(tuple(sorted(e)) for e in self.adj)

    def __repr__(self):
        es = ", ".join(f"{a}<->{b}" for a, b in self.pairs())
        return f"BidirectedGraph(n={self.n}, [{es}])"


# --------------------------------------------------------------------------
# reachability


def _reach(start: Iterable[int], step) -> set:
    seen = set(start)
    queue = deque(seen)
    while queue:
        v = queue.popleft()
        for w in step(v):
            if w not in seen:
                seen.add(w)
                queue.append(w)
    return seen


def ancestors(g: DirectedGraph, i: int) -> FrozenSet[int]:
    """All ``j`` with a directed path ``j ~> i``; always contains ``i``."""
    _check_vertex(g.n, i)
    return frozenset(_reach([i], g.parents))


def ancestors_of_set(g: DirectedGraph, I: Iterable[int]) -> FrozenSet[int]:
    I = list(I)
    for i in I:
        _check_vertex(g.n, i)
    return frozenset(_reach(I, g.parents))


def descendants(g: DirectedGraph, i: int) -> FrozenSet[int]:
    _check_vertex(g.n, i)
    return frozenset(_reach([i], g.children))


def _distances_to(g: DirectedGraph, target: int) -> dict:
    """``{x: length of a shortest directed path x ~> target}``."""
    dist = {target: 0}
    queue = deque([target])
    while queue:
        v = queue.popleft()
        for p in g.parents(v):
            if p not in dist:
                dist[p] = dist[v] + 1
                queue.append(p)
    return dist


def trek_graph(g: DirectedGraph) -> BidirectedGraph:
    """Join ``i`` and ``j`` whenever their ancestor sets intersect."""
    an = {v: ancestors(g, v) for v in g.vertices}
    pairs = [
        (a, b)
        for a in g.vertices
        for b in range(a + 1, g.n + 1)
        if an[a] & an[b]
    ]
    return BidirectedGraph.from_pairs(g.n, pairs)


def shortest_trek(g: DirectedGraph, i: int, j: int) -> Optional[Trek]:
    """A trek from ``i`` to ``j`` minimizing ``l + r``, or ``None``.

    Among the shortest treks the one whose vertex sequence (from ``i`` over
    the top to ``j``) is lexicographically smallest is returned, and among
    equal sequences (possible on cycles) the one with the shortest left side.
    The walk below emits that sequence greedily, only taking steps after
    which a shortest completion still exists.
    """
    _check_vertex(g.n, i)
    _check_vertex(g.n, j)
    if i == j:
        raise ValueError("shortest_trek needs distinct endpoints")
    to_j = _distances_to(g, j)
    # climb[x]: cheapest completion from x while still allowed to go up
    climb = {}
    for x in ancestors(g, i):
        up = _distances_to(g, x)
        best = min((up[t] + to_j[t] for t in up if t in to_j), default=None)
        if best is not None:
            climb[x] = best
    if i not in climb:
        return None
    # Greedy over the set of walk states sharing the emitted prefix.  A state
    # is (vertex, still climbing?) and remembers the smallest left length.
    remaining = climb[i]
    seq = [i]
    states = {(i, True): 0}
    while remaining > 0:
        step = {}
        for (x, rising), l in states.items():
            moves = []
            if rising:
                moves += [(p, True, l + 1) for p in g.parents(x)
                          if climb.get(p) == remaining - 1]
            moves += [(c, False, l) for c in g.children(x)
                      if to_j.get(c) == remaining - 1]
            for v, up, ll in moves:
                key = (v, up)
                step[key] = min(step.get(key, ll), ll)
        x = min(v for v, _ in step)
        states = {k: l for k, l in step.items() if k[0] == x}
        seq.append(x)
        remaining -= 1
    l = min(states.values())
    return Trek(tuple(reversed(seq[:l + 1])), tuple(seq[l:]))


def is_dag(g: DirectedGraph) -> bool:
    try:
        topological_order(g)
    except CyclicGraphError:
        return False
    return True


def topological_order(g: DirectedGraph) -> list:
    """Kahn's algorithm; ties resolved by the smallest available vertex."""
    import heapq

    indeg = {v: len(g.parents(v)) for v in g.vertices}
    heap = [v for v, d in indeg.items() if d == 0]
    heapq.heapify(heap)
    order = []
    while heap:
        v = heapq.heappop(heap)
        order.append(v)
        for c in g.children(v):
            indeg[c] -= 1
            if indeg[c] == 0:
                heapq.heappush(heap, c)
    if len(order) != g.n:
        raise CyclicGraphError("graph has a directed cycle")
    return order


def directed_paths(g: DirectedGraph, a: int, b: int) -> Iterator[Tuple[int, ...]]:
    """All simple directed paths from ``a`` to ``b`` (the trivial one if a == b)."""
    _check_vertex(g.n, a)
    _check_vertex(g.n, b)
    can_reach = ancestors(g, b)
    stack = [(a, (a,))]
    while stack:
        v, path = stack.pop()
        if v == b:
            yield path
            continue
        for c in reversed(g.children(v)):
            if c in can_reach and c not in path:
                stack.append((c, path + (c,)))


def induced_subgraph(g: DirectedGraph, keep: Iterable[int]) -> DirectedGraph:
    """Edges of ``g`` among ``keep``; vertex numbering is unchanged."""
    keep = set(keep)
    return DirectedGraph(g.n, frozenset(e for e in g.edges
                                        if e[0] in keep and e[1] in keep))


def path_graph(n: int) -> DirectedGraph:
    return DirectedGraph.from_edges(n, [(v, v + 1) for v in range(1, n)])


def trek_shape(l: int, r: int) -> Tuple[DirectedGraph, Trek]:
    """A single ``(l, r)``-trek numbered from the left leaf (1) to the
    right leaf (``l + r + 1``), the top node being ``l + 1``."""
    n = l + r + 1
    t = l + 1
    left = tuple(range(t, 0, -1))
    right = tuple(range(t, n + 1))
    trek = Trek(left, right)
    return DirectedGraph.from_edges(n, trek.edges()), trek
