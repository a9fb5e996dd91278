"""Exhaustive checks of the degree formulas for minors of single-trek models.

Every check works on treks numbered from the left leaf (vertex 1) over the
top node (``l + 1``) to the right leaf (``l + r + 1``), with unit weights and
the reduced normalization, and returns a :class:`CheckReport`.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations
from typing import Iterator, List, Tuple

from .graph_core import path_graph, trek_shape
from .trek_poly import (
    Normalization, TrekRuleConfig, expected_trek_low_term, high_term,
    high_term_matrix, low_term, minor, pascal_high_matrix, principal_minor,
    rational_det, trek_rule_sigma,
)


@dataclass
class CheckReport:
    name: str
    checked: int = 0
    failures: List[str] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return self.checked > 0 and not self.failures

    def record(self, good: bool, what: str) -> None:
        self.checked += 1
        if not good:
            self.failures.append(what)

    def __str__(self):
        status = "PASS" if self.ok else "FAIL"
        return f"{status} {self.name}: {self.checked} cases, {len(self.failures)} failures"


def shapes(max_total: int, min_side: int = 0) -> Iterator[Tuple[int, int]]:
    for total in range(max_total + 1):
        for l in range(min_side, total - min_side + 1):
            yield l, total - l


def reduced_sigma(g):
    return trek_rule_sigma(TrekRuleConfig(g, normalization=Normalization.REDUCED))


def subsets(items):
    items = list(items)
    for size in range(len(items) + 1):
        yield from combinations(items, size)


def check_principal_minors(max_total: int = 6) -> CheckReport:
    """Every principal minor has lowest term 1."""
    rep = CheckReport("principal minors have lowest term 1")
    for l, r in shapes(max_total):
        g, _ = trek_shape(l, r)
        S = reduced_sigma(g)
        for K in subsets(g.vertices):
            if K:
                p = principal_minor(S, K)
                rep.record(bool(p) and low_term(p) == (0, 1), f"({l},{r}) K={K}")
    return rep


def check_distance_bound(max_total: int = 6) -> CheckReport:
    """Minors have low degree at least the trek distance; adjacent pairs give zeta."""
    rep = CheckReport("minor low degree >= trek distance, adjacent -> zeta")
    for l, r in shapes(max_total):
        g, _ = trek_shape(l, r)
        S = reduced_sigma(g)
        for i, j in combinations(g.vertices, 2):
            dist = j - i
            rest = [v for v in g.vertices if v not in (i, j)]
            for K in subsets(rest):
                p = minor(S, i, j, K)
                if dist == 1:
                    good = bool(p) and low_term(p) == (1, 1)
                else:
                    good = not p or p.low_degree() >= dist
                rep.record(good, f"({l},{r}) i={i} j={j} K={K}")
    return rep


def check_same_branch_jump(max_total: int = 6) -> CheckReport:
    """Non-adjacent pairs on one branch, K covering the path between them:
    the low degree exceeds the path length."""
    rep = CheckReport("same-branch minors jump above the path length")
    for l, r in shapes(max_total):
        g, _ = trek_shape(l, r)
        t = l + 1
        S = reduced_sigma(g)
        for i, j in combinations(g.vertices, 2):
            same_branch = j <= t or i >= t
            if j - i < 2 or not same_branch:
                continue
            interior = set(range(i + 1, j))
            extra = [v for v in g.vertices if v < i or v > j]
            for E in subsets(extra):
                K = interior | set(E)
                p = minor(S, i, j, K)
                rep.record(not p or p.low_degree() > j - i,
                           f"({l},{r}) i={i} j={j} K={sorted(K)}")
    return rep


def check_trek_low_terms(max_side: int = 4) -> CheckReport:
    """Endpoint minors of an (l, r)-trek given all interior nodes."""
    rep = CheckReport("trek endpoint minors match the closed-form lowest term")
    for l in range(1, max_side + 1):
        for r in range(1, max_side + 1):
            g, _ = trek_shape(l, r)
            n = g.n
            p = minor(reduced_sigma(g), 1, n, range(2, n))
            want = expected_trek_low_term(l, r)
            rep.record(bool(p) and low_term(p) == want,
                       f"({l},{r}): got {low_term(p) if p else 0}, want {want}")
    return rep


def check_subtrek_low_terms(max_side: int = 4) -> CheckReport:
    """Pairs on opposite branches, K covering the path between them plus any
    nodes outside it: the lowest term depends only on the sub-trek shape."""
    rep = CheckReport("sub-trek minors match the closed-form lowest term")
    for l in range(1, max_side + 1):
        for r in range(1, max_side + 1):
            g, _ = trek_shape(l, r)
            t = l + 1
            S = reduced_sigma(g)
            for i in range(1, t):
                for j in range(t + 1, g.n + 1):
                    want = expected_trek_low_term(t - i, j - t)
                    extra = [v for v in g.vertices if v < i or v > j]
                    for E in subsets(extra):
                        K = set(range(i + 1, j)) | set(E)
                        p = minor(S, i, j, K)
                        rep.record(bool(p) and low_term(p) == want,
                                   f"({l},{r}) i={i} j={j} K={sorted(K)}")
    return rep


def check_path_high_terms(min_n: int = 3, max_n: int = 8) -> CheckReport:
    """Directed paths ``1 -> ... -> n``: the endpoint minor given the interior
    has leading coefficient 1, the determinant of the Pascal matrix."""
    rep = CheckReport("path endpoint minors have leading coefficient 1")
    for n in range(min_n, max_n + 1):
        S = reduced_sigma(path_graph(n))
        rows, cols = list(range(1, n)), list(range(2, n + 1))
        p = minor(S, 1, n, range(2, n))
        lead = high_term(p)[1] if p else Fraction(0)
        pascal = rational_det(pascal_high_matrix(n))
        entries = rational_det(high_term_matrix(S, rows, cols))
        rep.record(lead == pascal == entries == 1,
                   f"n={n}: lead={lead} pascal={pascal} entries={entries}")
    return rep


def run_all(max_total: int = 6, max_side: int = 4, max_path: int = 8) -> List[CheckReport]:
    return [
        check_principal_minors(max_total),
        check_distance_bound(max_total),
        check_same_branch_jump(max_total),
        check_trek_low_terms(max_side),
        check_subtrek_low_terms(max_side),
        check_path_high_terms(3, max_path),
    ]
