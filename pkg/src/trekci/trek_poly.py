"""Exact trek-rule covariances as polynomials in zeta, and their minors."""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from math import comb, lcm
from numbers import Rational
from typing import Dict, Iterable, List, Mapping, Optional, Sequence, Tuple

import numpy as np

from .graph_core import (
    CyclicGraphError, DirectedGraph, Edge, Trek, directed_paths, is_dag,
    topological_order,
)

Term = Tuple[int, Fraction]


class PolyZ:
    """Univariate polynomial in zeta with exact rational coefficients."""

    __slots__ = ("_c",)

    def __init__(self, coeffs: Optional[Mapping[int, Rational]] = None):
        c = {}
        for d, v in (coeffs or {}).items():
            if d < 0:
                raise ValueError("negative degree")
            v = Fraction(v)
            if v:
                c[int(d)] = v
        self._c = c

    @classmethod
    def const(cls, v) -> "PolyZ":
        return cls({0: v})

    @classmethod
    def monomial(cls, deg: int, coeff=1) -> "PolyZ":
        return cls({deg: coeff})

    @property
    def coeffs(self) -> Dict[int, Fraction]:
        return dict(self._c)

    def is_zero(self) -> bool:
        return not self._c

    def __bool__(self):
        return bool(self._c)

    def degree(self) -> int:
        if not self._c:
            raise ValueError("degree of the zero polynomial")
        return max(self._c)

    def low_degree(self) -> int:
        if not self._c:
            raise ValueError("low degree of the zero polynomial")
        return min(self._c)

    def __getitem__(self, d: int) -> Fraction:
        return self._c.get(d, Fraction(0))

    @staticmethod
    def _lift(other) -> "PolyZ":
        if isinstance(other, PolyZ):
            return other
        if isinstance(other, (int, Fraction)):
            return PolyZ.const(other)
        return NotImplemented

    def __add__(self, other):
        other = self._lift(other)
        if other is NotImplemented:
            return other
        c = dict(self._c)
        for d, v in other._c.items():
            c[d] = c.get(d, 0) + v
        return PolyZ(c)

    __radd__ = __add__

    def __neg__(self):
        return PolyZ({d: -v for d, v in self._c.items()})

    def __sub__(self, other):
        other = self._lift(other)
        if other is NotImplemented:
            return other
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        other = self._lift(other)
        if other is NotImplemented:
            return other
        c = {}
        for d1, v1 in self._c.items():
            for d2, v2 in other._c.items():
                c[d1 + d2] = c.get(d1 + d2, 0) + v1 * v2
        return PolyZ(c)

    __rmul__ = __mul__

    def shift(self, k: int) -> "PolyZ":
        """Multiply by ``zeta**k``; ``k`` may be negative if exact."""
        return PolyZ({d + k: v for d, v in self._c.items()})

    def __eq__(self, other):
        other = self._lift(other)
        if other is NotImplemented:
            return False
        return self._c == other._c

    def __hash__(self):
        return hash(frozenset(self._c.items()))

    def __call__(self, z):
        """Evaluate at ``z``; exact for rationals, float otherwise."""
        if isinstance(z, (int, Fraction)):
            return sum((v * Fraction(z) ** d for d, v in self._c.items()), Fraction(0))
        return float(sum(float(v) * z ** d for d, v in self._c.items()))

    def __repr__(self):
        if not self._c:
            return "0"
        parts = []
        for d in sorted(self._c, reverse=True):
            v = self._c[d]
            mono = "" if d == 0 else "z" if d == 1 else f"z^{d}"
            if mono and abs(v) == 1:
                coef = "-" if v < 0 else ""
            else:
                coef = str(v)
            parts.append(coef + mono)
        return " + ".join(parts).replace("+ -", "- ")

    def to_json(self) -> dict:
        return {"terms": [{"deg": d, "num": str(v.numerator), "den": str(v.denominator)}
                          for d, v in sorted(self._c.items(), reverse=True)]}

    @classmethod
    def from_json(cls, obj) -> "PolyZ":
        return cls({int(t["deg"]): Fraction(int(t["num"]), int(t["den"]))
                    for t in obj["terms"]})


ZETA = PolyZ.monomial(1)
ZERO = PolyZ()
ONE = PolyZ.const(1)


def low_term(p: PolyZ) -> Term:
    d = p.low_degree()
    return d, p[d]


def high_term(p: PolyZ) -> Term:
    d = p.degree()
    return d, p[d]


class Normalization(str, Enum):
    STANDARD = "standard"
    REDUCED = "reduced"


@dataclass(frozen=True)
class TrekRuleConfig:
    """A DAG with exact edge weights; missing weights default to 1.

    ``standard`` is the solution for diagonal ``-1/(2 zeta)`` and ``C = 2I``;
    ``reduced`` divides every entry by ``2 zeta``.
    """

    dag: DirectedGraph
    weights: Mapping[Edge, Rational] = field(default_factory=dict)
    normalization: Normalization = Normalization.STANDARD

    def __post_init__(self):
        if not is_dag(self.dag):
            raise CyclicGraphError("the trek rule needs an acyclic graph")
        for e in self.weights:
            if not self.dag.has_edge(*e):
                raise ValueError(f"weight given for missing edge {e}")
        object.__setattr__(self, "normalization", Normalization(self.normalization))

    def weight(self, a: int, b: int) -> Fraction:
        return Fraction(self.weights.get((a, b), 1))


def trek_rule_sigma(cfg: TrekRuleConfig) -> List[List[PolyZ]]:
    """Covariance matrix (1-based vertices at 0-based positions).

    Uses the entrywise recurrence obtained from the Lyapunov equation with
    diagonal ``-1/(2 zeta)``::

        s_ij = zeta * (C_ij + sum_{l in pa(j)} m_jl s_li + sum_{k in pa(i)} m_ik s_kj)

    Pairs are visited by (later topological position, earlier position), so
    every term on the right is already known.
    """
    g = cfg.dag
    pos = {v: k for k, v in enumerate(topological_order(g))}
    byp = sorted(g.vertices, key=pos.get)
    sig: Dict[Tuple[int, int], PolyZ] = {}

    def get(a, b):
        return sig[(a, b) if pos[a] <= pos[b] else (b, a)]

    for hi in range(g.n):
        for lo in range(hi + 1):
            a, b = byp[lo], byp[hi]
            acc = PolyZ.const(2) if a == b else ZERO
            for l in g.parents(b):
                acc = acc + cfg.weight(l, b) * get(l, a)
            for k in g.parents(a):
                acc = acc + cfg.weight(k, a) * get(k, b)
            sig[(a, b)] = acc.shift(1)
    out = [[get(a, b) for b in g.vertices] for a in g.vertices]
    if cfg.normalization is Normalization.REDUCED:
        out = [[p.shift(-1) * Fraction(1, 2) for p in row] for row in out]
    return out


def enumerate_treks(dag: DirectedGraph, i: int, j: int) -> List[Trek]:
    """All treks from i to j, the empty trek included when ``i == j``."""
    if not is_dag(dag):
        raise CyclicGraphError("trek enumeration needs an acyclic graph")
    out = []
    for t in dag.vertices:
        for left in directed_paths(dag, t, i):
            for right in directed_paths(dag, t, j):
                out.append(Trek(left, right))
    return out


def trek_monomial(trek: Trek, cfg: TrekRuleConfig) -> PolyZ:
    """Contribution of one trek to its covariance entry."""
    l, r = trek.lengths
    w = Fraction(comb(l + r, l))
    for a, b in trek.edges():
        w *= cfg.weight(a, b)
    if cfg.normalization is Normalization.STANDARD:
        return PolyZ.monomial(l + r + 1, 2 * w)
    return PolyZ.monomial(l + r, w)


def trek_sum_sigma(cfg: TrekRuleConfig) -> List[List[PolyZ]]:
    """Covariance by explicit summation over all treks (exponential)."""
    g = cfg.dag
    return [[sum((trek_monomial(t, cfg) for t in enumerate_treks(g, a, b)), ZERO)
             for b in g.vertices] for a in g.vertices]


# --------------------------------------------------------------------------
# determinants


def _row_to_int(row: Sequence[PolyZ]) -> Tuple[List[Dict[int, int]], int]:
    """Scale a row to integer coefficients; returns (row, multiplier)."""
    den = 1
    for p in row:
        for v in p._c.values():
            den = lcm(den, v.denominator)
    return [{d: int(v * den) for d, v in p._c.items()} for p in row], den


def _unpack(value: int, bits: int) -> Dict[int, int]:
    """Signed base-``2**bits`` digits of ``value``."""
    base = 1 << bits
    half = base >> 1
    out, d = {}, 0
    while value:
        digit = value & (base - 1)
        if digit >= half:
            digit -= base
        if digit:
            out[d] = digit
        value = (value - digit) >> bits
        d += 1
    return out


def bareiss_det(A: List[List[int]]) -> int:
    """Fraction-free Gaussian elimination over the integers."""
    A = [list(r) for r in A]
    n = len(A)
    sign, prev = 1, 1
    for k in range(n - 1):
        if A[k][k] == 0:
            for r in range(k + 1, n):
                if A[r][k]:
                    A[k], A[r] = A[r], A[k]
                    sign = -sign
                    break
            else:
                return 0
        p = A[k][k]
        for r in range(k + 1, n):
            ar, ak = A[r], A[k]
            f = ar[k]
            for c in range(k + 1, n):
                ar[c] = (ar[c] * p - f * ak[c]) // prev
            ar[k] = 0
        prev = p
    return sign * A[-1][-1] if n else 1


def poly_det(A: Sequence[Sequence[PolyZ]]) -> PolyZ:
    """Exact determinant of a square matrix of polynomials.

    Each row is scaled to integer coefficients, then the matrix is evaluated
    at ``zeta = 2**B`` with B large enough that every minor's coefficients
    fit in signed B-bit digits.  Integer Bareiss elimination gives the
    determinant's value there, from which its coefficients are read off.
    Zero pivots are detected exactly because a minor vanishes at ``2**B``
    only if it is the zero polynomial.
    """
    n = len(A)
    if any(len(row) != n for row in A):
        raise ValueError("poly_det needs a square matrix")
    if n == 0:
        return ONE
    rows, scale = [], 1
    bound = 1
    for row in A:
        ints, den = _row_to_int(row)
        rows.append(ints)
        scale *= den
        bound *= max(1, sum(abs(v) for p in ints for v in p.values()))
    bits = bound.bit_length() + 2
    vals = [[sum(v << (bits * d) for d, v in p.items()) for p in row] for row in rows]
    coeffs = _unpack(bareiss_det(vals), bits)
    return PolyZ({d: Fraction(v, scale) for d, v in coeffs.items()})


def submatrix(S, rows: Sequence[int], cols: Sequence[int]):
    return [[S[a - 1][b - 1] for b in cols] for a in rows]


def minor(S: Sequence[Sequence[PolyZ]], i: int, j: int, K: Iterable[int] = ()) -> PolyZ:
    """``det S_{iK, jK}`` with rows and columns in ascending vertex order."""
    K = set(K)
    n = len(S)
    if i == j:
        raise ValueError("i and j must differ")
    if i in K or j in K:
        raise ValueError("K must not contain i or j")
    if not all(1 <= v <= n for v in K | {i, j}):
        raise ValueError(f"vertex outside 1..{n}")
    return poly_det(submatrix(S, sorted(K | {i}), sorted(K | {j})))


def principal_minor(S, K: Iterable[int]) -> PolyZ:
    K = sorted(set(K))
    return poly_det(submatrix(S, K, K))


def evaluate(S: Sequence[Sequence[PolyZ]], z) -> np.ndarray:
    """Float matrix of the polynomial matrix evaluated at ``z``."""
    return np.array([[float(p(Fraction(z))) for p in row] for row in S], dtype=float)


# --------------------------------------------------------------------------
# closed forms for trek minors


def expected_trek_low_term(l: int, r: int) -> Term:
    """Lowest term of the endpoint minor of an (l, r)-trek, both sides >= 1."""
    if l < 1 or r < 1:
        raise ValueError("both trek sides need length at least 1")
    return l + r, Fraction((-1) ** (l + r + 1) * comb(l + r - 2, l - 1))


def pascal_high_matrix(n: int) -> List[List[Fraction]]:
    """The symmetric Pascal matrix of order ``n - 1``, ``binom(a+b-2, a-1)``."""
    if n < 1:
        raise ValueError("n must be at least 1")
    return [[Fraction(comb(a + b - 2, a - 1)) for b in range(1, n)] for a in range(1, n)]


def rational_det(A: Sequence[Sequence[Rational]]) -> Fraction:
    return poly_det([[PolyZ.const(v) for v in row] for row in A])[0]


def high_term_matrix(S, rows: Sequence[int], cols: Sequence[int]) -> List[List[Fraction]]:
    """Leading coefficients of the entries of ``S_{rows, cols}``."""
    return [[high_term(p)[1] if p else Fraction(0) for p in row]
            for row in submatrix(S, rows, cols)]
