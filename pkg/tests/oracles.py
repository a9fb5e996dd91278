"""Slow reference implementations used only to cross-check production code."""

from itertools import permutations

from trekci.trek_poly import ONE, ZERO


def _sign(perm):
    sign, seen = 1, set()
    for start in range(len(perm)):
        if start in seen:
            continue
        length, k = 0, start
        while k not in seen:
            seen.add(k)
            k = perm[k]
            length += 1
        if length % 2 == 0:
            sign = -sign
    return sign


def leibniz_det(A):
    n = len(A)
    total = ZERO
    for perm in permutations(range(n)):
        term = ONE
        for r, c in enumerate(perm):
            term = term * A[r][c]
            if not term:
                break
        if term:
            total = total + _sign(perm) * term
    return total
