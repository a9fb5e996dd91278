import json
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from conftest import all_graphs
from trekci.graph_core import DirectedGraph, Trek, trek_shape
from trekci.lyapunov_numeric import (
    CIVerdict, gaussian_ci_test, is_positive_definite, lyapunov_residual,
    solve_lyapunov,
)
from trekci.markov import enumerate_elementary_ci
from trekci.trek_poly import TrekRuleConfig, minor, trek_rule_sigma
from trekci.witness import (
    SweepExhaustedError, Witness, WitnessPreconditionError, ZigZag,
    build_trek_drift, embed_subgraph_witness, extract_zigzag, find_witness,
    perfect_correlation_drift, trek_minus, verify_witness, zeta_schedule,
    zigzag_drift, zigzag_minor_factors, zigzag_witness,
)

TREK4 = Trek((1, 2), (1, 3, 4))


def test_zeta_schedule():
    got = list(zeta_schedule(3))
    assert got == [1, Fraction(1, 2), 2, Fraction(1, 3), 3]


def test_extract_zigzag_examples(zigzag5, trek4, diamond):
    z = extract_zigzag(zigzag5, 3, 5, {1, 4})
    assert z.treks == (Trek((1, 3), (1, 4)), Trek((2, 4), (2, 5)))
    assert z.joins == (4,) and z.tails == ((4,),)
    assert z.edges() == zigzag5.edges

    z = extract_zigzag(trek4, 2, 4, {1, 3})
    assert z.treks == (TREK4,) and z.joins == ()

    z = extract_zigzag(diamond, 2, 3, {1})
    assert z.treks == (Trek((1, 2), (1, 3)),)


def test_extract_zigzag_collider_with_tail():
    # 1 -> 3 <- 2, 3 -> 4: conditioning on the descendant 4 opens the collider
    g = DirectedGraph.from_edges(4, [(1, 3), (2, 3), (3, 4)])
    z = extract_zigzag(g, 1, 2, {4})
    assert z.joins == (3,) and z.tails == ((3, 4),)
    assert z.is_valid_in(g, {4})


def test_extract_zigzag_precondition(chain_collider):
    with pytest.raises(WitnessPreconditionError):
        extract_zigzag(chain_collider, 1, 4, set())
    with pytest.raises(WitnessPreconditionError):
        find_witness(chain_collider, 1, 4, {2})


def test_zigzag_json_roundtrip(zigzag5):
    z = extract_zigzag(zigzag5, 3, 5, {1, 4})
    assert ZigZag.from_json(json.loads(json.dumps(z.to_json()))) == z


def test_build_trek_drift():
    M = build_trek_drift(TREK4)
    want = -0.5 * np.eye(4)
    want[1, 0] = want[2, 0] = want[3, 2] = 1.0
    assert np.array_equal(M, want)
    assert np.array_equal(build_trek_drift(Trek((7,), (7,))), [[-0.5]])
    assert np.allclose(np.diag(build_trek_drift(TREK4, Fraction(1, 2))), -1.0)
    with pytest.raises(ValueError):
        build_trek_drift(TREK4, 0)


def test_trek_minus_cases():
    assert trek_minus(TREK4, 3) == Trek((1, 2), (1, 4))
    # top removed, right side of length one: c_l -> c_r
    t = Trek((3, 2, 1), (3, 4))
    assert trek_minus(t, 3) == Trek((2, 1), (2, 4))
    # top removed, longer right side: c_l <- c_r
    t = Trek((3, 2, 1), (3, 4, 5))
    assert trek_minus(t, 3) == Trek((4, 2, 1), (4, 5))
    with pytest.raises(ValueError):
        trek_minus(TREK4, 2)


def test_perfect_correlation_drift_errors():
    with pytest.raises(ValueError):
        perfect_correlation_drift(TREK4, 1, 10.0)
    with pytest.raises(ValueError):
        perfect_correlation_drift(TREK4, 4, 10.0)
    with pytest.raises(ValueError):
        perfect_correlation_drift(Trek((1, 2), (1, 3)), 2, 10.0)
    with pytest.raises(ValueError):
        perfect_correlation_drift(TREK4, 3, 0.0)


def test_perfect_correlation_convergence():
    star = solve_lyapunov(build_trek_drift(trek_minus(TREK4, 3)), 2 * np.eye(3))
    keep = [0, 1, 3]
    errs = []
    for m in (10.0, 100.0, 1000.0):
        S = solve_lyapunov(perfect_correlation_drift(TREK4, 3, m), 2 * np.eye(4))
        assert is_positive_definite(S)
        errs.append(np.abs(S[np.ix_(keep, keep)] - star).max())
        # X_3 tracks its parent 1
        assert abs(S[2, 2] - star[0, 0]) < 10 / m
        assert m * errs[-1] < 2.0
    assert errs[0] > errs[1] > errs[2]


def test_zigzag_witness_examples(zigzag5, trek4):
    z = extract_zigzag(zigzag5, 3, 5, {1, 4})
    M, S, value, verts = zigzag_witness(z, 3, 5, {1, 4}, 1)
    assert verts == [1, 2, 3, 4, 5]
    # |Sigma_{314,514}| = sigma_45 * |Sigma_{31,41}|
    sub = S[np.ix_([0, 2], [0, 3])]
    assert value == pytest.approx(S[3, 4] * np.linalg.det(sub), rel=1e-10)
    assert value != 0

    z = extract_zigzag(trek4, 2, 4, {1, 3})
    _, _, value, _ = zigzag_witness(z, 2, 4, {1, 3}, 1)
    assert value == pytest.approx(-8.0, rel=1e-10)


def test_zigzag_witness_single_trek_matches_polynomial():
    g, t = trek_shape(2, 3)
    S = trek_rule_sigma(TrekRuleConfig(g))
    p = minor(S, 1, g.n, range(2, g.n))
    z = ZigZag((t,))
    for zeta in (Fraction(1), Fraction(1, 2), Fraction(3)):
        _, _, value, _ = zigzag_witness(z, 1, g.n, range(2, g.n), zeta)
        assert value == pytest.approx(float(p(zeta)), rel=1e-8)


def test_zigzag_drift_copies_non_conditioned_nodes(chain_collider):
    z = extract_zigzag(chain_collider, 1, 4, {3})
    d = zigzag_drift(z, {3}, 1, 100.0)
    assert d.copies == {2: 1}
    assert d.M[1, 1] == -100.0 and d.M[1, 0] == 100.0


def test_zigzag_drift_top_outside_k():
    # 2 <- 1 -> 3 -> 4 -> 5 with K = {4}: the top 1 is stood in for by 4
    g = DirectedGraph.from_edges(5, [(1, 2), (1, 3), (3, 4), (4, 5)])
    z = extract_zigzag(g, 2, 5, {4})
    d = zigzag_drift(z, {4}, 1, 100.0)
    assert d.copies == {3: 1, 4: 3}
    w = find_witness(g, 2, 5, {4})
    assert not verify_witness(w)


def test_factorization_with_collider_outside_k():
    # collider 3 not in K, tail 3 -> 5 -> 4 cut after 5
    g = DirectedGraph.from_edges(5, [(1, 3), (2, 3), (3, 5), (5, 4)])
    K = {4, 5}
    z = extract_zigzag(g, 1, 2, K)
    assert z.tails == ((3, 5, 4),)
    d = zigzag_drift(z, K, 1, 1e3)
    assert d.copies == {5: 3} and d.isolated == [4]
    M, S, value, verts = zigzag_witness(z, 1, 2, K, 1, 1e3)
    a, b, c = zigzag_minor_factors(z, K, S, verts)
    assert abs(value) == pytest.approx(abs(a * b * c), rel=1e-8)
    assert value != 0


def test_embed_subgraph_witness():
    M, S = embed_subgraph_witness(3, [1, 2], -np.eye(2), np.eye(2))
    assert np.array_equal(M, -np.eye(3)) and np.array_equal(S, np.eye(3))
    with pytest.raises(ValueError):
        embed_subgraph_witness(3, [1, 2], -np.eye(3), np.eye(3))

    Ms = build_trek_drift(TREK4)
    Ss = solve_lyapunov(Ms, 2 * np.eye(4))
    M, S = embed_subgraph_witness(6, [1, 2, 3, 4], Ms, Ss)
    assert np.array_equal(S[:4, :4], Ss)
    assert lyapunov_residual(M, S, 2 * np.eye(6)) < 1e-12
    base = np.linalg.det(Ss[np.ix_([0, 1, 2], [0, 2, 3])])
    assert np.linalg.det(S[np.ix_([0, 1, 2], [0, 2, 3])]) == base
    # an identity node in K only contributes a unit factor
    assert np.linalg.det(S[np.ix_([0, 1, 2, 5], [0, 2, 3, 5])]) == pytest.approx(base, rel=1e-14)


def test_find_witness_chain_collider(chain_collider):
    w = find_witness(chain_collider, 1, 4, {3})
    assert gaussian_ci_test(w.Sigma, 1, 4, [3]) is CIVerdict.DEPENDENT
    assert verify_witness(w) == []
    assert w.m_approx == 100 and w.zeta == 1


def test_verify_witness_detects_tampering(chain_collider):
    w = find_witness(chain_collider, 1, 4, {3})
    bad = Witness.from_json(w.to_json())
    bad.M[2, 1] = 0.0
    assert any(f.startswith("residual") for f in verify_witness(bad))
    bad = Witness.from_json(w.to_json())
    bad.minor_value = 0.0
    assert verify_witness(bad)
    bad = Witness.from_json(w.to_json())
    bad.M[3, 0] = 1.0
    assert any(f.startswith("support") for f in verify_witness(bad))


def test_witness_json_roundtrip(zigzag5):
    w = find_witness(zigzag5, 3, 5, {1, 4})
    back = Witness.from_json(json.loads(json.dumps(w.to_json())))
    assert back.zigzag == w.zigzag and back.zeta == w.zeta
    assert np.array_equal(back.M, w.M) and np.array_equal(back.Sigma, w.Sigma)
    assert verify_witness(back) == []


def test_sweep_exhausted_reports(chain_collider):
    with pytest.raises(SweepExhaustedError):
        find_witness(chain_collider, 1, 4, {3}, margin_rel=1.0)


def _not_implied(g):
    for s in enumerate_elementary_ci(g):
        if not s.implied:
            (i,), (j,) = s.I, s.J
            yield i, j, s.K


def test_completeness_all_graphs_n3():
    count = 0
    for g in all_graphs(3):
        for i, j, K in _not_implied(g):
            assert not verify_witness(find_witness(g, i, j, K))
            count += 1
    assert count > 0


def test_completeness_sampled_n4():
    for k, g in enumerate(all_graphs(4)):
        if k % 97:
            continue
        for i, j, K in _not_implied(g):
            assert not verify_witness(find_witness(g, i, j, K))


@st.composite
def sparse_graphs(draw):
    n = draw(st.integers(4, 7))
    pairs = [(a, b) for a in range(1, n + 1) for b in range(1, n + 1) if a != b]
    keep = draw(st.lists(st.booleans(), min_size=len(pairs), max_size=len(pairs)))
    g = DirectedGraph(n, frozenset(p for p, k in zip(pairs, keep) if k and draw(st.booleans())))
    return g


@settings(max_examples=40, deadline=None)
@given(sparse_graphs(), st.data())
def test_witness_soundness_and_factorization(g, data):
    cases = list(_not_implied(g))
    if not cases:
        return
    i, j, K = data.draw(st.sampled_from(cases))
    w = find_witness(g, i, j, K)
    assert verify_witness(w) == []
    z = w.zigzag
    assert z.is_valid_in(g, K)
    if z.joins:
        m = w.m_approx or 1e3
        _, S, value, verts = zigzag_witness(z, i, j, K, w.zeta, m)
        a, b, c = zigzag_minor_factors(z, K, S, verts)
        assert abs(value) == pytest.approx(abs(a * b * c), rel=1e-8)
