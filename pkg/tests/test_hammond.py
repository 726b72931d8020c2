import math

import pytest

from scalarprod.adjunction import Adjunction
from scalarprod.arith import QQ
from scalarprod.errors import EliminationFailure
from scalarprod.hammond import algorithm2, build_hk_basis, hammond_rewrite, skew_elim
from scalarprod.sequences import SequenceWindow, ode_to_rec, required_initial_indices, unroll
from scalarprod.symfun import kregular_series, ktableaux_series
from scalarprod.utils import Normalization
from scalarprod.weyl import AlgebraSignature

PT = AlgebraSignature(p_vars=("p1",), t_vars=("t",), blocks=("dt",))


@pytest.fixture
def t12_signature() -> AlgebraSignature:
    return AlgebraSignature(t_vars=("t1", "t2"), blocks=("dt",))


def _egf_window(counts):
    return SequenceWindow(
        0, [QQ(c, math.factorial(n)) for n, c in enumerate(counts)], Normalization.egf
    )


def test_basis_for_one_variable(op):
    hb = build_hk_basis(1)
    assert hb.t_vars == ("t1",)
    assert hb.p_operator(1) == op("t1", hb.signature)
    assert hb.q_operator(1) == op("dt1", hb.signature)
    mixed = AlgebraSignature(p_vars=("p1",), t_vars=("t1",), blocks=("dt",))
    assert hb.relations() == [op("dp1 - t1", mixed), op("p1 - dt1", mixed)]


def test_basis_for_two_variables(op):
    hb = build_hk_basis(2, verify=True)
    assert hb.p_operator(1) == op("t1 + t2*dt1", hb.signature)
    assert hb.p_operator(2) == op("t2", hb.signature)
    assert hb.q_operator(2) == op("dt2 - dt1^2/2", hb.signature)
    assert len(hb.relations()) == 4


@pytest.mark.slow
def test_basis_for_three_variables_verifies():
    assert build_hk_basis(3, verify=True).k == 3


def test_basis_needs_positive_k():
    with pytest.raises(ValueError, match="positive integer"):
        build_hk_basis(0)


def test_rewrite(op):
    hb = build_hk_basis(1)
    p = AlgebraSignature(p_vars=("p1",))
    assert hammond_rewrite(op("dp1 - p1 - 1", p), hb) == op("dt1 - t1 - 1", hb.signature)
    weighted = hammond_rewrite(op("dp1 - p1", p), hb, Adjunction.uniform(["p1"], 2))
    assert weighted == op("dt1/2 - 2*t1", hb.signature)


def test_rewrite_keeps_p_before_dp(op):
    hb = build_hk_basis(2)
    p = AlgebraSignature(p_vars=("p1", "p2"))
    assert hammond_rewrite(op("p1*dp1", p), hb) == op("t1*dt1 + t2*dt1^2", hb.signature)
    assert hammond_rewrite(op("p2", p), hb) == op("t2", hb.signature)


def test_rewrite_rejects(op):
    hb = build_hk_basis(1)
    with pytest.raises(ValueError, match="p-letters only"):
        hammond_rewrite(op("dt - p1", PT), hb)
    with pytest.raises(ValueError, match="beyond p1"):
        hammond_rewrite(op("dp2", AlgebraSignature(p_vars=("p1", "p2"))), hb)


def test_skew_elim(op, t12_signature):
    free = skew_elim(op("dt1 - t1", t12_signature), op("dt1 - t2", t12_signature), "dt1")
    assert free in (op("t1 - t2", t12_signature), op("t2 - t1", t12_signature))

    free = skew_elim(op("dt1^2 - t2", t12_signature), op("dt1", t12_signature), "dt1")
    assert free in (op("t2", t12_signature), op("-t2", t12_signature))


def test_skew_elim_needs_the_letter(op, t12_signature):
    with pytest.raises(EliminationFailure, match="neither operator involves dt1"):
        skew_elim(op("dt2 - t1", t12_signature), op("t2", t12_signature), "dt1")


def test_hammond_perfect_matchings(op):
    f, _ = kregular_series(1)
    result = algorithm2(1, f.annihilator())
    assert result == op("dt1 - t1", AlgebraSignature(t_vars=("t1",), blocks=("dt",)))


def test_hammond_two_regular_graphs():
    f, _ = kregular_series(2)
    result = algorithm2(2, f.annihilator())
    assert result.signature.t_vars == ("t2",)
    assert ode_to_rec(result).satisfied_by(_egf_window([1, 0, 0, 1, 3, 12, 70, 465, 3507]))


@pytest.mark.slow
def test_hammond_three_regular_graphs(cubic_graph_counts, unrolled_counts):
    f, _ = kregular_series(3)
    result = algorithm2(3, f.annihilator())
    rec = ode_to_rec(result)
    assert unrolled_counts(rec, cubic_graph_counts, Normalization.egf) == tuple(cubic_graph_counts)


@pytest.mark.slow
@pytest.mark.parametrize("k", [1, 2, 3, 4])
def test_hammond_uniform_tableaux(k, tableaux_counts, unrolled_counts):
    f, _ = ktableaux_series(k)
    rec = ode_to_rec(algorithm2(k, f.annihilator()))
    counts = tableaux_counts[k]
    assert unrolled_counts(rec, counts, Normalization.egf) == tuple(counts)


@pytest.mark.slow
def test_three_uniform_tableaux_recurrence(tableaux_counts, three_uniform_tableaux):
    f, _ = ktableaux_series(3)
    rec = ode_to_rec(algorithm2(3, f.annihilator()))
    counts = tableaux_counts[3]
    need = max(required_initial_indices(rec), default=-1) + 1
    init = _egf_window(counts[:need])
    window = unroll(rec, init, 40).with_counts()
    assert window.values[: len(counts)] == tuple(counts)
    assert three_uniform_tableaux.satisfied_by(window)


def test_algorithm2_rejects(op):
    with pytest.raises(ValueError, match="nonzero operator"):
        algorithm2(1, [])
    with pytest.raises(ValueError, match="t-free F"):
        algorithm2(1, [op("dt - p1", PT)])
