import pytest

from scalarprod.orders import MonomialOrder, compare, induced_adjoint_order
from scalarprod.weyl import AlgebraSignature


@pytest.fixture
def signature() -> AlgebraSignature:
    return AlgebraSignature(p_vars=("p1", "p2"), t_vars=("t",), blocks=("dt",))


def test_degrevlex_ranks_groups_then_indices(signature):
    order = MonomialOrder.degrevlex("dp", "p")
    m = signature.monomial
    assert compare(m({"dp1": 1}), m({"p1": 1}), order, signature) == 1
    assert compare(m({"dp1": 1}), m({"dp2": 1}), order, signature) == 1
    assert compare(m({"p1": 2}), m({"dp1": 1}), order, signature) == 1
    assert compare(m({"p2": 1}), m({"p2": 1}), order, signature) == 0


def test_block_order_eliminates(signature):
    order = MonomialOrder.block(("dp",), "p", "dt")
    m = signature.monomial
    assert compare(m({"dp2": 1}), m({"p1": 5, "dt": 3}), order, signature) == 1
    assert compare(m({"p1": 1, "dp2": 1}), m({"dp1": 1}), order, signature) == -1
    with pytest.raises(ValueError, match="nonempty eliminated block"):
        MonomialOrder.block(())


def test_single_letters_can_be_eliminated():
    sig = AlgebraSignature(t_vars=("t1", "t2"), blocks=("dt",))
    order = MonomialOrder.block(("dt1",), "dt")
    m = sig.monomial
    assert compare(m({"dt1": 1}), m({"dt2": 4}), order, sig) == 1


def test_leading(signature):
    order = MonomialOrder.degrevlex("dt", "p", "dp")
    m = signature.monomial
    monomials = [m({"p1": 1}), m({"dt": 1}), m({"dp1": 1})]
    assert order.leading(monomials, signature) == m({"dt": 1})


def test_induced_adjoint_swaps_kinds():
    order = MonomialOrder.block(("dp",), "dp", "p", "dt")
    induced = induced_adjoint_order(order)
    assert induced.groups == ("p", "dp", "dt")
    assert induced.eliminated == frozenset({"p"})
    assert order.induced_adjoint() == induced


@pytest.mark.parametrize("kinds", [("dq",), ("p", "p")])
def test_bad_groups(kinds):
    with pytest.raises(ValueError, match="letter kind"):
        MonomialOrder.degrevlex(*kinds)
