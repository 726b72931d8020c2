import pytest
import sympy

from scalarprod.adjunction import Adjunction
from scalarprod.kronecker import (
    KroneckerProblem,
    algorithm4,
    kronecker_factored,
    schur_sum_kronecker,
)
from scalarprod.weyl import AlgebraSignature, act_on_expr

P1 = AlgebraSignature(p_vars=("p1",))
P1_N = AlgebraSignature(p_vars=("p1",), params=("N",))


def test_problem_validation(op):
    with pytest.raises(ValueError, match="at least one nonzero operator"):
        KroneckerProblem([op("0", P1)], [op("dp1", P1)])
    mixed = AlgebraSignature(p_vars=("p1",), t_vars=("t",), blocks=("dt",))
    with pytest.raises(ValueError, match="involves t-letters"):
        KroneckerProblem([op("dp1", P1)], [op("dt - p1", mixed)])


def test_problem_variables(op):
    f = op("dp2 - N", AlgebraSignature(p_vars=("p2",), params=("N",)))
    problem = KroneckerProblem([f], [op("dp1", P1)], Adjunction.hall(["p1", "p2"]))
    assert problem.p_vars == ("p1", "p2")
    assert problem.params == ("N", "q")


def test_exponential_is_a_unit(op):
    exp_p1 = [op("dp1 - 1", P1)]
    assert algorithm4(KroneckerProblem(exp_p1, exp_p1)) == [op("dp1 - 1", P1)]


def test_weighted_product(op):
    exp_p1 = [op("dp1 - 1", P1)]
    found = algorithm4(KroneckerProblem(exp_p1, exp_p1, Adjunction.uniform(["p1"], 3)))
    assert found == [op("dp1 - 3", P1)]


def test_factored_product(op):
    exp_p = [op("dp1 - 1", P1)]
    found = kronecker_factored({"p1": (exp_p, exp_p), "p2": (exp_p, exp_p)})
    target = AlgebraSignature(p_vars=("p1", "p2"))
    assert found == [op("dp1 - 1", target), op("dp2 - 2", target)]


def test_factored_needs_one_variable(op):
    two = AlgebraSignature(p_vars=("p1", "p2"))
    with pytest.raises(ValueError, match="one p-variable"):
        kronecker_factored({"p1": ([op("dp1 - 1", two)], [op("dp2", two)])})


def test_schur_sum_even_factor(op):
    found = schur_sum_kronecker("even")
    assert found.normalized() == op("(1 - p1^2)*dp1 - p1", P1_N).normalized()


def test_schur_sum_odd_factor(op):
    found = schur_sum_kronecker("odd")
    expected = op("N*(1 + p1)*(1 - p1)^2*dp1 - (1 + (N + 1)*p1 - N*p1^2)", P1_N)
    assert found.normalized() == expected.normalized()


def test_schur_sum_factors_have_closed_forms():
    p, n = sympy.symbols("p1 N")
    even = (1 - p**2) ** sympy.Rational(-1, 2)
    odd = sympy.exp(p / (n * (1 - p))) * even
    for parity, closed in (("even", even), ("odd", odd)):
        found = schur_sum_kronecker(parity)
        assert sympy.simplify(act_on_expr(found, closed) / closed) == 0
