import math

import pytest
import sympy

from scalarprod.adjunction import Adjunction, adjoint
from scalarprod.arith import QQ, TSeries
from scalarprod.errors import InconclusiveCheck, InsufficientTruncation, SizeLimitExceeded
from scalarprod.oracle import (
    CheckResult,
    TruncatedSymSeries,
    annihilation_check,
    apply_operator,
    direct_count,
    kronecker_trunc,
    operator_check,
    scalar_product_trunc,
    series_solution,
    theta_specialize,
    trunc_exp,
    trunc_reciprocal,
    truncate,
)
from scalarprod.symfun import kregular_series, ktableaux_series, multigraph_series
from scalarprod.weyl import AlgebraSignature

p1, p2, t = sympy.symbols("p1 p2 t")


def _egf(counts):
    return [QQ(c, math.factorial(n)) for n, c in enumerate(counts)]


def test_truncated_exponential():
    s = trunc_exp(p1**2 / 2 + p2, 4)
    assert s.bound == 4
    assert s.max_weight == 4
    assert not s.exact
    expected = sympy.expand(1 + p1**2 / 2 + p2 + p1**4 / 8 + p1**2 * p2 / 2 + p2**2 / 2)
    assert sympy.expand(s.to_expr() - expected) == 0
    with pytest.raises(ValueError, match="must vanish at p = 0"):
        trunc_exp(p1 + 1, 3)


def test_truncated_reciprocal():
    s = trunc_reciprocal(1 - t * p1, 3, ("p1",), ("t",))
    assert sympy.expand(s.to_expr() - (1 + t * p1 + t**2 * p1**2 + t**3 * p1**3)) == 0
    assert s.inv_grading == 1
    exact = trunc_reciprocal(sympy.Integer(2), 3, ("p1",))
    assert exact.exact
    with pytest.raises(ValueError, match="nonzero number"):
        trunc_reciprocal(t + p1, 3, ("p1",), ("t",))


def test_exact_polynomials_stay_exact():
    s = TruncatedSymSeries.from_expr(p1**2 + p2, 5, ("p1", "p2"))
    assert s.exact
    assert not s.truncate(1).exact
    with pytest.raises(ValueError, match="at least one power sum"):
        TruncatedSymSeries.from_expr(t, 3, ())


def test_perfect_matchings():
    f, g = kregular_series(1)
    s = scalar_product_trunc(truncate(f, 12), truncate(g, 12))
    assert s.precision == 13
    assert [s[n] for n in range(7)] == _egf([1, 0, 1, 0, 3, 0, 15])


def test_two_regular_graphs():
    f, g = kregular_series(2)
    s = scalar_product_trunc(truncate(f, 14), truncate(g, 14))
    assert s.precision == 8
    assert [s[n] for n in range(7)] == _egf([1, 0, 0, 1, 3, 12, 70])
    with pytest.raises(InsufficientTruncation):
        scalar_product_trunc(truncate(f, 14), truncate(g, 14), order=12)


def test_two_regular_multigraphs():
    f, g = multigraph_series(2)
    s = scalar_product_trunc(truncate(f, 14), truncate(g, 14))
    assert [s[n] for n in range(5)] == _egf([1, 1, 2, 5, 17])


def test_tableaux_pairing_is_ordinary():
    f, g = ktableaux_series(1)
    s = scalar_product_trunc(truncate(f, 8), truncate(g, 8))
    assert [s[n] for n in range(6)] == [1, 1, 2, 4, 10, 26]


def test_pairing_needs_one_t_variable():
    a = trunc_exp(t * p1, 3, ("p1",), ("t",))
    b = trunc_exp(sympy.Symbol("t2") * p1, 3, ("p1",), ("t2",))
    with pytest.raises(ValueError, match="one variable"):
        scalar_product_trunc(a, b)


def test_weighted_pairing():
    q = sympy.Symbol("q")
    a = TruncatedSymSeries.from_expr(p1**2, 2, ("p1",))
    b = TruncatedSymSeries.from_expr(t * p1**2, 2, ("p1",), ("t",))
    assert scalar_product_trunc(a, b)[1] == 2
    weighted = scalar_product_trunc(
        TruncatedSymSeries.from_expr(p1**2, 2, ("p1",), params=("q",)),
        TruncatedSymSeries.from_expr(t * p1**2, 2, ("p1",), ("t",), ("q",)),
        Adjunction.hall(1),
    )
    assert weighted[1] == weighted.field(2 * (1 - q) ** 2)


def test_kronecker_of_exponentials():
    e = trunc_exp(p1, 6)
    product = kronecker_trunc(e, e)
    assert product.poly == e.poly
    with pytest.raises(ValueError, match="power sums only"):
        kronecker_trunc(trunc_exp(t * p1, 3, ("p1",), ("t",)), e)


def test_theta():
    assert theta_specialize(p1**2 + p2).coefficients == (0, 0, 1)
    s = theta_specialize(trunc_exp(p1**2 / 2 + p2, 4))
    assert s.precision == 5
    assert s[4] == QQ(1, 8)


def test_operator_on_series(op):
    sig = AlgebraSignature(p_vars=("p1",))
    s = trunc_exp(p1**2 / 2, 10)
    residual = apply_operator(op("dp1 - p1", sig), s)
    assert residual.bound == 9
    assert not residual.poly
    result = operator_check(op("dp1 - p1", sig), s)
    assert result.passed
    assert result.checked == 10
    failed = operator_check(op("dp1", sig), s)
    assert not failed.passed
    assert failed.first_failure == 1


def test_annihilation_check(op, t_signature):
    f, g = kregular_series(1)
    s = scalar_product_trunc(truncate(f, 12), truncate(g, 12))
    assert annihilation_check(op("dt - t", t_signature), s).passed
    failed = annihilation_check(op("dt", t_signature), s)
    assert failed.status == "failed"
    assert failed.first_failure == 1
    assert failed.to_dict() == {
        "operator": "dt",
        "status": "failed",
        "checked": failed.checked,
        "first_failure": 1,
    }
    with pytest.raises(InconclusiveCheck, match="floor"):
        annihilation_check(op("dt - t", t_signature), TSeries((1, 0, QQ(1, 2)), precision=3))


def test_skipped_check():
    result = CheckResult.skip("dt - t")
    assert result.status == "skipped"
    assert result.to_dict() == {"operator": "dt - t", "status": "skipped", "checked": 0}


def test_direct_counts():
    assert direct_count("kregular", 2, 6) == [1, 0, 0, 1, 3, 12, 70]
    assert direct_count("ktableaux", 1, 5) == [1, 1, 2, 4, 10, 26]
    assert direct_count("ktableaux", 3, 4) == [1, 1, 4, 23, 214]
    assert direct_count("kregular", 3, 6) == [1, 0, 0, 0, 1, 0, 70]
    with pytest.raises(SizeLimitExceeded):
        direct_count("kregular", 3, 8)
    with pytest.raises(ValueError, match="unknown problem"):
        direct_count("graphs", 2, 3)  # type: ignore


@pytest.mark.slow
def test_direct_counts_of_four_uniform_tableaux():
    assert direct_count("ktableaux", 4, 6) == [1, 1, 5, 42, 641, 14751, 478711]


def test_series_solution(op, t_signature):
    s = series_solution(op("dt - t", t_signature), [1], 6)
    assert list(s.coefficients) == [1, 0, QQ(1, 2), 0, QQ(1, 8), 0]


def test_two_regular_closed_form(op, t_signature):
    closed = sympy.exp(-t * (t + 2) / 4) / sympy.sqrt(1 - t)
    expected = sympy.series(closed, t, 0, 11).removeO()
    s = series_solution(op("2*(1 - t)*dt - t^2", t_signature), [1], 11)
    for n in range(11):
        c = sympy.Rational(expected.coeff(t, n))
        assert s[n] == QQ(int(c.p), int(c.q))


def test_pairing_is_adjoint(rng, random_operator, p2_signature):
    adj = Adjunction()

    def polynomial():
        return sum(rng.randint(-3, 3) * p1**a * p2**b for a in range(4) for b in range(3))

    for _ in range(10):
        u = random_operator(p2_signature)
        f = TruncatedSymSeries.from_expr(polynomial(), 40, ("p1", "p2"))
        g = TruncatedSymSeries.from_expr(polynomial(), 40, ("p1", "p2"))
        left = scalar_product_trunc(apply_operator(u, f), g, adj, order=1)
        right = scalar_product_trunc(f, apply_operator(adjoint(u, adj), g), adj, order=1)
        assert left[0] == right[0]


@pytest.mark.parametrize(
    ("problem", "k", "n_max"),
    [
        ("kregular", 2, 6),
        pytest.param("kregular", 3, 6, marks=pytest.mark.slow),
        ("ktableaux", 1, 6),
        ("ktableaux", 2, 6),
        pytest.param("ktableaux", 3, 6, marks=pytest.mark.slow),
    ],
)
def test_direct_counts_agree_with_pairings(problem, k, n_max):
    f, g = {"kregular": kregular_series, "ktableaux": ktableaux_series}[problem](k)
    bound = k * (n_max + 1) + 1
    s = scalar_product_trunc(truncate(f, bound), truncate(g, bound), order=n_max + 1)
    values = [s[n] for n in range(n_max + 1)]
    if problem == "kregular":
        values = [v * math.factorial(n) for n, v in enumerate(values)]
    assert values == direct_count(problem, k, n_max)
