import pytest
import sympy

from scalarprod.arith import (
    QQ,
    CoefficientField,
    TSeries,
    format_poly,
    poly_arith,
    poly_gcd,
    poly_ring,
    primitive_part,
    rational,
    ratfun_arith,
)
from scalarprod.errors import SubstitutionError
from scalarprod.utils import to_expr


def test_rational_is_reduced():
    q = rational(6, -4)
    assert q == QQ(-3, 2)
    assert q.denominator == 2


def test_poly_ring_rejects_duplicates():
    with pytest.raises(ValueError, match="duplicate"):
        poly_ring(("t", "t"))
    with pytest.raises(ValueError, match="at least one"):
        poly_ring(())


def test_arith_unifies_rings():
    t = poly_ring(("t",)).gens[0]
    N = poly_ring(("N",)).gens[0]
    product = poly_arith(t + 1, N, "mul")
    assert format_poly(product) == "t*N + N"
    with pytest.raises(ValueError, match="unknown polynomial operation"):
        poly_arith(t, t, "div")


def test_gcd_is_primitive_with_positive_leading_coefficient():
    ring = poly_ring(("t",))
    t = ring.gens[0]
    g = poly_gcd(-4 * (t - 1) * (t + 2), 6 * (t - 1) ** 2)
    assert g == t - 1


def test_primitive_part_splits_content():
    ring = poly_ring(("t", "N"))
    t, N = ring.gens
    content, prim = primitive_part(-6 * N * t**2 + 3 * N, wrt=("N",))
    assert content * prim == -6 * N * t**2 + 3 * N
    assert prim == 2 * t**2 - 1
    with pytest.raises(ValueError, match="not indeterminates"):
        primitive_part(t, wrt=("q",))


def test_ratfun_division():
    field = CoefficientField(("t",))
    t = field.gen("t")
    assert ratfun_arith(t**2 - 1, t - 1, "div") == t + 1


def test_coefficient_field_conversions():
    field = CoefficientField(("t", "N"))
    c = field("N/(1 - t)")
    assert field.involves(c, "t")
    assert not field.diff(c, "t") - field("N/(1 - t)^2")
    assert not field.subs_zero(c, "t") - field("N")
    assert field.to_text(field("3/2")) == "3/2"

    bare = CoefficientField(())
    assert bare("2/6") == QQ(1, 3)
    with pytest.raises(ValueError, match="not a rational number"):
        bare(sympy.Symbol("t"))


def test_coefficients_have_one_representation():
    field = CoefficientField(("t",))
    t = field.gen("t")
    a = field("1/(1 - t)")
    assert a == field.one / (1 - t)
    assert a == field("-1/(t - 1)")
    assert a.denom.LC > 0
    assert {a: "memo"}[field.one / (1 - t)] == "memo"
    assert field.subs_zero(field("t/(2 - t)") + field("1/(2 - t)"), "t") == field("1/2")


def test_parameters_may_reuse_sympy_names():
    names = ("N", "S", "E", "I", "Q")
    field = CoefficientField(("t",) + names)
    g = {name: field.gen(name) for name in names}
    expected = g["N"] + g["S"] * g["E"] - g["I"] / g["Q"] + field.gen("t")
    assert field("N + S*E - I/Q + t") == expected
    assert to_expr("N*S^2") == sympy.Symbol("N") * sympy.Symbol("S") ** 2
    assert to_expr("E + I + Q").free_symbols == set(sympy.symbols("E I Q"))


def test_subs_zero_rejects_vanishing_denominator():
    field = CoefficientField(("t",))
    with pytest.raises(SubstitutionError, match="vanishes"):
        field.subs_zero(field("1/t"), "t")


def test_convert_with_rename():
    source = CoefficientField(("t1", "N"))
    target = CoefficientField(("t", "N"))
    c = source("t1^2 + N")
    assert target.convert_from(c, source, {"t1": "t"}) == target("t^2 + N")
    with pytest.raises(SubstitutionError, match="no counterpart"):
        CoefficientField(("N",)).convert_from(c, source)


def test_normalize_coefficients():
    field = CoefficientField(("t",))
    out = field.normalize_coefficients([field("-t/2"), field("t^2/3")])
    assert out == [field("3"), field("-2*t")]
    kept = field.normalize_coefficients([field("-t/2"), field("t^2/3")], full=False)
    assert kept == [field("3*t"), field("-2*t^2")]


def test_series_precision():
    s = TSeries((1, 1, QQ(1, 2)), precision=3)
    assert s[2] == QQ(1, 2)
    assert s[-1] == 0
    with pytest.raises(IndexError, match="beyond the known precision"):
        s[3]
    assert s.truncate(2).precision == 2
    assert s.to_text() == "1 + t + (1/2)*t^2 + O(t^3)"

    exact = TSeries((0, 0, 5))
    assert exact[10] == 0
    assert exact.valuation() == 2
    assert exact.known == 3
