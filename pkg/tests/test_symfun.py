import pytest
import sympy

from scalarprod.symfun import (
    ClosedForm,
    Partition,
    ann_exp,
    ann_reciprocal,
    build_kregular,
    build_ktableaux,
    build_multigraph,
    build_schur_sum,
    e_in_p,
    h_in_p,
    hammond_series,
    kregular_series,
    ktableaux_series,
    multigraph_series,
    operator_from_expr,
    p_in_h,
    partitions,
    plethysm_scale,
    schur_sum_factor,
    zee,
)
from scalarprod.weyl import AlgebraSignature, act_on_expr

p1, p2, p3, p6, t, N = sympy.symbols("p1 p2 p3 p6 t N")


def test_partitions():
    assert [lam.parts for lam in partitions(4)] == [(4,), (3, 1), (2, 2), (2, 1, 1), (1, 1, 1, 1)]
    assert partitions(0) == [Partition(())]
    assert len(partitions(10)) == 42
    with pytest.raises(ValueError, match="negative"):
        partitions(-1)
    with pytest.raises(ValueError, match="must be positive"):
        Partition((2, 0))


def test_partition_data():
    lam = Partition.from_multiplicities({1: 2, 2: 1})
    assert lam.parts == (2, 1, 1)
    assert lam.size == 4
    assert lam.length == 3
    assert lam.power_sum() == p2 * p1**2
    assert zee(lam) == 4
    assert zee(Partition((3, 3))) == 18


def test_bases():
    assert h_in_p(2) == p1**2 / 2 + p2 / 2
    assert e_in_p(2) == p1**2 / 2 - p2 / 2
    assert h_in_p(0) == 1
    h1, h2, h3 = sympy.symbols("h1 h2 h3")
    assert p_in_h(3) == 3 * h3 - 3 * h1 * h2 + h1**3
    back = p_in_h(3).subs({h1: h_in_p(1), h2: h_in_p(2), h3: h_in_p(3)})
    assert sympy.expand(back) == p3


def test_plethysm_scale():
    assert plethysm_scale(p1**2 + p3, 2) == p2**2 + p6
    with pytest.raises(ValueError, match="positive index"):
        plethysm_scale(p1, 0)


def test_closed_form_inference():
    form = ClosedForm.exp("p1^2/2 + t*p2 + N")
    assert form.p_vars == ("p1", "p2")
    assert form.t_vars == ("t",)
    assert form.params == ("N",)
    assert form.signature.letters == ("p1", "p2", "dp1", "dp2", "dt")
    assert form.to_text().startswith("exp: ")
    with pytest.raises(ValueError):
        ClosedForm("log", p1)


def test_annihilators(op):
    sig = AlgebraSignature(p_vars=("p1",))
    assert ann_exp(p1**2 / 2, sig) == [op("dp1 - p1", sig)]
    assert ann_reciprocal(1 - p1, sig) == [op("p1*dp1 - dp1 + 1", sig)]
    with pytest.raises(ValueError, match="vanishes at the origin"):
        ann_reciprocal(p1 + t)
    with pytest.raises(ValueError, match="unknown to"):
        ann_exp(p1 * N, sig)


def test_unused_variables_get_a_bare_derivative(op):
    form = ClosedForm.exp(p1**2 / 2, ("p1", "p2"))
    sig = form.signature
    assert form.annihilator() == [op("dp1 - p1", sig), op("dp2", sig)]


def test_operator_from_expr():
    sig = AlgebraSignature(p_vars=("p1", "p2"), t_vars=("t",), blocks=("dt",))
    u = operator_from_expr(t * p1**2 + p2 / 3 + t, sig)
    assert u.coefficient(sig.monomial({"p1": 2})) == sig.field("t")
    assert u.coefficient(sig.one) == sig.field("t")


@pytest.mark.parametrize("builder", [kregular_series, ktableaux_series, multigraph_series])
@pytest.mark.parametrize("k", [1, 2])
def test_generators_annihilate_their_closed_forms(builder, k):
    for form in builder(k):
        function = sympy.exp(form.expr) if form.kind == "exp" else 1 / form.expr
        for u in form.annihilator():
            assert sympy.simplify(act_on_expr(u, function) / function) == 0


def test_builtin_families():
    f, g = kregular_series(1)
    assert f.expr == p1**2 / 2
    assert g.expr == t * p1
    f, g = kregular_series(2)
    assert f.expr == p1**2 / 2 - p2 / 2 - p2**2 / 4
    f, g = ktableaux_series(1)
    assert f.expr == p1**2 / 2 + p1
    assert g.kind == "recip"
    assert g.expr == 1 - t * p1
    assert len(build_kregular(3)[0]) == 3
    assert len(build_multigraph(2)[0]) == 2
    assert len(build_ktableaux(2)[0]) == 2
    assert build_schur_sum(2) == p1**2 / 2 + p1 + p2**2 / 4
    with pytest.raises(ValueError, match="positive integer"):
        kregular_series(0)


def test_hammond_series():
    t1, t2 = sympy.symbols("t1 t2")
    form = hammond_series(2)
    assert form.t_vars == ("t1", "t2")
    assert form.expr == sympy.expand(t1 * p1 + t2 * (p1**2 + p2) / 2)


def test_schur_sum_factors():
    even = schur_sum_factor("even")
    odd = schur_sum_factor("odd", "M")
    assert even.expr == p1**2 / (2 * N)
    assert odd.params == ("M",)
    assert odd.p_vars == ("p1",)
    with pytest.raises(ValueError, match="parity"):
        schur_sum_factor("both")  # type: ignore
