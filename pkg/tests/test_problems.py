import pytest
import sympy

from scalarprod.adjunction import Adjunction
from scalarprod.errors import ParseError
from scalarprod.problems import (
    InputSystem,
    Problem,
    build_problems,
    hammond_shape,
    parse_adjunction,
    read_input,
)
from scalarprod.symfun import ClosedForm, h_in_p
from scalarprod.utils import Normalization

t, p1, p2 = sympy.symbols("t p1 p2")


def test_read_closed_form():
    system = read_input("# matchings\nexp: t*p1^2/2 + p2  # comment\n", source="g.txt")
    assert system.closed_form is not None
    assert system.closed_form.kind == "exp"
    assert system.closed_form.expr == t * p1**2 / 2 + p2
    assert system.involves_t
    assert system.source == "g.txt"
    assert len(system.operators) == 3


def test_read_closed_form_with_parameters():
    system = read_input("recip: 1 - q*p1", params="q")
    assert system.closed_form.params == ("q",)
    assert not system.involves_t


def test_read_operators(op):
    system = read_input("dp1 - N*p1\n\n(1 - t)*dt - p1\n")
    assert system.closed_form is None
    (first, second) = system.operators
    sig = first.signature
    assert sig.p_vars == ("p1",)
    assert sig.t_vars == ("t",)
    assert sig.params == ("N",)
    assert second == op("(1 - t)*dt - p1", sig)


@pytest.mark.parametrize(
    ("text", "message"),
    [
        ("exp: p1\ndp1 - 1\n", "cannot be mixed"),
        ("exp: p1\nrecip: 1 - p1\n", "line 2: only one closed form"),
        ("# nothing\n", "no operators found"),
        ("exp: p1 +\n", "line 1"),
        ("dp1 - $\n", "'dp1 - \\$'"),
    ],
)
def test_read_errors(text, message):
    with pytest.raises(ParseError, match=message):
        read_input(text, source="f.txt")


def test_hammond_shape():
    assert hammond_shape(ClosedForm.exp(sympy.expand(t * h_in_p(2)))) == 2
    assert hammond_shape(ClosedForm.exp(t * p1)) == 1
    assert hammond_shape(ClosedForm.exp(t * p2)) is None
    assert hammond_shape(ClosedForm.recip(1 - t * p1)) is None
    assert hammond_shape(ClosedForm.exp(p1)) is None
    assert hammond_shape(None) is None


def test_parse_adjunction():
    assert parse_adjunction(None) == Adjunction()
    assert parse_adjunction("symmetric") == Adjunction()
    assert parse_adjunction("uniform:3", ["p1", "p2"]).weight("p2") == 3
    assert parse_adjunction("hall", ["p2"]).weight("p2") == 2 * (1 - sympy.Symbol("q") ** 2)
    with pytest.raises(ValueError, match="unknown adjunction 'uniform'"):
        parse_adjunction("uniform")


def test_builtin_problems():
    (regular,) = build_problems("kregular:2")
    assert regular.name == "kregular:2"
    assert regular.normalization is Normalization.egf
    assert regular.hammond_k == 2
    assert regular.t_weight == 2
    assert regular.hammond_g().expr == sympy.expand(t * h_in_p(2))

    (tableaux,) = build_problems("ktableaux:1")
    assert tableaux.normalization is Normalization.ogf
    assert tableaux.g.closed_form.kind == "recip"


def test_schur_sum_problems():
    even, odd = build_problems("schur-sum", param="M")
    assert (even.name, odd.name) == ("schur-sum:even", "schur-sum:odd")
    assert even.kronecker and odd.kronecker
    assert even.adj.weight("p1") == sympy.Symbol("M")

    default, _ = build_problems("schur-sum")
    assert default.adj.weight("p1") == sympy.Symbol("N")
    assert default.f.closed_form.params == ("N",)
    assert default.f.closed_form.expr == sympy.Symbol("p1") ** 2 / (2 * sympy.Symbol("N"))


def test_user_problems():
    f = read_input("exp: p1^2/2")
    g = read_input("exp: t*p1")
    (pairing,) = build_problems("scalar-product", f, g)
    assert pairing.hammond_k == 1
    assert pairing.normalization is Normalization.egf

    (plain,) = build_problems("scalar-product", f, read_input("recip: 1 - t*p1"))
    assert plain.hammond_k is None
    assert plain.t_weight == 1
    with pytest.raises(ValueError, match="no Hammond form"):
        plain.hammond_g()

    (product,) = build_problems("kronecker", f, f, adjunction="uniform:2")
    assert product.kronecker
    assert product.adj.weight("p1") == 2


@pytest.mark.parametrize(
    ("spec", "message"),
    [
        ("kregular:x", "needs an integer"),
        ("ktableaux:0", "positive integer"),
        ("scalar-product", "needs both --f and --g"),
        ("partitions:3", "unknown problem"),
    ],
)
def test_bad_problems(spec, message):
    with pytest.raises(ValueError, match=message):
        build_problems(spec)


def test_problem_defaults():
    system = InputSystem.from_closed_form(ClosedForm.exp(p1))
    problem = Problem("p", system, system)
    assert problem.adj == Adjunction()
    assert problem.normalization is Normalization.ogf
    assert not problem.kronecker
