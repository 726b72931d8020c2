import pytest
import sympy

from scalarprod.arith import QQ
from scalarprod.errors import BFileError, InconclusiveGrowth, ParseError, SingularRecurrence
from scalarprod.sequences import (
    Growth,
    Recurrence,
    SequenceWindow,
    growth_exponent,
    hadamard_rescale,
    ode_to_rec,
    read_bfile,
    required_initial_indices,
    unroll,
    write_bfile,
)
from scalarprod.utils import Normalization
from scalarprod.weyl import AlgebraSignature

TWO_REGULAR = "2*(n+3)*a(n+3) - 2*(n+2)*a(n+2) - a(n) = 0"
THREE_REGULAR_ODE = (
    "-9*t^3*(t^4 + 2*t^2 - 2)*dt^2 - 3*(t^10 + 6*t^8 + 3*t^6 - 6*t^4 - 26*t^2 + 8)*dt"
    " + t^3*(t^4 + 2*t^2 - 2)^2"
)


@pytest.fixture
def two_regular() -> Recurrence:
    return Recurrence.from_text(TWO_REGULAR)


def test_ode_to_rec(op, t_signature, two_regular):
    rec = ode_to_rec(op("2*(1 - t)*dt - t^2", t_signature))
    assert rec == two_regular
    assert rec.order == 3
    assert rec.to_text() == "(2*n + 6)*a(n+3) + (-2*n - 4)*a(n+2) - a(n) = 0"


def test_ode_to_rec_clears_denominators(op, t_signature):
    rec = ode_to_rec(op("dt - t/(1 - t)", t_signature))
    assert rec == ode_to_rec(op("(1 - t)*dt - t", t_signature))
    assert ode_to_rec(op("dt - 1", t_signature)) == Recurrence.from_text("(n+1)*a(n+1) = a(n)")


def test_ode_to_rec_rejects_other_algebras(op):
    sig = AlgebraSignature(t_vars=("t",), blocks=("dt",), params="N")
    with pytest.raises(ValueError, match="one t-variable over QQ"):
        ode_to_rec(op("N*dt - 1", sig))
    with pytest.raises(ValueError, match="zero operator"):
        ode_to_rec(op("0", AlgebraSignature(t_vars=("t",), blocks=("dt",))))


def test_unroll_two_regular_graphs(two_regular):
    assert required_initial_indices(two_regular) == (0, 1, 2)
    window = unroll(two_regular, SequenceWindow(0, [1, 0, 0], Normalization.egf), 9)
    assert window.counts()[:7] == (1, 0, 0, 1, 3, 12, 70)
    assert window.normalization is Normalization.egf
    assert two_regular.satisfied_by(window)
    assert write_bfile(window).splitlines()[:4] == ["0 1", "1 0", "2 0", "3 1"]


def test_unroll_needs_singular_indices():
    rec = Recurrence.from_text("n*a(n+1) - a(n) = 0")
    assert required_initial_indices(rec) == (0, 1)
    with pytest.raises(SingularRecurrence, match=r"\[1\]") as excinfo:
        unroll(rec, SequenceWindow(0, [1]), 4)
    assert excinfo.value.missing == (1,)
    assert unroll(rec, SequenceWindow(0, [1, 5]), 3).values == (1, 5, 5, QQ(5, 2))
    with pytest.raises(ValueError, match="start at index 0"):
        unroll(rec, SequenceWindow(1, [1, 5]), 3)


def test_low_index_equations_fix_early_terms(op, t_signature):
    rec = ode_to_rec(op("dt - t", t_signature))
    assert rec.start == -1
    assert required_initial_indices(rec) == (0,)
    assert unroll(rec, SequenceWindow(0, [1]), 5).values == (1, 0, QQ(1, 2), 0, QQ(1, 8), 0)
    assert rec.shift(1).start == -2

    graphs = ode_to_rec(op("2*(1 - t)*dt - t^2", t_signature))
    assert graphs.start == -2
    assert required_initial_indices(graphs) == (0,)
    window = unroll(graphs, SequenceWindow(0, [1], Normalization.egf), 6)
    assert window.counts() == (1, 0, 0, 1, 3, 12, 70)


def test_cubic_graphs_from_their_equation(op, t_signature, cubic_graph_counts, unrolled_counts):
    rec = ode_to_rec(op(THREE_REGULAR_ODE, t_signature))
    assert required_initial_indices(rec) == (0,)
    assert unrolled_counts(rec, cubic_graph_counts, Normalization.egf) == tuple(cubic_graph_counts)


def test_involutions(tableaux_counts, unrolled_counts):
    rec = Recurrence.from_text("a(n+2) = a(n+1) + (n+1)*a(n)")
    assert unrolled_counts(rec, tableaux_counts[1], Normalization.ogf) == tuple(tableaux_counts[1])


def test_recurrence_text():
    rec = Recurrence.from_text("a(n+2) = a(n+1) + a(n)")
    assert rec.to_text() == "a(n+2) - a(n+1) - a(n) = 0"
    assert Recurrence.from_text("a(n) = (n-1)*a(n-1)/2") == Recurrence.from_text(
        "2*a(n+1) - n*a(n) = 0"
    )
    assert str(rec.shift(1)) == str(rec)


@pytest.mark.parametrize(
    ("text", "message"),
    [
        ("a(n) + 1 = 0", "inhomogeneous"),
        ("a(n)*a(n+1) = 0", "not linear"),
        ("a(2*n) = 0", "a\\(n\\+j\\)"),
        ("b(n) = 0", "unknown sequence"),
        ("a(n)/n = 0", "nonzero numbers"),
        ("a(n)^2 = 0", "powers"),
        ("m*a(n) = 0", "unknown symbol"),
    ],
)
def test_recurrence_errors(text, message):
    with pytest.raises(ParseError, match=message):
        Recurrence.from_text(text)


def test_recurrence_payload(two_regular):
    payload = two_regular.to_dict()
    assert payload["order"] == 3
    assert payload["coefficients"] == ["-1", "0", "-2*n - 4", "2*n + 6"]
    assert Recurrence.from_data(payload) == two_regular
    with pytest.raises(ValueError, match="nonzero coefficient"):
        Recurrence([0, 0])


def test_hadamard_with_factorials():
    rec = Recurrence.from_text("(n+1)*a(n+1) - a(n) = 0")
    assert hadamard_rescale(rec, 1, 1) == Recurrence.from_text("(n+1)^2*a(n+1) - a(n) = 0")
    assert hadamard_rescale(rec, -1, 1) == Recurrence.from_text("a(n+1) - a(n) = 0")
    with pytest.raises(ValueError, match="positive integer"):
        hadamard_rescale(rec, 1, 0)


def test_hadamard_with_step_two():
    rec = Recurrence.from_text("a(n+1) - 2*a(n) = 0")
    rescaled = hadamard_rescale(rec, 1, 2)
    values = unroll(rec, SequenceWindow(0, [1]), 8).values
    # v(n) = 1/(n(n-2)(n-4)...)
    v = [QQ(1)] * 9
    for n in range(2, 9):
        v[n] = v[n - 2] / n
    window = SequenceWindow(0, [a * b for a, b in zip(values, v)])
    assert rescaled.satisfied_by(window)


@pytest.mark.parametrize(
    ("text", "exponent", "step", "ratio"),
    [
        ("(n+1)*a(n+1) = a(n)", -1, 1, 1),
        ("a(n+1) = 2*a(n)", 0, 1, 2),
        ("(n+2)*a(n+2) = a(n)", sympy.Rational(-1, 2), 2, 1),
        (TWO_REGULAR, 0, 1, 1),
    ],
)
def test_growth(text, exponent, step, ratio):
    growth = growth_exponent(Recurrence.from_text(text))
    assert growth == Growth(exponent, step, ratio)


def test_tableaux_grow_like_a_square_root_of_factorials(three_uniform_tableaux):
    growth = growth_exponent(three_uniform_tableaux)
    assert growth == Growth(sympy.Rational(1, 2), 2, QQ(3, 4))
    assert growth.to_text() == "n!^(1/2) * (3/4)^(n/2)"


def test_growth_text():
    assert Growth(sympy.Rational(1, 2), 2, QQ(3, 4)).to_text() == "n!^(1/2) * (3/4)^(n/2)"
    assert Growth(-1, 1, 1).to_dict() == {
        "exponent": "-1",
        "text": "n!^(-1) * (1)^n",
        "step": 1,
        "ratio_power": "1",
    }


def test_growth_failures():
    with pytest.raises(InconclusiveGrowth) as excinfo:
        growth_exponent(Recurrence.from_text("a(n+2) = a(n+1) + a(n)"))
    assert len(excinfo.value.edge) == 3
    with pytest.raises(ValueError, match="two nonzero coefficients"):
        growth_exponent(Recurrence.from_text("a(n+2) = 0"))


def test_windows():
    window = SequenceWindow(2, [QQ(1, 2), QQ(1, 6)], Normalization.egf)
    assert window.end == 3
    assert window[3] == QQ(1, 6)
    assert window.counts() == (1, 1)
    assert window.with_counts().normalization is Normalization.ogf
    assert window.to_dict() == {
        "start": 2,
        "normalization": "EGF",
        "values": ["1/2", "1/6"],
        "counts": ["1", "1"],
    }
    with pytest.raises(IndexError, match="outside the window"):
        window[4]


def test_read_bfile():
    window = read_bfile("# involutions\n0 1\n1 1\n\n2 2  # comment\n3 4\n")
    assert window.start == 0
    assert window.values == (1, 1, 2, 4)
    assert write_bfile(window) == "0 1\n1 1\n2 2\n3 4\n"


@pytest.mark.parametrize(
    ("text", "message"),
    [
        ("", "no terms"),
        ("0 1 2\n", "expected 'n value'"),
        ("0 x\n", "not an integer pair"),
        ("0 1\n2 1\n", "does not follow"),
    ],
)
def test_bad_bfiles(text, message):
    with pytest.raises(BFileError, match=message):
        read_bfile(text)
