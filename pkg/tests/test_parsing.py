import re

import pytest
import sympy

from scalarprod.errors import ParseError
from scalarprod.parsing import format_operator, parse_operator, parse_polynomial
from scalarprod.weyl import AlgebraSignature


def test_factors_multiply_in_written_order(op, p2_signature):
    assert op("dp1 p1", p2_signature) == op("p1*dp1 + 1", p2_signature)
    assert op("p1 dp1", p2_signature) != op("dp1 p1", p2_signature)


def test_equation_is_moved_to_one_side(op, t_signature):
    assert op("t*dt = t^2", t_signature) == op("t*dt - t^2", t_signature)


def test_unary_minus_binds_looser_than_power(p2_signature):
    assert parse_operator("-p1^2", p2_signature) == -parse_operator("p1*p1", p2_signature)
    assert parse_operator("2**3", p2_signature) == parse_operator("8", p2_signature)


def test_division_by_coefficients(t_signature):
    u = parse_operator("dt/(1 - t)", t_signature)
    assert u.coefficient(t_signature.monomial({"dt": 1})) == t_signature.field("1/(1 - t)")
    assert format_operator(u) == u.to_text()
    with pytest.raises(ParseError, match="only division by coefficients"):
        parse_operator("1/dt", t_signature)
    with pytest.raises(ParseError, match="division by zero"):
        parse_operator("dt/0", t_signature)


@pytest.mark.parametrize(
    ("text", "message", "position"),
    [
        ("p1 + $", "unexpected character", 5),
        ("p1 + q1", "unknown letter 'q1'", 5),
        ("(p1 + dp1", "expected ')'", 9),
        ("p1^dp1", "nonnegative integer literals", 3),
        ("", "empty expression", 0),
        ("p1 +", "unexpected end of input", 4),
        ("exp(p1)", "not allowed here", 0),
    ],
)
def test_errors_carry_positions(p2_signature, text, message, position):
    with pytest.raises(ParseError, match=re.escape(message)) as excinfo:
        parse_operator(text, p2_signature)
    assert excinfo.value.position == position


def test_parse_polynomial():
    p1, p2 = sympy.symbols("p1 p2")
    assert parse_polynomial("(p1 + p2)^2/2") == sympy.expand((p1 + p2) ** 2 / 2)
    assert parse_polynomial("2 p1 p2") == 2 * p1 * p2
    with pytest.raises(ParseError, match="unknown symbol 'q'"):
        parse_polynomial("p1 + q", allowed=("p1",))


def test_parameters_are_coefficients():
    sig = AlgebraSignature(p_vars=("p1",), params="N")
    u = parse_operator("N*dp1 - p1/N", sig)
    assert u.coefficient(sig.monomial({"dp1": 1})) == sig.field("N")
