from __future__ import annotations

import logging
import re
from typing import List, Optional, Sequence, Tuple

import attrs
import sympy

from scalarprod.adjunction import Adjunction
from scalarprod.errors import ParseError
from scalarprod.parsing import parse_operator, parse_polynomial
from scalarprod.symfun import (
    ClosedForm,
    h_in_p,
    kregular_series,
    ktableaux_series,
    schur_sum_factor,
)
from scalarprod.utils import Normalization, to_names, variable_index
from scalarprod.weyl import AlgebraSignature, WeylOperator

__all__: Tuple[str, ...] = (
    "InputSystem",
    "Problem",
    "read_input",
    "hammond_shape",
    "build_problems",
    "parse_adjunction",
)
_log = logging.getLogger(__name__)

_IDENT = re.compile(r"[A-Za-z_][A-Za-z0-9_]*")
_P_LETTER = re.compile(r"^d?(p\d+)$")
_T_LETTER = re.compile(r"^d?(t\d*)$")
_CLOSED_FORM = re.compile(r"^(exp|recip)\s*:(.*)$")


@attrs.define(slots=True, frozen=True)
class InputSystem:
    """An annihilating system, with the closed form it came from when there is one.

    Attributes
    ----------
    operators: Tuple[:class:`WeylOperator`, ...]
        Generators of the annihilator.
    closed_form: Optional[:class:`ClosedForm`]
        ``exp(Q)`` or ``1/u``; the oracle needs it to verify results.
    source: :class:`str`
        Where the system was read from, for messages.
    """

    operators: Tuple[WeylOperator, ...] = attrs.field(converter=tuple)
    closed_form: Optional[ClosedForm] = None
    source: str = "<input>"

    @classmethod
    def from_closed_form(cls, form: ClosedForm, source: str = "<input>") -> InputSystem:
        return cls(form.annihilator(), form, source)

    @property
    def involves_t(self) -> bool:
        return any(op.signature.t_vars for op in self.operators)


def _signature_of(lines: Sequence[str], params: Sequence[str]) -> AlgebraSignature:
    p_vars, t_vars, found = set(), set(), list(params)
    for line in lines:
        for name in _IDENT.findall(line):
            if m := _P_LETTER.match(name):
                p_vars.add(m.group(1))
            elif m := _T_LETTER.match(name):
                t_vars.add(m.group(1))
            elif name not in found:
                found.append(name)
    return AlgebraSignature(
        p_vars=sorted(p_vars, key=variable_index),
        t_vars=sorted(t_vars),
        blocks=("dt",) if t_vars else (),
        params=found,
    )


def read_input(text: str, params: Sequence[str] = (), source: str = "<input>") -> InputSystem:
    """Read an input file: one ``exp: Q`` or ``recip: u`` line, or operator lines.

    ``#`` starts a comment. Letters ``p<i>``, ``dp<i>``, ``t``, ``dt`` are the
    algebra's; every other name is a formal parameter.
    """
    forms: List[Tuple[int, str, str]] = []
    lines: List[str] = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if m := _CLOSED_FORM.match(line):
            forms.append((lineno, m.group(1), m.group(2).strip()))
        else:
            lines.append(line)

    if forms and lines:
        raise ParseError(f"{source}: a closed form cannot be mixed with operator lines")
    if len(forms) > 1:
        raise ParseError(f"{source}: line {forms[1][0]}: only one closed form per file")
    if forms:
        lineno, kind, body = forms[0]
        try:
            expr = parse_polynomial(body)
        except ParseError as e:
            raise ParseError(f"{source}: line {lineno}: {e}", e.position) from e
        declared = list(to_names(params))
        found = [str(s) for s in expr.free_symbols]
        extra = [s for s in found if not _P_LETTER.match(s) and not _T_LETTER.match(s)]
        factory = ClosedForm.exp if kind == "exp" else ClosedForm.recip
        form = factory(expr, None, params=declared + sorted(s for s in extra if s not in declared))
        return InputSystem.from_closed_form(form, source)

    if not lines:
        raise ParseError(f"{source}: no operators found")
    signature = _signature_of(lines, to_names(params))
    ops = []
    for line in lines:
        try:
            ops.append(parse_operator(line, signature))
        except ParseError as e:
            raise ParseError(f"{source}: {line!r}: {e}", e.position) from e
    _log.debug("read %d operators over %s from %s", len(ops), signature.describe(), source)
    return InputSystem(ops, None, source)


def hammond_shape(form: Optional[ClosedForm]) -> Optional[int]:
    """``k`` when ``form`` is ``exp(t h_k)``, else ``None``."""
    if form is None or form.kind != "exp" or form.t_vars != ("t",) or not form.p_vars:
        return None
    k = max(variable_index(p) for p in form.p_vars)
    if sympy.expand(form.expr - sympy.Symbol("t") * h_in_p(k)) == 0:
        return k
    return None


@attrs.define(slots=True, frozen=True)
class Problem:
    """One pairing (or Kronecker product) to solve.

    Attributes
    ----------
    name: :class:`str`
        Printed in reports.
    f: :class:`InputSystem`
        The left factor.
    g: :class:`InputSystem`
        The right factor.
    adj: :class:`Adjunction`
        Weights of the pairing.
    kronecker: :class:`bool`
        Whether ``F * G`` is wanted rather than ``<F, G>``.
    normalization: :class:`Normalization`
        How the coefficients of the pairing relate to counts.
    hammond_k: Optional[:class:`int`]
        Set when G is ``exp(t h_k)`` or a series whose Hammond form is wanted.
    """

    name: str
    f: InputSystem
    g: InputSystem
    adj: Adjunction = attrs.field(factory=Adjunction)
    kronecker: bool = False
    normalization: Normalization = Normalization.ogf
    hammond_k: Optional[int] = None

    @property
    def t_weight(self) -> int:
        """p-weight carried by each power of t on the G side."""
        if self.hammond_k is not None:
            return self.hammond_k
        form = self.g.closed_form
        if form is None or not form.p_vars:
            return 1
        return max(variable_index(p) for p in form.p_vars)

    def hammond_g(self) -> ClosedForm:
        """``exp(t h_k)``, the right factor the Hammond shortcut pairs with."""
        if self.hammond_k is None:
            raise ValueError(f"{self.name} has no Hammond form")
        k = self.hammond_k
        return ClosedForm.exp(
            sympy.expand(sympy.Symbol("t") * h_in_p(k)), tuple(f"p{i}" for i in range(1, k + 1))
        )


def parse_adjunction(text: Optional[str], p_vars: Sequence[str] = ()) -> Adjunction:
    """``symmetric``, ``uniform:W`` or ``hall:q`` (``None`` is symmetric)."""
    if text is None or text == "symmetric":
        return Adjunction()
    kind, _, arg = text.partition(":")
    if kind == "uniform" and arg:
        return Adjunction.uniform(p_vars, parse_polynomial(arg))
    if kind == "hall":
        return Adjunction.hall(p_vars, arg or "q")
    raise ValueError(f"unknown adjunction {text!r}; expected symmetric, uniform:W or hall:q")


def _parse_k(name: str, arg: str) -> int:
    try:
        k = int(arg)
    except ValueError:
        raise ValueError(f"{name} needs an integer, got {arg!r}") from None
    if k < 1:
        raise ValueError(f"{name} needs a positive integer, got {k}")
    return k


def _p_vars(*systems: InputSystem) -> List[str]:
    names = {p for s in systems for op in s.operators for p in op.signature.p_vars}
    return sorted(names, key=variable_index)


def build_problems(
    spec: str,
    f: Optional[InputSystem] = None,
    g: Optional[InputSystem] = None,
    adjunction: Optional[str] = None,
    param: str = "N",
) -> List[Problem]:
    """The problems named by ``spec``.

    ``kregular:K`` and ``ktableaux:K`` are built in, ``schur-sum`` gives the
    even and odd factors of ``(sum s_λ) * (sum s_λ)`` for a formal index
    ``param``; ``scalar-product`` and ``kronecker`` take their factors from
    ``f`` and ``g``.
    """
    name, _, arg = spec.partition(":")
    if name in ("kregular", "ktableaux"):
        k = _parse_k(name, arg)
        builder = kregular_series if name == "kregular" else ktableaux_series
        f_form, g_form = builder(k)
        return [
            Problem(
                spec,
                InputSystem.from_closed_form(f_form, name),
                InputSystem.from_closed_form(g_form, name),
                parse_adjunction(adjunction, f_form.p_vars),
                normalization=Normalization.egf if name == "kregular" else Normalization.ogf,
                hammond_k=k,
            )
        ]
    if name == "schur-sum":
        out = []
        for parity in ("even", "odd"):
            form = schur_sum_factor(parity, param)
            system = InputSystem.from_closed_form(form, f"schur-sum:{parity}")
            adj = Adjunction.uniform(["p1"], sympy.Symbol(param))
            out.append(Problem(f"schur-sum:{parity}", system, system, adj, kronecker=True))
        return out
    if name in ("scalar-product", "kronecker"):
        if f is None or g is None:
            raise ValueError(f"{name} needs both --f and --g")
        adj = parse_adjunction(adjunction, _p_vars(f, g))
        if name == "kronecker":
            return [Problem(name, f, g, adj, kronecker=True)]
        k = hammond_shape(g.closed_form)
        normalization = Normalization.egf if k is not None else Normalization.ogf
        return [Problem(name, f, g, adj, normalization=normalization, hammond_k=k)]
    raise ValueError(
        f"unknown problem {spec!r}; expected kregular:K, ktableaux:K, schur-sum, "
        "scalar-product or kronecker"
    )
