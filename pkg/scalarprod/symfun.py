from __future__ import annotations

import functools
import logging
import re
from typing import Dict, Iterable, List, Literal, Optional, Sequence, Tuple

import attrs
import sympy
from sympy.utilities.iterables import partitions as _partition_dicts
from typing_extensions import TypeAlias

from scalarprod.arith import rational
from scalarprod.utils import to_expr, to_names, variable_index
from scalarprod.weyl import AlgebraSignature, WeylOperator, op_mul

__all__: Tuple[str, ...] = (
    "SymPoly",
    "Partition",
    "ClosedForm",
    "zee",
    "partitions",
    "h_in_p",
    "e_in_p",
    "p_in_h",
    "plethysm_scale",
    "operator_from_expr",
    "ann_exp",
    "ann_reciprocal",
    "kregular_series",
    "ktableaux_series",
    "multigraph_series",
    "hammond_series",
    "build_kregular",
    "build_ktableaux",
    "build_multigraph",
    "build_schur_sum",
    "schur_sum_factor",
)
_log = logging.getLogger(__name__)

SymPoly: TypeAlias = sympy.Expr

_P_NAME = re.compile(r"^p\d+$")
_T_NAME = re.compile(r"^t\d*$")


def _to_parts(_v: Iterable[int]) -> Tuple[int, ...]:
    parts = tuple(sorted((int(x) for x in _v), reverse=True))
    if any(x <= 0 for x in parts):
        raise ValueError(f"partition parts must be positive, got {parts}")
    return parts


@attrs.define(slots=True, frozen=True)
class Partition:
    """An integer partition, parts weakly decreasing."""

    parts: Tuple[int, ...] = attrs.field(converter=_to_parts)

    @classmethod
    def from_multiplicities(cls, multiplicities: Dict[int, int]) -> Partition:
        return cls([part for part, r in multiplicities.items() for _ in range(r)])

    @property
    def size(self) -> int:
        return sum(self.parts)

    @property
    def length(self) -> int:
        return len(self.parts)

    @property
    def multiplicities(self) -> Dict[int, int]:
        out: Dict[int, int] = {}
        for part in self.parts:
            out[part] = out.get(part, 0) + 1
        return out

    def power_sum(self) -> SymPoly:
        """``p_λ = p_λ1 p_λ2 ...``."""
        return sympy.Mul(*(sympy.Symbol(f"p{part}") for part in self.parts))

    def __iter__(self):  # type: ignore
        return iter(self.parts)

    def __len__(self) -> int:
        return len(self.parts)


def zee(partition: Partition) -> object:
    """``z_λ = prod_i i^{r_i} r_i!``, the squared norm of ``p_λ``."""
    value = 1
    for part, r in partition.multiplicities.items():
        value *= part**r * sympy.factorial(r)
    return rational(value)


@functools.lru_cache(maxsize=64)
def _partitions(k: int) -> Tuple[Partition, ...]:
    return tuple(Partition.from_multiplicities(dict(p)) for p in _partition_dicts(k))


def partitions(k: int) -> List[Partition]:
    """All partitions of ``k``, largest first part first."""
    if k < 0:
        raise ValueError(f"cannot partition a negative integer ({k})")
    if k == 0:
        return [Partition(())]
    return list(_partitions(k))


def _signed_partition_sum(k: int, alternating: bool) -> SymPoly:
    if k < 0:
        raise ValueError(f"expected a nonnegative degree, got {k}")
    total = sympy.Integer(0)
    for lam in partitions(k):
        sign = (-1) ** (k - lam.length) if alternating else 1
        total += sign * lam.power_sum() / int(zee(lam))
    return sympy.expand(total)


def h_in_p(k: int) -> SymPoly:
    """The complete homogeneous function ``h_k`` in the power sums."""
    return _signed_partition_sum(k, alternating=False)


def e_in_p(k: int) -> SymPoly:
    """The elementary function ``e_k`` in the power sums."""
    return _signed_partition_sum(k, alternating=True)


@functools.lru_cache(maxsize=32)
def p_in_h(k: int) -> SymPoly:
    """``p_k`` as a polynomial in ``h1, ..., hk`` (Newton's identities)."""
    if k < 1:
        raise ValueError(f"expected a positive index, got {k}")
    h = [sympy.Integer(1)] + [sympy.Symbol(f"h{i}") for i in range(1, k + 1)]
    value = k * h[k]
    for i in range(1, k):
        value -= p_in_h(i) * h[k - i]
    return sympy.expand(value)


def plethysm_scale(f: SymPoly, n: int) -> SymPoly:
    """``f[p_n]``: every ``p_i`` becomes ``p_{i n}``."""
    if n < 1:
        raise ValueError(f"expected a positive index, got {n}")
    f = to_expr(f)
    mapping = {
        s: sympy.Symbol(f"p{variable_index(s.name) * n}")
        for s in f.free_symbols
        if _P_NAME.match(s.name)
    }
    return f.xreplace(mapping)


def _split_symbols(
    expr: SymPoly,
) -> Tuple[Tuple[str, ...], Tuple[str, ...], Tuple[str, ...]]:
    p_vars, t_vars, params = [], [], []
    for s in expr.free_symbols:
        name = str(s)
        if _P_NAME.match(name):
            p_vars.append(name)
        elif _T_NAME.match(name):
            t_vars.append(name)
        else:
            params.append(name)
    return (
        tuple(sorted(p_vars, key=variable_index)),
        tuple(sorted(t_vars)),
        tuple(sorted(params)),
    )


def operator_from_expr(expr: SymPoly, signature: AlgebraSignature) -> WeylOperator:
    """A polynomial in the p-variables (coefficients in t and the parameters) as an operator."""
    expr = sympy.expand(to_expr(expr))
    if expr == 0:
        return WeylOperator.zero(signature)
    gens = [sympy.Symbol(p) for p in signature.p_vars]
    if not gens:
        return WeylOperator.constant(signature, expr)
    poly = sympy.Poly(expr, *gens)
    field = signature.field
    terms = []
    for exps, coeff in poly.terms():
        m = [0] * signature.width
        m[: len(exps)] = exps
        terms.append((tuple(m), field(coeff)))
    return WeylOperator.from_terms(signature, terms)


@attrs.define(slots=True, frozen=True)
class ClosedForm:
    """A generating function given as ``exp(Q)`` or ``1/u`` for a polynomial.

    Attributes
    ----------
    kind: Literal["exp", "recip"]
        Which closed form ``expr`` describes.
    expr: :class:`SymPoly`
        The exponent ``Q`` or the denominator ``u``.
    p_vars: Tuple[:class:`str`, ...]
        The power sums of the annihilator's algebra. Variables ``expr`` does not
        involve get the generator ``dp``.
    t_vars: Tuple[:class:`str`, ...]
        Variables of the coefficient field with a ``dt`` partner.
    params: Tuple[:class:`str`, ...]
        Formal parameters.
    """

    kind: Literal["exp", "recip"] = attrs.field(validator=attrs.validators.in_(("exp", "recip")))
    expr: SymPoly = attrs.field(converter=to_expr)
    p_vars: Tuple[str, ...] = attrs.field(factory=tuple, converter=to_names)
    t_vars: Tuple[str, ...] = attrs.field(factory=tuple, converter=to_names)
    params: Tuple[str, ...] = attrs.field(factory=tuple, converter=to_names)

    @classmethod
    def exp(
        cls, expr: SymPoly, p_vars: Optional[Sequence[str]] = None, **kwargs: Sequence[str]
    ) -> ClosedForm:
        return cls._infer("exp", to_expr(expr), p_vars, **kwargs)

    @classmethod
    def recip(
        cls, expr: SymPoly, p_vars: Optional[Sequence[str]] = None, **kwargs: Sequence[str]
    ) -> ClosedForm:
        return cls._infer("recip", to_expr(expr), p_vars, **kwargs)

    @classmethod
    def _infer(
        cls,
        kind: Literal["exp", "recip"],
        expr: SymPoly,
        p_vars: Optional[Sequence[str]],
        t_vars: Optional[Sequence[str]] = None,
        params: Optional[Sequence[str]] = None,
    ) -> ClosedForm:
        found_p, found_t, found_params = _split_symbols(expr)
        return cls(
            kind,
            expr,
            found_p if p_vars is None else p_vars,
            found_t if t_vars is None else t_vars,
            found_params if params is None else params,
        )

    @property
    def signature(self) -> AlgebraSignature:
        return AlgebraSignature(
            p_vars=self.p_vars,
            t_vars=self.t_vars,
            blocks=("dt",) if self.t_vars else (),
            params=self.params,
        )

    @property
    def involves_t(self) -> bool:
        return bool(self.t_vars)

    def annihilator(self) -> List[WeylOperator]:
        if self.kind == "exp":
            return ann_exp(self.expr, self.signature)
        return ann_reciprocal(self.expr, self.signature)

    def to_text(self) -> str:
        return f"{self.kind}: {sympy.sstr(self.expr)}"


def _variables(signature: AlgebraSignature) -> List[Tuple[str, str]]:
    pairs = [(p, "d" + p) for p in signature.p_vars]
    pairs += [(t, signature.block_letter("dt", t)) for t in signature.t_vars]
    return pairs


def _check_symbols(expr: SymPoly, signature: AlgebraSignature) -> None:
    known = set(signature.p_vars) | set(signature.t_vars) | set(signature.params)
    extra = {str(s) for s in expr.free_symbols}.difference(known)
    if extra:
        raise ValueError(f"{expr} involves {sorted(extra)}, unknown to {signature.describe()}")


def ann_exp(q: SymPoly, signature: Optional[AlgebraSignature] = None) -> List[WeylOperator]:
    """Generators ``d_v - dQ/dv`` of the annihilator of ``exp(Q)``, one per variable."""
    q = sympy.expand(to_expr(q))
    if signature is None:
        signature = ClosedForm.exp(q).signature
    _check_symbols(q, signature)
    out = []
    for var, letter in _variables(signature):
        derivative = sympy.diff(q, sympy.Symbol(var))
        out.append(
            WeylOperator.letter(signature, letter) - operator_from_expr(derivative, signature)
        )
    return out


def ann_reciprocal(u: SymPoly, signature: Optional[AlgebraSignature] = None) -> List[WeylOperator]:
    """Generators ``u d_v + du/dv`` of the annihilator of ``1/u``."""
    u = sympy.expand(to_expr(u))
    if u.subs({s: 0 for s in u.free_symbols}) == 0:
        raise ValueError(f"{u} vanishes at the origin, 1/({u}) is not a power series")
    if signature is None:
        signature = ClosedForm.recip(u).signature
    _check_symbols(u, signature)
    factor = operator_from_expr(u, signature)
    out = []
    for var, letter in _variables(signature):
        derivative = sympy.diff(u, sympy.Symbol(var))
        op = op_mul(factor, WeylOperator.letter(signature, letter))
        out.append((op + operator_from_expr(derivative, signature)).normalized())
    return out


def _p_names(k: int) -> Tuple[str, ...]:
    return tuple(f"p{i}" for i in range(1, k + 1))


def _truncate_p(expr: SymPoly, k: int) -> SymPoly:
    expr = sympy.expand(expr)
    mapping = {
        s: 0 for s in expr.free_symbols if _P_NAME.match(s.name) and variable_index(s.name) > k
    }
    return sympy.expand(expr.xreplace(mapping))


def _check_k(k: int) -> None:
    if k < 1:
        raise ValueError(f"k must be a positive integer, got {k}")


def kregular_series(k: int) -> Tuple[ClosedForm, ClosedForm]:
    """``F = e[e2]`` truncated to ``p1..pk`` and ``G = exp(t h_k)``."""
    _check_k(k)
    log_f = sympy.Integer(0)
    for i in range(1, k + 1):
        p_i, p_2i = sympy.Symbol(f"p{i}"), sympy.Symbol(f"p{2 * i}")
        log_f += (-1) ** (i - 1) * (p_i**2 - p_2i) / (2 * i)
    t = sympy.Symbol("t")
    return (
        ClosedForm("exp", _truncate_p(log_f, k), _p_names(k)),
        ClosedForm("exp", sympy.expand(t * h_in_p(k)), _p_names(k), ("t",)),
    )


def multigraph_series(k: int) -> Tuple[ClosedForm, ClosedForm]:
    """``M = exp(sum_i (p_i^2 + p_2i)/2i)`` truncated to ``p1..pk``, and ``exp(t h_k)``."""
    _check_k(k)
    log_m = sympy.Integer(0)
    for i in range(1, k + 1):
        p_i, p_2i = sympy.Symbol(f"p{i}"), sympy.Symbol(f"p{2 * i}")
        log_m += (p_i**2 + p_2i) / (2 * i)
    t = sympy.Symbol("t")
    return (
        ClosedForm("exp", _truncate_p(log_m, k), _p_names(k)),
        ClosedForm("exp", sympy.expand(t * h_in_p(k)), _p_names(k), ("t",)),
    )


def build_schur_sum(n: int) -> SymPoly:
    """``log sum_λ s_λ`` truncated to ``p1..pn``."""
    _check_k(n)
    total = sympy.Integer(0)
    for i in range(1, n + 1):
        p = sympy.Symbol(f"p{i}")
        total += p**2 / (2 * i)
        if i % 2:
            total += p / i
    return sympy.expand(total)


def ktableaux_series(k: int) -> Tuple[ClosedForm, ClosedForm]:
    """``F = sum_λ s_λ`` truncated to ``p1..pk`` and ``G = 1/(1 - t h_k)``."""
    _check_k(k)
    t = sympy.Symbol("t")
    return (
        ClosedForm("exp", build_schur_sum(k), _p_names(k)),
        ClosedForm("recip", sympy.expand(1 - t * h_in_p(k)), _p_names(k), ("t",)),
    )


def hammond_series(k: int) -> ClosedForm:
    """``exp(h1 t1 + ... + hk tk)``."""
    _check_k(k)
    total = sympy.Integer(0)
    t_vars = tuple(f"t{j}" for j in range(1, k + 1))
    for j, t in enumerate(t_vars, start=1):
        total += h_in_p(j) * sympy.Symbol(t)
    return ClosedForm("exp", sympy.expand(total), _p_names(k), t_vars)


def build_kregular(k: int) -> Tuple[List[WeylOperator], List[WeylOperator]]:
    f, g = kregular_series(k)
    return f.annihilator(), g.annihilator()


def build_ktableaux(k: int) -> Tuple[List[WeylOperator], List[WeylOperator]]:
    f, g = ktableaux_series(k)
    return f.annihilator(), g.annihilator()


def build_multigraph(k: int) -> Tuple[List[WeylOperator], List[WeylOperator]]:
    f, g = multigraph_series(k)
    return f.annihilator(), g.annihilator()


def schur_sum_factor(parity: Literal["even", "odd"], weight: str = "N") -> ClosedForm:
    """The factor of ``sum_λ s_λ`` in one power sum of formal index ``weight``.

    Even indices give ``exp(p^2/(2N))``, odd ones ``exp((p^2/2 + p)/N)``. The
    variable is called ``p1`` and ``weight`` becomes a formal parameter.
    """
    p, n = sympy.Symbol("p1"), sympy.Symbol(weight)
    if parity == "even":
        q = p**2 / (2 * n)
    elif parity == "odd":
        q = (p**2 / 2 + p) / n
    else:
        raise ValueError(f"parity must be 'even' or 'odd', got {parity!r}")
    return ClosedForm("exp", sympy.expand(q), ("p1",), (), (weight,))
