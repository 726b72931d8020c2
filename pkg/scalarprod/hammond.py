from __future__ import annotations

import logging
from typing import Any, Dict, Iterable, List, Optional, Sequence, Tuple

import attrs
import sympy

from scalarprod.adjunction import Adjunction
from scalarprod.budget import Budget, Stopwatch
from scalarprod.errors import DegenerateSystem, EliminationFailure, SubstitutionError
from scalarprod.groebner import GroebnerBasis, buchberger, eliminate, is_zero_dimensional
from scalarprod.orders import MonomialOrder
from scalarprod.symfun import ann_exp, hammond_series, p_in_h
from scalarprod.utils import variable_index
from scalarprod.weyl import AlgebraSignature, SpecializeZero, WeylOperator, op_mul

__all__: Tuple[str, ...] = (
    "HammondBasis",
    "build_hk_basis",
    "hammond_rewrite",
    "skew_elim",
    "algorithm2",
)
_log = logging.getLogger(__name__)

F_ORDER = MonomialOrder.degrevlex("dp", "p")
# p and dp above everything, so the substitution pairs are the basis
_VERIFY_ORDER = MonomialOrder.block(("p", "dp"), "dt")


def _t_names(k: int) -> Tuple[str, ...]:
    return tuple(f"t{i}" for i in range(1, k + 1))


@attrs.define(slots=True, frozen=True)
class HammondBasis:
    """The substitutions that turn p-letters into t-letters on ``exp(h1 t1 + ... + hk tk)``.

    On this series ``dp_i`` acts as ``P_i / i`` and ``p_i`` acts as ``i Q_i`` with

    * ``P_i = t_i + sum_{j > i} t_j dt_(j-i)``,
    * ``Q_i = pi_i(dt_1, ..., dt_i) / i``, where ``pi_i`` writes ``p_i`` in the ``h_j``.

    Attributes
    ----------
    k: :class:`int`
        Number of t-variables.
    signature: :class:`AlgebraSignature`
        ``t1..tk`` with their ``dt`` letters.
    substitutions: Tuple[Tuple[:class:`WeylOperator`, :class:`WeylOperator`], ...]
        The pairs ``(P_i, Q_i)`` for ``i = 1..k``.
    """

    k: int
    signature: AlgebraSignature
    substitutions: Tuple[Tuple[WeylOperator, WeylOperator], ...]

    @property
    def t_vars(self) -> Tuple[str, ...]:
        return self.signature.t_vars

    def p_operator(self, i: int) -> WeylOperator:
        return self.substitutions[i - 1][0]

    def q_operator(self, i: int) -> WeylOperator:
        return self.substitutions[i - 1][1]

    def relations(self) -> List[WeylOperator]:
        """``dp_i - P_i/i`` and ``p_i - i Q_i`` in the algebra of ``p1..pk`` and ``t1..tk``."""
        sig = AlgebraSignature(
            p_vars=[f"p{i}" for i in range(1, self.k + 1)], t_vars=self.t_vars, blocks=("dt",)
        )
        out = []
        for i, (p_op, q_op) in enumerate(self.substitutions, start=1):
            dp, p = WeylOperator.letter(sig, f"dp{i}"), WeylOperator.letter(sig, f"p{i}")
            out.append(dp - p_op.convert(sig).scale(sig.field(sympy.Rational(1, i))))
            out.append(p - q_op.convert(sig).scale(sig.field(i)))
        return out


def _q_operator(i: int, signature: AlgebraSignature) -> WeylOperator:
    h = [sympy.Symbol(f"h{j}") for j in range(1, i + 1)]
    poly = sympy.Poly(p_in_h(i), *h)
    terms = []
    for exps, coeff in poly.terms():
        m = signature.monomial({f"dt{j}": e for j, e in enumerate(exps, start=1) if e})
        terms.append((m, signature.field(sympy.Rational(coeff) / i)))
    return WeylOperator.from_terms(signature, terms)


def _p_operator(i: int, k: int, signature: AlgebraSignature) -> WeylOperator:
    field = signature.field
    op = WeylOperator.monomial(signature, signature.one, field.gen(f"t{i}"))
    for j in range(i + 1, k + 1):
        m = signature.monomial({f"dt{j - i}": 1})
        op = op + WeylOperator.monomial(signature, m, field.gen(f"t{j}"))
    return op


def build_hk_basis(
    k: int, *, verify: bool = False, budget: Optional[Budget] = None
) -> HammondBasis:
    """The substitution pairs for ``k`` t-variables.

    With ``verify`` the relations are reduced against a Gröbner basis of the
    annihilator of ``exp(h1 t1 + ... + hk tk)``; a nonzero remainder is a bug.
    """
    if k < 1:
        raise ValueError(f"k must be a positive integer, got {k}")
    signature = AlgebraSignature(t_vars=_t_names(k), blocks=("dt",))
    pairs = tuple(
        (_p_operator(i, k, signature), _q_operator(i, signature)) for i in range(1, k + 1)
    )
    basis = HammondBasis(k, signature, pairs)
    if verify:
        series = hammond_series(k)
        relations = basis.relations()
        gens = ann_exp(series.expr, relations[0].signature)
        gb = buchberger(gens, _VERIFY_ORDER, budget=budget)
        for rel in relations:
            if not gb.contains(rel):
                raise RuntimeError("This is a library bug.")
        _log.debug("verified %d substitution relations for k=%d", len(relations), k)
    return basis


class _Rewriter:
    def __init__(self, hb: HammondBasis, source: AlgebraSignature, adj: Adjunction) -> None:
        self.target = hb.signature.evolve(params=source.params)
        self.indices = [variable_index(p) for p in source.p_vars]
        weights = adj.field_weights(source)
        field = self.target.field
        self.factors = []
        for i, w in zip(self.indices, weights):
            w = field.convert_from(w, source.field)
            self.factors.append(w / field(i))
        self.pairs = [
            (hb.p_operator(i).convert(self.target), hb.q_operator(i).convert(self.target))
            for i in self.indices
        ]
        self._powers: Dict[Tuple[int, int, int], WeylOperator] = {}

    def power(self, which: int, i: int, e: int) -> WeylOperator:
        key = (which, i, e)
        if key not in self._powers:
            self._powers[key] = self.pairs[i][which] ** e
        return self._powers[key]

    def term(self, m: Sequence[int], c: Any) -> WeylOperator:
        n = len(self.indices)
        a, b = m[:n], m[n : 2 * n]
        coeff = c
        for i in range(n):
            power = a[i] - b[i]
            if power > 0:
                coeff = coeff * self.factors[i] ** power
            elif power < 0:
                coeff = coeff / self.factors[i] ** (-power)
        out = WeylOperator.constant(self.target, coeff)
        for i in range(n):
            if a[i]:
                out = op_mul(out, self.power(0, i, a[i]))
        for i in range(n):
            if b[i]:
                out = op_mul(out, self.power(1, i, b[i]))
        return out


def hammond_rewrite(
    u: WeylOperator, hb: HammondBasis, adj: Optional[Adjunction] = None
) -> WeylOperator:
    """The operator in ``t`` that ``u⋆`` becomes on the Hammond series.

    ``c p^a dp^b`` is sent to ``c prod((w_i/i) P_i)^a_i prod((i/w_i) Q_i)^b_i``
    with the ``P`` factors on the left. When ``u`` annihilates F the result
    annihilates ``<F, exp(h1 t1 + ... + hk tk)>``.
    """
    sig = u.signature
    if sig.t_vars or sig.blocks:
        raise ValueError("the rewrite applies to operators in the p-letters only")
    too_far = [p for p in sig.p_vars if variable_index(p) > hb.k]
    if too_far:
        raise ValueError(f"{too_far} are beyond p{hb.k}")
    rewriter = _Rewriter(hb, sig, adj or Adjunction())
    out = WeylOperator.zero(rewriter.target)
    for m, c in u.terms.items():
        coeff = rewriter.target.field.convert_from(c, sig.field)
        out = out + rewriter.term(m, coeff)
    return out


def _smallest(ops: Iterable[WeylOperator], letter: Optional[str] = None) -> WeylOperator:
    def key(op: WeylOperator) -> Any:
        order = op.order_in(letter) if letter else op.degree()
        return (order, len(op.terms), op.to_text())

    return min(ops, key=key)


def skew_elim(
    a: WeylOperator,
    b: WeylOperator,
    letter: str,
    *,
    budget: Optional[Budget] = None,
    stopwatch: Optional[Stopwatch] = None,
) -> WeylOperator:
    """A nonzero left combination ``L1 a + L2 b`` free of ``letter``.

    The rational content is removed; polynomial factors in the coefficients are
    kept.
    """
    if a.signature != b.signature:
        b = b.convert(a.signature)
    if not a.involves(letter) and not b.involves(letter):
        raise EliminationFailure(f"neither operator involves {letter}")
    free = eliminate(
        [a, b],
        letter,
        budget=budget,
        stopwatch=stopwatch,
        enough=bool,
        full_content=False,
    )
    if not free:
        raise EliminationFailure(f"no combination is free of {letter}")
    return _smallest(free).primitive()


def _specialize(ops: Sequence[WeylOperator], t_name: str) -> List[WeylOperator]:
    rule = SpecializeZero(t_name)
    out = []
    for op in ops:
        try:
            special = rule(op.normalized())
        except SubstitutionError:
            _log.warning("discarding %s, it still involves d%s", op.to_text(), t_name)
            continue
        if special:
            out.append(special.normalized())
    return out


def algorithm2(
    k: int,
    f_gens: Iterable[WeylOperator],
    adj: Optional[Adjunction] = None,
    budget: Optional[Budget] = None,
) -> WeylOperator:
    """An operator in ``tk, dtk`` annihilating ``sum_n <F, h_k^n> tk^n / n!``.

    The annihilator of F is rewritten into the t-letters through the Hammond
    series of ``t1..tk``; then for ``i = 1..k-1`` the letter ``dt_i`` is
    eliminated and ``t_i`` set to zero.
    """
    f_ops = [op for op in f_gens if op]
    if not f_ops:
        raise ValueError("the annihilator of F needs at least one nonzero operator")
    if any(op.signature.t_vars for op in f_ops):
        raise ValueError("F depends on t; the Hammond shortcut needs a t-free F")
    budget = budget or Budget()
    stopwatch = budget.start()
    hb = build_hk_basis(k)

    sig_f = f_ops[0].signature
    for op in f_ops[1:]:
        if op.signature != sig_f:
            raise ValueError("the generators of F live in different algebras")
    gb: GroebnerBasis = buchberger(f_ops, F_ORDER, budget=budget, stopwatch=stopwatch)
    adj = adj or Adjunction()
    ops = [hammond_rewrite(u, hb, adj).normalized() for u in gb]
    ops = [op for op in ops if op]
    _log.debug("rewrote %d basis elements into %s", len(ops), hb.signature.describe())

    for i in range(1, k):
        t_name, letter = f"t{i}", f"dt{i}"
        remaining = [f"t{j}" for j in range(i + 1, k + 1)]
        last = i == k - 1

        def enough(free: List[WeylOperator]) -> bool:
            if not free:
                return False
            special = _specialize(free, t_name)
            if last:
                return bool(special)
            if len(special) < len(remaining):
                return False
            return is_zero_dimensional(special, budget=budget, stopwatch=stopwatch)

        free = eliminate(ops, letter, budget=budget, stopwatch=stopwatch, enough=enough)
        ops = _specialize(free, t_name)
        if not ops:
            raise DegenerateSystem(f"every operator vanishes after setting {t_name} = 0")
        _log.debug("%d operators left after eliminating %s", len(ops), letter)
        stopwatch.check({"step": i, "operators": len(ops)})

    letter = f"dt{k}"
    result = _smallest(ops, letter)
    if not result.involves(letter):
        raise DegenerateSystem(f"no operator involves {letter}")
    return result.normalized()
