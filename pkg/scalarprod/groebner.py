from __future__ import annotations

import logging
from typing import (
    TYPE_CHECKING,
    Any,
    Callable,
    Dict,
    Iterable,
    List,
    Optional,
    Sequence,
    Tuple,
)

import attrs

from scalarprod.adjunction import Adjunction, adjoint
from scalarprod.budget import Budget, Stopwatch
from scalarprod.errors import SignatureMismatch
from scalarprod.orders import MonomialOrder
from scalarprod.utils import Side
from scalarprod.weyl import AlgebraSignature, Monomial, WeylOperator, op_mul

if TYPE_CHECKING:
    from scalarprod.types import OperatorPayload

__all__: Tuple[str, ...] = (
    "GroebnerBasis",
    "Reducer",
    "reduce",
    "reduce_with_cofactors",
    "buchberger",
    "right_reduce_via_adjoint",
    "is_zero_dimensional",
    "eliminate",
    "s_polynomial",
)
_log = logging.getLogger(__name__)


def _divides(u: Monomial, v: Monomial) -> bool:
    return all(a <= b for a, b in zip(u, v))


def _lcm(u: Monomial, v: Monomial) -> Monomial:
    return tuple(max(a, b) for a, b in zip(u, v))


def _quotient(v: Monomial, u: Monomial) -> Monomial:
    return tuple(b - a for a, b in zip(u, v))


class Reducer:
    """Left normal forms modulo a fixed list of operators.

    Normal forms of monomials are memoized; since coefficients stand on the left,
    the normal form of an operator is the coefficient-weighted sum of the normal
    forms of its monomials.
    """

    def __init__(self, elements: Sequence[WeylOperator], order: MonomialOrder) -> None:
        self.elements = [g for g in elements if g]
        self.order = order
        self.signature: Optional[AlgebraSignature] = (
            self.elements[0].signature if self.elements else None
        )
        for g in self.elements:
            if g.signature != self.signature:
                raise SignatureMismatch("basis elements live in different algebras")
        self.lms = [g.lm(order) for g in self.elements]
        self.memo: Dict[Monomial, Dict[Monomial, Any]] = {}
        self.hits = 0

    def divisor(self, m: Monomial) -> Optional[int]:
        for i, lm in enumerate(self.lms):
            if _divides(lm, m):
                return i
        return None

    def _tail(self, m: Monomial, i: int) -> Dict[Monomial, Any]:
        g = self.elements[i]
        sig = g.signature
        u = _quotient(m, self.lms[i])
        product = op_mul(WeylOperator.monomial(sig, u), g) if any(u) else g
        lead = product.terms[m]
        return {m2: -c / lead for m2, c in product.terms.items() if m2 != m}

    def monomial_nf(self, m: Monomial) -> Dict[Monomial, Any]:
        if m in self.memo:
            self.hits += 1
            return self.memo[m]
        pending: Dict[Monomial, Dict[Monomial, Any]] = {}
        stack = [m]
        while stack:
            cur = stack[-1]
            if cur in self.memo:
                stack.pop()
                continue
            if cur not in pending:
                i = self.divisor(cur)
                if i is None:
                    self.memo[cur] = {cur: self.signature.field.one}  # type: ignore
                    stack.pop()
                    continue
                pending[cur] = self._tail(cur, i)
            missing = [m2 for m2 in pending[cur] if m2 not in self.memo]
            if missing:
                stack.extend(missing)
                continue
            out: Dict[Monomial, Any] = {}
            for m2, c in pending.pop(cur).items():
                for m3, c3 in self.memo[m2].items():
                    value = c * c3
                    out[m3] = out[m3] + value if m3 in out else value
            self.memo[cur] = {k: v for k, v in out.items() if v}
            stack.pop()
        return self.memo[m]

    def reduce(self, a: WeylOperator) -> WeylOperator:
        if not self.elements or not a:
            return a
        if a.signature != self.signature:
            raise SignatureMismatch(
                f"cannot reduce an operator over {a.signature.describe()} "
                f"modulo a basis over {self.signature.describe()}"  # type: ignore
            )
        out: Dict[Monomial, Any] = {}
        for m, c in a.terms.items():
            for m2, c2 in self.monomial_nf(m).items():
                value = c * c2
                out[m2] = out[m2] + value if m2 in out else value
        return WeylOperator(a.signature, {m: c for m, c in out.items() if c})


@attrs.define(slots=True, frozen=True)
class GroebnerBasis:
    """A Gröbner basis of a left ideal.

    Attributes
    ----------
    elements: Tuple[:class:`WeylOperator`, ...]
        Normalized, nonzero, sorted by increasing leading monomial.
    order: :class:`MonomialOrder`
        The order the basis was computed for.
    side: :class:`Side`
        ``left`` for ordinary left reduction; ``right_via_adjoint`` marks a basis
        computed under an induced order, used through adjunction.
    complete: :class:`bool`
        ``False`` when Buchberger's algorithm stopped early.
    """

    elements: Tuple[WeylOperator, ...]
    order: MonomialOrder
    side: Side = Side.left
    complete: bool = True
    _reducer: Optional[Reducer] = attrs.field(default=None, init=False, eq=False, repr=False)

    @property
    def signature(self) -> Optional[AlgebraSignature]:
        return self.elements[0].signature if self.elements else None

    @property
    def leading_monomials(self) -> Tuple[Monomial, ...]:
        return tuple(g.lm(self.order) for g in self.elements)

    @property
    def reducer(self) -> Reducer:
        if self._reducer is None:
            object.__setattr__(self, "_reducer", Reducer(self.elements, self.order))
        return self._reducer  # type: ignore

    def reduce(self, a: WeylOperator) -> WeylOperator:
        return self.reducer.reduce(a)

    def contains(self, a: WeylOperator) -> bool:
        return not self.reduce(a)

    def __len__(self) -> int:
        return len(self.elements)

    def __iter__(self):  # type: ignore
        return iter(self.elements)

    def with_side(self, side: Side) -> GroebnerBasis:
        return GroebnerBasis(self.elements, self.order, side, self.complete)

    def to_dict(self) -> List[OperatorPayload]:
        return [g.to_dict() for g in self.elements]


def reduce(a: WeylOperator, gb: GroebnerBasis) -> WeylOperator:
    """The left normal form of ``a`` modulo ``gb``."""
    if gb.side is not Side.left:
        raise ValueError("right-via-adjoint bases reduce through right_reduce_via_adjoint")
    return gb.reduce(a)


def reduce_with_cofactors(
    a: WeylOperator, elements: Sequence[WeylOperator], order: MonomialOrder
) -> Tuple[WeylOperator, List[WeylOperator]]:
    """Reduce ``a`` and return ``(r, cofactors)`` with ``a - r = sum(c_i * g_i)``."""
    sig = a.signature
    elements = list(elements)
    key = order.key(sig)
    lms = [g.lm(order) for g in elements]
    cofactors = [WeylOperator.zero(sig) for _ in elements]
    remainder: Dict[Monomial, Any] = {}
    rest = a
    while rest:
        m = max(rest.terms, key=key)
        c = rest.terms[m]
        for i, lm in enumerate(lms):
            if _divides(lm, m):
                u = WeylOperator.monomial(sig, _quotient(m, lm))
                product = op_mul(u, elements[i])
                factor = c / product.terms[m]
                cofactors[i] = cofactors[i] + u.scale(factor)
                rest = rest - product.scale(factor)
                break
        else:
            remainder[m] = c
            rest = WeylOperator(sig, {k: v for k, v in rest.terms.items() if k != m})
    return WeylOperator(sig, remainder), cofactors


def s_polynomial(f: WeylOperator, g: WeylOperator, order: MonomialOrder) -> WeylOperator:
    sig = f.signature
    lf, lg = f.lm(order), g.lm(order)
    lcm = _lcm(lf, lg)
    uf = op_mul(WeylOperator.monomial(sig, _quotient(lcm, lf)), f)
    ug = op_mul(WeylOperator.monomial(sig, _quotient(lcm, lg)), g)
    return uf.scale(sig.field.one / uf.terms[lcm]) - ug.scale(sig.field.one / ug.terms[lcm])


def _auto_reduce(
    basis: List[WeylOperator], order: MonomialOrder, full: bool
) -> List[WeylOperator]:
    sig = basis[0].signature
    key = order.key(sig)
    basis = sorted(basis, key=lambda g: key(g.lm(order)))
    kept: List[WeylOperator] = []
    for g in basis:
        lm = g.lm(order)
        if any(_divides(h.lm(order), lm) for h in kept):
            continue
        kept.append(g)
    out: List[WeylOperator] = []
    for i, g in enumerate(kept):
        others = kept[:i] + kept[i + 1 :]
        reduced = Reducer(others, order).reduce(g) if others else g
        out.append(reduced.normalized(order, full=full))
    return sorted(out, key=lambda g: key(g.lm(order)))


def buchberger(
    gens: Iterable[WeylOperator],
    order: MonomialOrder,
    *,
    budget: Optional[Budget] = None,
    stopwatch: Optional[Stopwatch] = None,
    stop: Optional[Callable[[Sequence[WeylOperator]], bool]] = None,
    full_content: bool = True,
    auto_reduce: bool = True,
) -> GroebnerBasis:
    """A Gröbner basis of the left ideal generated by ``gens``.

    Pairs are taken by smallest lcm, ties broken by degree and age. ``stop`` is
    consulted after every insertion; when it returns ``True`` the run ends early
    and the (incomplete) basis is returned.
    """
    budget = budget or Budget()
    stopwatch = stopwatch or budget.start()
    basis = [g.normalized(order, full=full_content) for g in gens if g]
    if not basis:
        return GroebnerBasis((), order)
    sig = basis[0].signature
    for g in basis:
        if g.signature != sig:
            raise SignatureMismatch("generators live in different algebras")
    key = order.key(sig)

    def unit_ideal() -> GroebnerBasis:
        return GroebnerBasis((WeylOperator.constant(sig),), order)

    if stop is not None and stop(basis):
        return GroebnerBasis(tuple(basis), order, complete=False)
    if any(g.lm(order) == sig.one for g in basis):
        return unit_ideal()

    pairs = [(i, j) for j in range(len(basis)) for i in range(j)]
    processed = 0
    reducer = Reducer(basis, order)
    while pairs:
        lms = [g.lm(order) for g in basis]

        def rank(pair: Tuple[int, int]) -> Any:
            lcm = _lcm(lms[pair[0]], lms[pair[1]])
            return (key(lcm), sum(lcm), pair[1], pair[0])

        best = min(pairs, key=rank)
        pairs.remove(best)
        processed += 1
        if processed > budget.max_pairs:
            stopwatch.exceeded(
                f"more than {budget.max_pairs} S-pairs",
                {"pairs": processed, "basis": len(basis), "pending": len(pairs)},
            )
        stopwatch.check({"pairs": processed, "basis": len(basis)})

        i, j = best
        r = reducer.reduce(s_polynomial(basis[i], basis[j], order))
        if not r:
            continue
        r = r.normalized(order, full=full_content)
        pairs += [(k, len(basis)) for k in range(len(basis))]
        basis.append(r)
        _log.debug(
            "inserted element %d of degree %d after %d S-pairs", len(basis), r.degree(), processed
        )
        if stop is not None and stop(basis):
            _log.debug("early stop with %d elements", len(basis))
            return GroebnerBasis(tuple(basis), order, complete=False)
        if r.lm(order) == sig.one:
            _log.debug("unit ideal after %d S-pairs", processed)
            return unit_ideal()
        reducer = Reducer(basis, order)

    if auto_reduce:
        basis = _auto_reduce(basis, order, full_content)
    _log.debug("Gröbner basis of %d elements from %d S-pairs", len(basis), processed)
    return GroebnerBasis(tuple(basis), order)


def right_reduce_via_adjoint(
    beta: WeylOperator, gb_f: GroebnerBasis, adj: Adjunction
) -> WeylOperator:
    """``beta - (NF(beta⋆))⋆``, an element of the right ideal ``(ann F)⋆ W``.

    ``gb_f`` must be a basis of the annihilator of F for the order induced by
    the adjunction.
    """
    return beta - adjoint(gb_f.reducer.reduce(adjoint(beta, adj)), adj)


def is_zero_dimensional(
    gens: Sequence[WeylOperator],
    t_names: Optional[Sequence[str]] = None,
    *,
    budget: Optional[Budget] = None,
    stopwatch: Optional[Stopwatch] = None,
) -> bool:
    """Whether the left ideal of ``gens`` has finitely many standard monomials in ``dt``.

    Only the ``dt`` letters of ``t_names`` (all t-variables by default) are
    considered; ``gens`` must be free of p-letters.
    """
    gens = [g for g in gens if g]
    if not gens:
        return False
    sig = gens[0].signature
    names = list(t_names) if t_names is not None else list(sig.t_vars)
    letters = [sig.block_letter("dt", t) for t in names]
    positions = [sig.index(letter) for letter in letters]
    if any(not g.is_pure("dt") for g in gens):
        raise ValueError("the zero-dimensionality test needs operators in t and dt only")

    used = {i for g in gens for m in g.terms for i, e in enumerate(m) if e}
    if len(positions) == 1 and used.issubset(positions):
        return True

    order = MonomialOrder.degrevlex("dt")
    gb = buchberger(gens, order, budget=budget, stopwatch=stopwatch)
    for pos in positions:
        pure = (all(e == 0 for i, e in enumerate(lm) if i != pos) for lm in gb.leading_monomials)
        if not any(pure):
            return False
    return True


def eliminate(
    ops: Sequence[WeylOperator],
    letter: str,
    *,
    budget: Optional[Budget] = None,
    stopwatch: Optional[Stopwatch] = None,
    enough: Optional[Callable[[List[WeylOperator]], bool]] = None,
    full_content: bool = True,
) -> List[WeylOperator]:
    """Elements of the left ideal of ``ops`` free of ``letter``.

    A block order puts ``letter`` above everything else. With ``enough``, the
    completion stops as soon as the letter-free elements found so far satisfy it.
    """
    ops = [g for g in ops if g]
    if not ops:
        return []
    sig = ops[0].signature
    position = sig.index(letter)
    order = MonomialOrder.block([letter], "dt", "dl", "dr", "dp", "p")

    def free(elements: Sequence[WeylOperator]) -> List[WeylOperator]:
        return [g for g in elements if not any(m[position] for m in g.terms)]

    stop = None
    if enough is not None:

        def stop(elements: Sequence[WeylOperator]) -> bool:
            return enough(free(elements))

    gb = buchberger(
        ops, order, budget=budget, stopwatch=stopwatch, stop=stop, full_content=full_content
    )
    return free(gb.elements)
