from __future__ import annotations

import logging
from typing import Any, Dict, Iterable, Iterator, List, Optional, Sequence, Tuple

from scalarprod.adjunction import Adjunction, adjoint
from scalarprod.budget import Budget, Stopwatch
from scalarprod.groebner import (
    GroebnerBasis,
    buchberger,
    is_zero_dimensional,
    right_reduce_via_adjoint,
)
from scalarprod.orders import MonomialOrder
from scalarprod.utils import Side, variable_index
from scalarprod.weyl import (
    AlgebraSignature,
    ExpandLeft,
    Monomial,
    WeylOperator,
    _iter_monomials,
    op_mul,
)

__all__: Tuple[str, ...] = (
    "EliminationMatrix",
    "insert_row",
    "algorithm1",
    "algorithm3",
    "unified_signature",
    "lift",
)
_log = logging.getLogger(__name__)

# F is reduced under the order induced through the adjunction
F_ORDER = MonomialOrder.degrevlex("p", "dp", "dt")
G_ORDER = MonomialOrder.degrevlex("dp", "p", "dt")
ENUMERATION = MonomialOrder.degrevlex("dr", "dl", "dp", "p", "dt")
_EXPAND = ExpandLeft()


class EliminationMatrix:
    """Rows over ``K(t)`` kept in echelon form for a block order.

    The eliminated letters rank above all others, so a row whose pivot is free
    of them is free of them altogether: such rows are the operators the
    engines are looking for.

    Parameters
    ----------
    signature: :class:`AlgebraSignature`
        The algebra every inserted row lives in.
    eliminated: Sequence[:class:`str`]
        Letter kinds to eliminate, ``("p", "dp")`` or ``("p", "dp", "dr")``.
    """

    def __init__(
        self,
        signature: AlgebraSignature,
        eliminated: Sequence[str] = ("p", "dp"),
        *,
        budget: Optional[Budget] = None,
        stopwatch: Optional[Stopwatch] = None,
    ) -> None:
        self.signature = signature
        self.order = MonomialOrder.block(eliminated, "dr", "dl", "dp", "p", "dt")
        self.budget = budget or Budget()
        self.stopwatch = stopwatch or self.budget.start()
        self.rows: Dict[Monomial, WeylOperator] = {}
        self.pure: List[WeylOperator] = []
        self._key = self.order.key(signature)
        self._free = [
            i
            for i, kind in enumerate(signature.letter_kinds)
            if kind not in self.order.eliminated
        ]
        self.from_f = 0
        self.from_g = 0
        self.zero = 0

    def __len__(self) -> int:
        return len(self.rows)

    def state(self) -> Dict[str, Any]:
        return {
            "rows": len(self.rows),
            "pure": len(self.pure),
            "from_f": self.from_f,
            "from_g": self.from_g,
            "zero": self.zero,
        }

    def is_eliminated(self, row: WeylOperator) -> bool:
        return all(not e or i in self._free for m in row.terms for i, e in enumerate(m))

    def insert_row(self, a: WeylOperator, source: str = "g") -> Optional[WeylOperator]:
        """Reduce ``a`` against the pivots and keep what is left.

        Returns the new row (scaled to leading coefficient 1), or ``None`` when
        ``a`` reduced to zero.
        """
        while a:
            m = max(a.terms, key=self._key)
            row = self.rows.get(m)
            if row is None:
                break
            a = a - row.scale(a.terms[m])
        if not a:
            self.zero += 1
            return None

        m = max(a.terms, key=self._key)
        a = a.scale(self.signature.field.one / a.terms[m])
        self.rows[m] = a
        if source == "f":
            self.from_f += 1
        else:
            self.from_g += 1
        if len(self.rows) > self.budget.max_rows:
            self.stopwatch.exceeded(f"more than {self.budget.max_rows} matrix rows", self.state())
        if self.is_eliminated(a):
            self.pure.append(a)
            _log.debug("row %d is free of the eliminated letters", len(self.rows))
        return a


def insert_row(matrix: EliminationMatrix, a: WeylOperator) -> EliminationMatrix:
    matrix.insert_row(a)
    return matrix


def _union(groups: Iterable[Sequence[str]]) -> List[str]:
    out: List[str] = []
    for group in groups:
        out += [name for name in group if name not in out]
    return out


def unified_signature(ops: Sequence[WeylOperator], blocks: Sequence[str]) -> AlgebraSignature:
    """The smallest signature holding the letters of every operator in ``ops``."""
    sigs = [op.signature for op in ops]
    p_vars = sorted(_union(s.p_vars for s in sigs), key=variable_index)
    t_vars = _union(s.t_vars for s in sigs)
    params = _union(s.params for s in sigs)
    return AlgebraSignature(
        p_vars=p_vars, t_vars=t_vars, blocks=tuple(blocks) if t_vars else (), params=params
    )


def lift(ops: Sequence[WeylOperator], signature: AlgebraSignature) -> List[WeylOperator]:
    """Read ``ops`` in ``signature``, adding ``dp`` and ``dt`` for the variables they ignore."""
    declared_p = {p for op in ops for p in op.signature.p_vars}
    declared_t = {t for op in ops for t in op.signature.t_vars}
    lifted = [op.convert(signature) for op in ops if op]
    for p in signature.p_vars:
        if p not in declared_p:
            lifted.append(WeylOperator.letter(signature, "d" + p))
    if "dt" in signature.blocks:
        for t in signature.t_vars:
            if t not in declared_t:
                lifted.append(WeylOperator.letter(signature, signature.block_letter("dt", t)))
    return lifted


def _monomials(
    signature: AlgebraSignature, kinds: Sequence[str], max_degree: int
) -> Iterator[Tuple[int, Monomial]]:
    positions = [i for i, kind in enumerate(signature.letter_kinds) if kind in kinds]
    key = ENUMERATION.key(signature)
    for degree in range(max_degree + 1):
        batch = []
        for exps in _iter_monomials(len(positions), degree):
            m = [0] * signature.width
            for i, e in zip(positions, exps):
                m[i] = e
            batch.append(tuple(m))
        for m in sorted(batch, key=key):
            yield degree, m


def _target(signature: AlgebraSignature) -> AlgebraSignature:
    return AlgebraSignature(t_vars=signature.t_vars, blocks=("dt",), params=signature.params)


class _Search:
    """Shared loop state of the two engines: the matrix and the stopping rule."""

    def __init__(
        self,
        signature: AlgebraSignature,
        eliminated: Sequence[str],
        budget: Budget,
        stopwatch: Stopwatch,
    ) -> None:
        self.budget = budget
        self.stopwatch = stopwatch
        self.matrix = EliminationMatrix(
            signature, eliminated, budget=budget, stopwatch=stopwatch
        )
        self.target = _target(signature)
        self.found: List[WeylOperator] = []
        self.unchecked = 0
        self.degree = 0

    def insert(self, row: WeylOperator, source: str) -> Optional[List[WeylOperator]]:
        new = self.matrix.insert_row(row, source)
        if new is None or not self.matrix.is_eliminated(new):
            return None
        op = new.convert(self.target).normalized()
        if not op:
            return None
        self.found.append(op)
        if self.target.k == 1:
            return [op]
        self.unchecked += 1
        if self.unchecked >= self.budget.check_every:
            return self.check()
        return None

    def check(self) -> Optional[List[WeylOperator]]:
        if not self.unchecked:
            return None
        self.unchecked = 0
        if is_zero_dimensional(self.found, budget=self.budget, stopwatch=self.stopwatch):
            _log.debug("zero-dimensional after %d eliminated rows", len(self.found))
            return list(self.found)
        return None

    def next_degree(self, degree: int) -> Optional[List[WeylOperator]]:
        if degree == self.degree:
            return None
        self.degree = degree
        _log.debug("degree %d reached with %s", degree, self.matrix.state())
        return self.check()

    def give_up(self) -> List[WeylOperator]:
        done = self.check()
        if done is not None:
            return done
        self.stopwatch.exceeded(
            f"no D-finite description up to monomial degree {self.budget.max_degree}",
            self.matrix.state(),
        )
        raise RuntimeError("This is a library bug.")


def _basis(
    ops: Sequence[WeylOperator], order: MonomialOrder, budget: Budget, stopwatch: Stopwatch
) -> GroebnerBasis:
    return buchberger(ops, order, budget=budget, stopwatch=stopwatch)


def algorithm1(
    f_gens: Iterable[WeylOperator],
    g_gens: Iterable[WeylOperator],
    adj: Optional[Adjunction] = None,
    budget: Optional[Budget] = None,
) -> List[WeylOperator]:
    """Operators in ``t, dt`` annihilating ``<F, G>`` for a t-free ``F``.

    Monomials ``beta * dt^d`` are taken in increasing order. Each gives a row of
    the right ideal ``(ann F)⋆ W``, ``(beta - (NF_F(beta⋆))⋆) dt^d``, and a row
    of ``ann G``, ``alpha - NF_G(alpha)``. Eliminating the p-letters from their
    span leaves operators in ``t`` alone.

    Returns the first operator found with one t-variable, or a generating set
    of a zero-dimensional ideal with several.
    """
    f_ops, g_ops = [op for op in f_gens if op], [op for op in g_gens if op]
    if not f_ops or not g_ops:
        raise ValueError("both annihilators need at least one nonzero operator")
    if any(op.signature.t_vars for op in f_ops):
        raise ValueError("F depends on t; use algorithm3")
    adj = adj or Adjunction()
    budget = budget or Budget()
    stopwatch = budget.start()

    work = unified_signature(f_ops + g_ops, ("dt",))
    if not work.t_vars:
        raise ValueError("G must depend on at least one t-variable")
    n = work.n
    sig_f = AlgebraSignature(p_vars=work.p_vars, params=work.params)
    gb_f = _basis(lift(f_ops, sig_f), F_ORDER, budget, stopwatch)
    gb_f = gb_f.with_side(Side.right_via_adjoint)
    gb_g = _basis(lift(g_ops, work), G_ORDER, budget, stopwatch)
    _log.debug("bases of %d and %d elements over %s", len(gb_f), len(gb_g), work.describe())

    search = _Search(work, ("p", "dp"), budget, stopwatch)
    dt = work.block_slice("dt")
    f_rows: Dict[Monomial, WeylOperator] = {}
    for degree, alpha in _monomials(work, ("p", "dp", "dt"), budget.max_degree):
        done = search.next_degree(degree)
        if done is not None:
            return done
        stopwatch.check(search.matrix.state())

        beta = alpha[: 2 * n]
        if beta not in f_rows:
            reduced = right_reduce_via_adjoint(WeylOperator.monomial(sig_f, beta), gb_f, adj)
            f_rows[beta] = reduced.convert(work)
        row_f = f_rows[beta]
        if row_f and any(alpha[dt]):
            row_f = op_mul(row_f, WeylOperator.monomial(work, (0,) * (2 * n) + alpha[2 * n :]))
        mono = WeylOperator.monomial(work, alpha)
        row_g = mono - gb_g.reduce(mono)

        for row, source in ((row_f, "f"), (row_g, "g")):
            done = search.insert(row, source)
            if done is not None:
                _log.debug("finished at degree %d with %s", degree, search.matrix.state())
                return done
    return search.give_up()


def _adjoint_terms(
    x: WeylOperator, weights: Sequence[Any], work: AlgebraSignature, shift: Sequence[int]
) -> WeylOperator:
    # c p^a dp^b dt^e -> c w^(a-b) p^b dp^a dl^e dr^shift
    n = x.signature.n
    dl, dr = work.block_slice("dl"), work.block_slice("dr")
    terms = []
    for m, c in x.terms.items():
        a, b, e = m[:n], m[n : 2 * n], m[2 * n :]
        coeff = c
        for i in range(n):
            power = a[i] - b[i]
            if power > 0:
                coeff = coeff * weights[i] ** power
            elif power < 0:
                coeff = coeff / weights[i] ** (-power)
        new = [0] * work.width
        new[:n], new[n : 2 * n] = b, a
        new[dl] = e
        new[dr] = shift
        terms.append((tuple(new), coeff))
    return _EXPAND(WeylOperator.from_terms(work, terms))


def _g_terms(y: WeylOperator, work: AlgebraSignature, shift: Sequence[int]) -> WeylOperator:
    # c p^a dp^b dt^g -> c p^a dp^b dl^shift dr^g
    n = y.signature.n
    dl, dr = work.block_slice("dl"), work.block_slice("dr")
    terms = []
    for m, c in y.terms.items():
        new = [0] * work.width
        new[: 2 * n] = m[: 2 * n]
        new[dl] = shift
        new[dr] = m[2 * n :]
        terms.append((tuple(new), c))
    return _EXPAND(WeylOperator.from_terms(work, terms))


def algorithm3(
    f_gens: Iterable[WeylOperator],
    g_gens: Iterable[WeylOperator],
    adj: Optional[Adjunction] = None,
    budget: Optional[Budget] = None,
) -> List[WeylOperator]:
    """Operators in ``t, dt`` annihilating ``<F, G>`` when both sides depend on t.

    ``dl`` differentiates F and ``dr`` differentiates G, with ``dt = dl + dr``
    on the pairing. Monomials ``beta dl^e dr^g`` give an F-row from the
    reduction of ``beta⋆ dt^e`` modulo ``ann F`` and a G-row from the reduction
    of ``beta dt^g`` modulo ``ann G``; p, dp and dr are then eliminated.
    """
    f_ops, g_ops = [op for op in f_gens if op], [op for op in g_gens if op]
    if not f_ops or not g_ops:
        raise ValueError("both annihilators need at least one nonzero operator")
    adj = adj or Adjunction()
    budget = budget or Budget()
    stopwatch = budget.start()

    work = unified_signature(f_ops + g_ops, ("dt", "dl", "dr"))
    if not work.t_vars:
        raise ValueError("the pairing needs at least one t-variable")
    n = work.n
    side = work.evolve(blocks=("dt",))
    gb_f = _basis(lift(f_ops, side), F_ORDER, budget, stopwatch)
    gb_g = _basis(lift(g_ops, side), G_ORDER, budget, stopwatch)
    weights = adj.field_weights(side)
    _log.debug("bases of %d and %d elements over %s", len(gb_f), len(gb_g), work.describe())

    search = _Search(work, ("p", "dp", "dr"), budget, stopwatch)
    dl, dr = work.block_slice("dl"), work.block_slice("dr")
    zeros = (0,) * side.k
    f_cache: Dict[Tuple[Monomial, Monomial], WeylOperator] = {}
    g_cache: Dict[Tuple[Monomial, Monomial], WeylOperator] = {}
    for degree, alpha in _monomials(work, ("p", "dp", "dl", "dr"), budget.max_degree):
        done = search.next_degree(degree)
        if done is not None:
            return done
        stopwatch.check(search.matrix.state())

        beta, e, gamma = alpha[: 2 * n], alpha[dl], alpha[dr]
        if (beta, e) not in f_cache:
            start = adjoint(WeylOperator.monomial(side, beta + zeros), adj)
            if any(e):
                start = op_mul(start, WeylOperator.monomial(side, (0,) * (2 * n) + e))
            f_cache[(beta, e)] = start - gb_f.reduce(start)
        if (beta, gamma) not in g_cache:
            mono = WeylOperator.monomial(side, beta + gamma)
            g_cache[(beta, gamma)] = mono - gb_g.reduce(mono)

        row_f = _adjoint_terms(f_cache[(beta, e)], weights, work, gamma)
        row_g = _g_terms(g_cache[(beta, gamma)], work, e)
        for row, source in ((row_f, "f"), (row_g, "g")):
            done = search.insert(row, source)
            if done is not None:
                _log.debug("finished at degree %d with %s", degree, search.matrix.state())
                return done
    return search.give_up()
