from __future__ import annotations

import logging
from typing import Any, Iterable, List, Literal, Mapping, Optional, Sequence, Tuple

import attrs

from scalarprod.adjunction import Adjunction
from scalarprod.budget import Budget
from scalarprod.engine import algorithm1
from scalarprod.symfun import schur_sum_factor
from scalarprod.utils import variable_index
from scalarprod.weyl import AlgebraSignature, RenameToP, Rescale, WeylOperator

__all__: Tuple[str, ...] = (
    "KroneckerProblem",
    "algorithm4",
    "kronecker_factored",
    "schur_sum_kronecker",
)
_log = logging.getLogger(__name__)


def _to_ops(_v: Iterable[WeylOperator]) -> Tuple[WeylOperator, ...]:
    ops = tuple(op for op in _v if op)
    if not ops:
        raise ValueError("an annihilator needs at least one nonzero operator")
    for op in ops:
        if op.signature.t_vars or op.signature.blocks:
            raise ValueError(f"{op.to_text()} involves t-letters")
    return ops


@attrs.define(slots=True, frozen=True)
class KroneckerProblem:
    """The Kronecker product ``F * G`` of two D-finite symmetric functions.

    Attributes
    ----------
    f_gens: Tuple[:class:`WeylOperator`, ...]
        Generators of the annihilator of F, in the p-letters.
    g_gens: Tuple[:class:`WeylOperator`, ...]
        Generators of the annihilator of G, in the p-letters.
    adj: :class:`Adjunction`
        The adjunction whose weights ``<p^a, p^a> = prod w^a a!`` define the product.
    """

    f_gens: Tuple[WeylOperator, ...] = attrs.field(converter=_to_ops)
    g_gens: Tuple[WeylOperator, ...] = attrs.field(converter=_to_ops)
    adj: Adjunction = attrs.field(factory=Adjunction)

    @property
    def p_vars(self) -> Tuple[str, ...]:
        names = {p for op in self.f_gens + self.g_gens for p in op.signature.p_vars}
        return tuple(sorted(names, key=variable_index))

    @property
    def params(self) -> Tuple[str, ...]:
        out: List[str] = []
        for op in self.f_gens + self.g_gens:
            out += [name for name in op.signature.params if name not in out]
        for name in self.p_vars:
            for s in self.adj.weight(name).free_symbols:
                if str(s) not in out:
                    out.append(str(s))
        return tuple(out)


def _marked(problem: KroneckerProblem) -> Tuple[AlgebraSignature, List[WeylOperator]]:
    p_vars, params = problem.p_vars, problem.params
    t_vars = ["t" + p[1:] for p in p_vars]
    marked = AlgebraSignature(p_vars=p_vars, t_vars=t_vars, blocks=("dt",), params=params)
    plain = AlgebraSignature(p_vars=p_vars, params=params)

    out = []
    for p, t in zip(p_vars, t_vars):
        euler = WeylOperator.monomial(marked, marked.monomial({"d" + t: 1}), marked.field.gen(t))
        out.append(euler - WeylOperator.monomial(marked, marked.monomial({p: 1, "d" + p: 1})))
    for mode in ("shift", "swap"):
        rule = Rescale(marked, mode)
        out += [rule(g.convert(plain)) for g in problem.g_gens]
    return marked, [op for op in out if op]


def algorithm4(problem: KroneckerProblem, budget: Optional[Budget] = None) -> List[WeylOperator]:
    """A system in the p-letters annihilating ``F * G``.

    G is read at ``p_i -> t_i p_i`` so that ``<F, G(t p)>`` is ``(F * G)(t)``;
    its annihilator follows from two rescalings of G's generators and the
    Euler operators ``t_i dt_i - p_i dp_i``. The scalar product engine finds
    the operators in t, and ``t_i``, ``dt_i`` are read back as ``p_i``, ``dp_i``.
    """
    marked, g_ops = _marked(problem)
    _log.debug("%d marked generators over %s", len(g_ops), marked.describe())
    found = algorithm1(problem.f_gens, g_ops, problem.adj, budget)
    target = AlgebraSignature(p_vars=problem.p_vars, params=problem.params)
    rule = RenameToP(target)
    return [rule(op).normalized() for op in found]


def _single_variable(ops: Sequence[WeylOperator]) -> str:
    names = {p for op in ops for p in op.signature.p_vars}
    if len(names) != 1:
        raise ValueError(f"expected operators in one p-variable, got {sorted(names)}")
    return names.pop()


def kronecker_factored(
    pairs: Mapping[str, Tuple[Sequence[WeylOperator], Sequence[WeylOperator]]],
    adj_weights: Optional[Mapping[str, Any]] = None,
    budget: Optional[Budget] = None,
) -> List[WeylOperator]:
    """The Kronecker product of ``prod_n f_n(p_n)`` and ``prod_n g_n(p_n)``.

    ``pairs`` maps each target variable ``p_n`` to the annihilators of
    ``f_n`` and ``g_n``, written in any single p-variable. Each pair is solved
    with the weight of its own variable (``adj_weights``, the index by default)
    and the per-variable systems are returned together, renamed to ``p_n``.
    """
    adj_weights = adj_weights or {}
    results: List[Tuple[str, str, List[WeylOperator]]] = []
    params: List[str] = []
    for name, (f_ops, g_ops) in pairs.items():
        source = _single_variable(list(f_ops) + list(g_ops))
        weight = adj_weights.get(name, variable_index(name))
        problem = KroneckerProblem(f_ops, g_ops, Adjunction({source: weight}))
        found = algorithm4(problem, budget)
        params += [s for op in found for s in op.signature.params if s not in params]
        results.append((source, name, found))

    names = sorted(pairs, key=variable_index)
    target = AlgebraSignature(p_vars=names, params=params)
    out: List[WeylOperator] = []
    for source, name, found in results:
        rename = {source: name, "d" + source: "d" + name}
        out += [op.convert(target, rename) for op in found]
    return out


def schur_sum_kronecker(
    parity: Literal["even", "odd"], weight: str = "N", budget: Optional[Budget] = None
) -> WeylOperator:
    """The first-order operator of one factor of ``(sum s_λ) * (sum s_λ)``.

    ``weight`` is the formal index of the power sum the factor belongs to.
    """
    factor = schur_sum_factor(parity, weight)
    ops = factor.annihilator()
    problem = KroneckerProblem(ops, ops, Adjunction.uniform(["p1"], weight))
    found = algorithm4(problem, budget)
    return min(found, key=lambda op: (op.order_in("dp1"), len(op.terms)))
