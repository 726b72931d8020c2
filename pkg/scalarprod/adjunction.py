from __future__ import annotations

from typing import Any, Dict, Iterable, Mapping, Tuple, Union

import attrs
import sympy

from scalarprod.errors import AdjointUndefined
from scalarprod.utils import to_expr, variable_index
from scalarprod.weyl import AlgebraSignature, WeylOperator

__all__: Tuple[str, ...] = ("Adjunction", "adjoint")


def _to_weights(_v: Mapping[str, Any]) -> Dict[str, sympy.Expr]:
    weights: Dict[str, sympy.Expr] = {}
    for name, w in _v.items():
        expr = to_expr(w)
        if expr == 0:
            raise ValueError(f"the weight of {name} must be nonzero")
        weights[str(name)] = expr
    return weights


@attrs.define(slots=True, frozen=True, eq=False)
class Adjunction:
    """The weight table of an adjunction ``p_i⋆ = w_i dp_i``, ``dp_i⋆ = p_i / w_i``.

    Weights are nonzero expressions in the formal parameters. Variables without
    an explicit weight use their index, so an empty table is the symmetric
    adjunction of the classical scalar product.
    """

    weights: Dict[str, sympy.Expr] = attrs.field(factory=dict, converter=_to_weights)

    @classmethod
    def symmetric(cls, n: Union[int, Iterable[str]] = 0) -> Adjunction:
        names = [f"p{i}" for i in range(1, n + 1)] if isinstance(n, int) else list(n)
        return cls({name: variable_index(name) for name in names})

    @classmethod
    def uniform(cls, n: Union[int, Iterable[str]], weight: Any) -> Adjunction:
        names = [f"p{i}" for i in range(1, n + 1)] if isinstance(n, int) else list(n)
        return cls({name: weight for name in names})

    @classmethod
    def hall(cls, n: Union[int, Iterable[str]], q: str = "q") -> Adjunction:
        names = [f"p{i}" for i in range(1, n + 1)] if isinstance(n, int) else list(n)
        qs = sympy.Symbol(q)
        return cls(
            {name: variable_index(name) * (1 - qs ** variable_index(name)) for name in names}
        )

    def weight(self, name: str) -> sympy.Expr:
        return self.weights.get(name, sympy.Integer(variable_index(name)))

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Adjunction):
            return NotImplemented
        return self.weights == other.weights

    def __hash__(self) -> int:
        return hash(tuple(sorted((k, str(v)) for k, v in self.weights.items())))

    def field_weights(self, signature: AlgebraSignature) -> Tuple[Any, ...]:
        """The weights of ``signature.p_vars`` as coefficient-field elements."""
        field = signature.field
        out = []
        for name in signature.p_vars:
            w = self.weight(name)
            extra = {str(s) for s in w.free_symbols}.difference(signature.params)
            if extra:
                raise ValueError(
                    f"the weight {w} of {name} uses {sorted(extra)}, which are not parameters"
                )
            out.append(field(w))
        return tuple(out)

    def pairing_weight(self, name: str, exponent: int) -> sympy.Expr:
        """``<p^a, p^a> = w^a a!`` for one variable."""
        return self.weight(name) ** exponent * sympy.factorial(exponent)


def adjoint(op: WeylOperator, adj: Adjunction) -> WeylOperator:
    """The image of ``op`` under the anti-automorphism of ``adj``.

    ``c p^a dp^b`` goes to ``c prod(w^(a - b)) p^b dp^a``; t-variables and
    parameters are fixed.
    """
    sig = op.signature
    n = sig.n
    weights = adj.field_weights(sig)
    powers: Dict[Tuple[int, int], Any] = {}

    terms = []
    for m, c in op.terms.items():
        if any(m[2 * n :]):
            raise AdjointUndefined(f"{op.monomial_text(m)} contains a differential block letter")
        a, b = m[:n], m[n : 2 * n]
        coeff = c
        for i in range(n):
            e = a[i] - b[i]
            if not e:
                continue
            key = (i, e)
            if key not in powers:
                powers[key] = weights[i] ** e if e > 0 else sig.field.one / weights[i] ** (-e)
            coeff = coeff * powers[key]
        terms.append((tuple(b) + tuple(a) + m[2 * n :], coeff))
    return WeylOperator.from_terms(sig, terms)
