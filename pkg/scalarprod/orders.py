from __future__ import annotations

import functools
from typing import TYPE_CHECKING, Callable, FrozenSet, Sequence, Tuple

import attrs

from scalarprod.utils import OrderKind

if TYPE_CHECKING:
    from scalarprod.weyl import AlgebraSignature, Monomial

__all__: Tuple[str, ...] = (
    "MonomialOrder",
    "LETTER_KINDS",
    "compare",
    "induced_adjoint_order",
)

LETTER_KINDS: Tuple[str, ...] = ("p", "dp", "dt", "dl", "dr")

MonomialKey = Tuple[int, ...]


def _to_kinds(_v: Sequence[str]) -> Tuple[str, ...]:
    kinds = tuple(_v)
    for kind in kinds:
        if kind not in LETTER_KINDS:
            raise ValueError(f"unknown letter kind {kind!r}, expected one of {LETTER_KINDS}")
    if len(set(kinds)) != len(kinds):
        raise ValueError(f"letter kinds repeat in {kinds}")
    return kinds


def _to_eliminated(_v: Sequence[str]) -> FrozenSet[str]:
    # letter kinds or individual letter names
    return frozenset(str(x) for x in _v)


@attrs.define(slots=True, frozen=True)
class MonomialOrder:
    """A monomial order on the letters of an :class:`~scalarprod.weyl.AlgebraSignature`.

    Letters are ranked group by group following ``groups`` (letter kinds, highest
    first); inside a group the letter with the smaller index ranks higher. Kinds
    missing from ``groups`` rank last, in signature order.

    Attributes
    ----------
    kind: :class:`OrderKind`
        ``degrevlex`` or ``block``.
    groups: Tuple[:class:`str`, ...]
        Letter kinds in decreasing priority, e.g. ``("dp", "p", "dt")``.
    eliminated: FrozenSet[:class:`str`]
        For block orders, the letter kinds or single letters of the eliminated
        block. Any monomial containing one of them is larger than every
        monomial free of them.
    """

    kind: OrderKind = attrs.field(converter=OrderKind)
    groups: Tuple[str, ...] = attrs.field(converter=_to_kinds)
    eliminated: FrozenSet[str] = attrs.field(factory=frozenset, converter=_to_eliminated)

    @classmethod
    def degrevlex(cls, *groups: str) -> MonomialOrder:
        return cls(OrderKind.degrevlex, groups)

    @classmethod
    def block(cls, eliminated: Sequence[str], *groups: str) -> MonomialOrder:
        if not eliminated:
            raise ValueError("a block order needs a nonempty eliminated block")
        return cls(OrderKind.block, groups, eliminated)

    @classmethod
    def default(cls) -> MonomialOrder:
        return cls.degrevlex("dr", "dl", "dp", "p", "dt")

    def induced_adjoint(self) -> MonomialOrder:
        return induced_adjoint_order(self)

    def priority(self, signature: AlgebraSignature) -> Tuple[int, ...]:
        """Indices of the signature letters, highest priority first."""
        return _priority(self.groups, signature.letter_kinds)

    def key(self, signature: AlgebraSignature) -> Callable[[Monomial], MonomialKey]:
        """A sort key: ``key(u) < key(v)`` exactly when ``u`` precedes ``v``."""
        return _bind(self, signature.letter_kinds, signature.letters)

    def leading(self, monomials: Sequence[Monomial], signature: AlgebraSignature) -> Monomial:
        return max(monomials, key=self.key(signature))


def _priority(groups: Tuple[str, ...], letter_kinds: Tuple[str, ...]) -> Tuple[int, ...]:
    ranked = [i for g in groups for i, k in enumerate(letter_kinds) if k == g]
    ranked += [i for i, k in enumerate(letter_kinds) if k not in groups]
    return tuple(ranked)


def _degrevlex_key(indices: Tuple[int, ...]) -> Callable[[Monomial], MonomialKey]:
    reversed_indices = indices[::-1]

    def key(m: Monomial) -> MonomialKey:
        return (sum(m[i] for i in indices), *(-m[i] for i in reversed_indices))

    return key


@functools.lru_cache(maxsize=256)
def _bind(
    order: MonomialOrder, letter_kinds: Tuple[str, ...], letters: Tuple[str, ...]
) -> Callable[[Monomial], MonomialKey]:
    ranked = _priority(order.groups, letter_kinds)
    if order.kind is OrderKind.degrevlex:
        return _degrevlex_key(ranked)

    out = order.eliminated
    inner = tuple(i for i in ranked if letter_kinds[i] in out or letters[i] in out)
    outer = tuple(i for i in ranked if i not in inner)
    inner_key, outer_key = _degrevlex_key(inner), _degrevlex_key(outer)

    def key(m: Monomial) -> MonomialKey:
        return (*inner_key(m), *outer_key(m))

    return key


def compare(m1: Monomial, m2: Monomial, order: MonomialOrder, signature: AlgebraSignature) -> int:
    """``-1``, ``0`` or ``1`` as ``m1`` precedes, equals or follows ``m2``."""
    key = order.key(signature)
    k1, k2 = key(m1), key(m2)
    return (k1 > k2) - (k1 < k2)


def _swap(name: str) -> str:
    if name in ("p", "dp"):
        return "dp" if name == "p" else "p"
    if name.startswith("dp"):
        return name[1:]
    if name.startswith("p"):
        return "d" + name
    return name


def induced_adjoint_order(order: MonomialOrder) -> MonomialOrder:
    """The order ``u ≼⋆ v`` iff ``u⋆ ≼ v⋆`` for a degree-preserving adjunction.

    Adjunction exchanges ``p_i`` and ``dp_i`` up to a nonzero factor, so the
    induced order swaps the two kinds in the priority list.
    """
    return MonomialOrder(
        order.kind,
        tuple(_swap(g) for g in order.groups),
        frozenset(_swap(g) for g in order.eliminated),
    )
