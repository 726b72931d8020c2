from __future__ import annotations

import functools
import itertools
import logging
from math import comb, factorial
from typing import (
    TYPE_CHECKING,
    Any,
    Callable,
    Dict,
    Iterable,
    Iterator,
    List,
    Mapping,
    Optional,
    Sequence,
    Tuple,
    Union,
)

import attrs
import sympy

from scalarprod.arith import QQ, CoefficientField, TSeries
from scalarprod.errors import (
    InsufficientTruncation,
    SignatureMismatch,
    SubstitutionError,
)
from scalarprod.orders import MonomialOrder
from scalarprod.utils import to_names

if TYPE_CHECKING:
    from scalarprod.types import OperatorPayload, SignaturePayload

__all__: Tuple[str, ...] = (
    "AlgebraSignature",
    "WeylOperator",
    "Monomial",
    "op_mul",
    "substitute",
    "ExpandLeft",
    "SpecializeZero",
    "Rescale",
    "RenameToP",
    "apply_to_t_series",
    "act_on_expr",
)
_log = logging.getLogger(__name__)

Monomial = Tuple[int, ...]
BLOCK_KINDS: Tuple[str, ...] = ("dt", "dl", "dr")


def _to_blocks(_v: Union[str, Iterable[str], None]) -> Tuple[str, ...]:
    blocks = set(to_names(_v))
    unknown = blocks.difference(BLOCK_KINDS)
    if unknown:
        raise ValueError(f"unknown differential blocks {sorted(unknown)}")
    return tuple(b for b in BLOCK_KINDS if b in blocks)


@attrs.define(slots=True, frozen=True)
class AlgebraSignature:
    """The letters of an operator algebra.

    Monomials are exponent vectors laid out as ``[p | dp | block_1 | block_2 ...]``
    where every block holds one letter per t-variable. The t-variables and the
    formal parameters live in the coefficient field, so a ``t`` never appears in
    a monomial: ``[dt_i, t_j] = [dl_i, t_j] = [dr_i, t_j] = δ_ij`` is realized by
    the block letters differentiating coefficients.

    Attributes
    ----------
    p_vars: Tuple[:class:`str`, ...]
        Power-sum variables, ``p1, p2, ...``; each comes with its partner ``dp1, ...``.
    t_vars: Tuple[:class:`str`, ...]
        Variables of the coefficient field with differential partners.
    blocks: Tuple[:class:`str`, ...]
        Which of ``dt``, ``dl``, ``dr`` exist for every t-variable.
    params: Tuple[:class:`str`, ...]
        Inert formal parameters of the coefficient field.
    """

    p_vars: Tuple[str, ...] = attrs.field(factory=tuple, converter=to_names)
    t_vars: Tuple[str, ...] = attrs.field(factory=tuple, converter=to_names)
    blocks: Tuple[str, ...] = attrs.field(factory=tuple, converter=_to_blocks)
    params: Tuple[str, ...] = attrs.field(factory=tuple, converter=to_names)
    letters: Tuple[str, ...] = attrs.field(init=False, eq=False, repr=False)
    letter_kinds: Tuple[str, ...] = attrs.field(init=False, eq=False, repr=False)
    block_t_index: Tuple[int, ...] = attrs.field(init=False, eq=False, repr=False)
    field: CoefficientField = attrs.field(init=False, eq=False, repr=False)
    _index: Dict[str, int] = attrs.field(init=False, eq=False, repr=False)

    def __attrs_post_init__(self) -> None:
        for p in self.p_vars:
            if not p.startswith("p"):
                raise ValueError(f"power-sum variable {p!r} must be named p<index>")
        for t in self.t_vars:
            if not t.startswith("t"):
                raise ValueError(f"variable {t!r} must be named t<index>")
        if self.blocks and not self.t_vars:
            raise ValueError("differential blocks need at least one t-variable")

        letters = list(self.p_vars) + ["d" + p for p in self.p_vars]
        kinds = ["p"] * len(self.p_vars) + ["dp"] * len(self.p_vars)
        t_index: List[int] = []
        for block in self.blocks:
            letters += [block + t[1:] for t in self.t_vars]
            kinds += [block] * len(self.t_vars)
            t_index += list(range(len(self.t_vars)))

        names = letters + list(self.t_vars) + list(self.params)
        if len(set(names)) != len(names):
            raise ValueError(f"variable names are not unique: {names}")

        object.__setattr__(self, "letters", tuple(letters))
        object.__setattr__(self, "letter_kinds", tuple(kinds))
        object.__setattr__(self, "block_t_index", tuple(t_index))
        object.__setattr__(self, "field", CoefficientField(self.t_vars + self.params))
        object.__setattr__(self, "_index", {name: i for i, name in enumerate(letters)})

    @property
    def n(self) -> int:
        return len(self.p_vars)

    @property
    def k(self) -> int:
        return len(self.t_vars)

    @property
    def width(self) -> int:
        return len(self.letters)

    def __contains__(self, letter: str) -> bool:
        return letter in self._index

    def index(self, letter: str) -> int:
        try:
            return self._index[letter]
        except KeyError:
            raise SignatureMismatch(f"{letter!r} is not a letter of {self.describe()}")

    def block_letter(self, block: str, t_name: str) -> str:
        return block + t_name[1:]

    def block_slice(self, block: str) -> slice:
        start = 2 * self.n + self.blocks.index(block) * self.k
        return slice(start, start + self.k)

    @property
    def one(self) -> Monomial:
        return (0,) * self.width

    def monomial(self, exponents: Mapping[str, int]) -> Monomial:
        m = [0] * self.width
        for letter, e in exponents.items():
            m[self.index(letter)] += int(e)
        return tuple(m)

    def evolve(self, **changes: Any) -> AlgebraSignature:
        return attrs.evolve(self, **changes)

    def without_t(self, name: str) -> AlgebraSignature:
        return self.evolve(t_vars=tuple(t for t in self.t_vars if t != name))

    def describe(self) -> str:
        parts = list(self.letters)
        inner = ", ".join(parts) or "-"
        coeffs = ", ".join(self.field.names)
        return f"W[{inner}]({coeffs})" if coeffs else f"W[{inner}]"

    def to_dict(self) -> SignaturePayload:
        return {
            "p_vars": list(self.p_vars),
            "t_vars": list(self.t_vars),
            "blocks": list(self.blocks),
            "params": list(self.params),
        }

    @classmethod
    def from_data(cls, data: SignaturePayload) -> AlgebraSignature:
        return cls(
            p_vars=data.get("p_vars", ()),
            t_vars=data.get("t_vars", ()),
            blocks=data.get("blocks", ()),
            params=data.get("params", ()),
        )


@functools.lru_cache(maxsize=4096)
def _commute_dp_p(b: Monomial, a: Monomial) -> Tuple[Tuple[int, Monomial], ...]:
    # dp^b * p^a = sum_j C(b, j) a!/(a-j)! p^(a-j) dp^(b-j), one factor per variable
    per_var: List[List[Tuple[int, int]]] = []
    for bi, ai in zip(b, a):
        per_var.append(
            [(comb(bi, j) * factorial(ai) // factorial(ai - j), j) for j in range(min(ai, bi) + 1)]
        )
    out: List[Tuple[int, Monomial]] = []
    for choice in itertools.product(*per_var):
        coeff = 1
        for c, _ in choice:
            coeff *= c
        out.append((coeff, tuple(j for _, j in choice)))
    return tuple(out)


@functools.lru_cache(maxsize=4096)
def _leibniz(d: Monomial) -> Tuple[Tuple[int, Monomial], ...]:
    out: List[Tuple[int, Monomial]] = []
    for j in itertools.product(*(range(e + 1) for e in d)):
        coeff = 1
        for e, ji in zip(d, j):
            coeff *= comb(e, ji)
        out.append((coeff, j))
    return tuple(out)


def _derivative(
    c: Any, signature: AlgebraSignature, orders: Sequence[int], cache: Dict[Any, Any]
) -> Any:
    key = tuple(orders)
    if key in cache:
        return cache[key]
    result = c
    for t_name, times in zip(signature.t_vars, orders):
        for _ in range(times):
            if not result:
                break
            result = signature.field.diff(result, t_name)
    cache[key] = result
    return result


@attrs.define(slots=True, frozen=True, eq=False, repr=False)
class WeylOperator:
    """An element of an operator algebra in normal form.

    Coefficients from :attr:`AlgebraSignature.field` stand on the left of each
    monomial; the monomial's letters follow the signature's letter order.
    ``terms`` never stores a zero coefficient.
    """

    signature: AlgebraSignature
    terms: Mapping[Monomial, Any]

    @classmethod
    def from_terms(
        cls, signature: AlgebraSignature, terms: Iterable[Tuple[Monomial, Any]]
    ) -> WeylOperator:
        out: Dict[Monomial, Any] = {}
        for m, c in terms:
            out[m] = out[m] + c if m in out else c
        return cls(signature, {m: c for m, c in out.items() if c})

    @classmethod
    def zero(cls, signature: AlgebraSignature) -> WeylOperator:
        return cls(signature, {})

    @classmethod
    def constant(cls, signature: AlgebraSignature, value: Any = 1) -> WeylOperator:
        c = signature.field(value)
        return cls(signature, {signature.one: c} if c else {})

    @classmethod
    def monomial(
        cls, signature: AlgebraSignature, m: Monomial, coefficient: Any = None
    ) -> WeylOperator:
        c = signature.field.one if coefficient is None else coefficient
        return cls(signature, {tuple(m): c} if c else {})

    @classmethod
    def letter(cls, signature: AlgebraSignature, name: str) -> WeylOperator:
        if name in signature:
            return cls.monomial(signature, signature.monomial({name: 1}))
        if name in signature.field:
            return cls(signature, {signature.one: signature.field.gen(name)})
        raise SignatureMismatch(f"{name!r} is not a letter of {signature.describe()}")

    def __bool__(self) -> bool:
        return bool(self.terms)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, WeylOperator):
            return NotImplemented
        return self.signature == other.signature and dict(self.terms) == dict(other.terms)

    def __hash__(self) -> int:
        return hash((self.signature, frozenset(self.terms.items())))

    def __repr__(self) -> str:
        return f"<WeylOperator {self.to_text()} over {self.signature.describe()}>"

    def __str__(self) -> str:
        return self.to_text()

    def _check(self, other: WeylOperator) -> None:
        if self.signature != other.signature:
            raise SignatureMismatch(
                f"cannot combine operators over {self.signature.describe()} "
                f"and {other.signature.describe()}"
            )

    def __add__(self, other: WeylOperator) -> WeylOperator:
        self._check(other)
        out = dict(self.terms)
        for m, c in other.terms.items():
            out[m] = out[m] + c if m in out else c
        return WeylOperator(self.signature, {m: c for m, c in out.items() if c})

    def __neg__(self) -> WeylOperator:
        return WeylOperator(self.signature, {m: -c for m, c in self.terms.items()})

    def __sub__(self, other: WeylOperator) -> WeylOperator:
        return self + (-other)

    def __mul__(self, other: Any) -> WeylOperator:
        if isinstance(other, WeylOperator):
            return op_mul(self, other)
        return op_mul(self, WeylOperator.constant(self.signature, other))

    def __rmul__(self, other: Any) -> WeylOperator:
        return self.scale(self.signature.field(other))

    def __pow__(self, e: int) -> WeylOperator:
        if e < 0:
            raise ValueError("operators can only be raised to nonnegative powers")
        result = WeylOperator.constant(self.signature)
        for _ in range(e):
            result = op_mul(result, self)
        return result

    def scale(self, c: Any) -> WeylOperator:
        """Left multiplication by a coefficient."""
        if not c:
            return WeylOperator.zero(self.signature)
        return WeylOperator(self.signature, {m: c * v for m, v in self.terms.items()})

    def coefficient(self, m: Monomial) -> Any:
        return self.terms.get(tuple(m), self.signature.field.zero)

    def sorted_terms(self, order: Optional[MonomialOrder] = None) -> List[Tuple[Monomial, Any]]:
        key = (order or MonomialOrder.default()).key(self.signature)
        return sorted(self.terms.items(), key=lambda item: key(item[0]), reverse=True)

    def lm(self, order: Optional[MonomialOrder] = None) -> Monomial:
        if not self.terms:
            raise ValueError("the zero operator has no leading monomial")
        key = (order or MonomialOrder.default()).key(self.signature)
        return max(self.terms, key=key)

    def lc(self, order: Optional[MonomialOrder] = None) -> Any:
        return self.terms[self.lm(order)]

    def leading_coefficient(self, order: Optional[MonomialOrder] = None) -> Any:
        return self.lc(order)

    def degree(self) -> int:
        return max((sum(m) for m in self.terms), default=-1)

    def order_in(self, letter: str) -> int:
        i = self.signature.index(letter)
        return max((m[i] for m in self.terms), default=-1)

    def involves(self, letter: str) -> bool:
        i = self.signature.index(letter)
        return any(m[i] for m in self.terms)

    def is_pure(self, *kinds: str) -> bool:
        """Whether every monomial only uses letters of the given kinds."""
        allowed = [k in kinds for k in self.signature.letter_kinds]
        return all(not e or ok for m in self.terms for e, ok in zip(m, allowed))

    def map_coefficients(self, fn: Callable[[Any], Any]) -> WeylOperator:
        return WeylOperator.from_terms(self.signature, ((m, fn(c)) for m, c in self.terms.items()))

    def normalized(
        self, order: Optional[MonomialOrder] = None, *, full: bool = True
    ) -> WeylOperator:
        """The canonical left multiple of this operator.

        Denominators are cleared, the content is removed (the whole polynomial
        content in t and the parameters, or only the rational part when ``full``
        is false) and the leading coefficient gets a positive leading integer.
        """
        if not self.terms:
            return self
        items = self.sorted_terms(order)
        coeffs = self.signature.field.normalize_coefficients([c for _, c in items], full=full)
        return WeylOperator(self.signature, {m: c for (m, _), c in zip(items, coeffs)})

    def primitive(self, order: Optional[MonomialOrder] = None) -> WeylOperator:
        return self.normalized(order, full=False)

    def convert(
        self, signature: AlgebraSignature, rename: Optional[Mapping[str, str]] = None
    ) -> WeylOperator:
        """The same operator read in another signature, letters matched by name."""
        rename = rename or {}
        source = self.signature
        targets: List[int] = []
        for letter in source.letters:
            target = rename.get(letter, letter)
            targets.append(signature._index.get(target, -1))

        out: Dict[Monomial, Any] = {}
        for m, c in self.terms.items():
            new = [0] * signature.width
            for i, e in enumerate(m):
                if not e:
                    continue
                if targets[i] < 0:
                    raise SignatureMismatch(
                        f"{source.letters[i]} has no counterpart in {signature.describe()}"
                    )
                new[targets[i]] += e
            key = tuple(new)
            value = signature.field.convert_from(c, source.field, rename)
            out[key] = out[key] + value if key in out else value
        return WeylOperator(signature, {m: c for m, c in out.items() if c})

    def monomial_text(self, m: Monomial) -> str:
        parts: List[str] = []
        for letter, e in zip(self.signature.letters, m):
            if e == 1:
                parts.append(letter)
            elif e > 1:
                parts.append(f"{letter}^{e}")
        return "*".join(parts)

    def to_text(self, order: Optional[MonomialOrder] = None) -> str:
        field = self.signature.field
        out = ""
        for m, c in self.sorted_terms(order):
            mon = self.monomial_text(m)
            numer, _ = field.numer_denom(c)
            if field.ring is None:
                negative = c < 0
            else:
                negative = len(numer) == 1 and numer.LC < 0
            text = field.to_text(-c if negative else c)
            compound = " " in text or (mon and "/" in text and not field.is_constant(c))
            if not mon:
                body = f"({text})" if compound and out else text
            elif text == "1":
                body = mon
            else:
                body = f"({text})*{mon}" if compound else f"{text}*{mon}"
            if not out:
                out = f"-{body}" if negative else body
            else:
                out += f" - {body}" if negative else f" + {body}"
        return out or "0"

    def to_dict(self) -> OperatorPayload:
        field = self.signature.field
        terms = []
        for m, c in self.sorted_terms():
            numer, denom = field.numer_denom(c)
            terms.append(
                {
                    "numerator": _poly_text(numer, field),
                    "denominator": _poly_text(denom, field),
                    "monomial": {
                        letter: e for letter, e in zip(self.signature.letters, m) if e
                    },
                }
            )
        return {"signature": self.signature.to_dict(), "terms": terms, "text": self.to_text()}

    @classmethod
    def from_data(cls, data: OperatorPayload) -> WeylOperator:
        signature = AlgebraSignature.from_data(data["signature"])
        field = signature.field
        terms = []
        for term in data["terms"]:
            c = field(term["numerator"]) / field(term["denominator"])
            terms.append((signature.monomial(term["monomial"]), c))
        return cls.from_terms(signature, terms)


def _poly_text(p: Any, field: CoefficientField) -> str:
    if field.ring is None:
        return field.to_text(p)
    return field.to_text(field.from_poly(p))


def op_mul(a: WeylOperator, b: WeylOperator) -> WeylOperator:
    """The product ``a * b`` brought back to normal form."""
    a._check(b)
    sig = a.signature
    n = sig.n
    t_index = sig.block_t_index
    k = sig.k
    out: Dict[Monomial, Any] = {}

    for m1, c1 in a.terms.items():
        pa1, pb1, d1 = m1[:n], m1[n : 2 * n], m1[2 * n :]
        leibniz = _leibniz(d1) if any(d1) else ((1, d1),)
        for m2, c2 in b.terms.items():
            pa2, pb2, d2 = m2[:n], m2[n : 2 * n], m2[2 * n :]
            commuted = _commute_dp_p(pb1, pa2)
            cache: Dict[Any, Any] = {}
            for lcoeff, j in leibniz:
                orders = [0] * k
                for pos, jj in enumerate(j):
                    if jj:
                        orders[t_index[pos]] += jj
                c2d = _derivative(c2, sig, orders, cache) if any(orders) else c2
                if not c2d:
                    continue
                coeff = c1 * c2d
                if lcoeff != 1:
                    coeff = coeff * lcoeff
                rest = tuple(x - y + z for x, y, z in zip(d1, j, d2))
                for ccoeff, jv in commuted:
                    mono = (
                        tuple(x + y - z for x, y, z in zip(pa1, pa2, jv))
                        + tuple(x - z + y for x, z, y in zip(pb1, jv, pb2))
                        + rest
                    )
                    value = coeff * ccoeff if ccoeff != 1 else coeff
                    out[mono] = out[mono] + value if mono in out else value

    return WeylOperator(sig, {m: c for m, c in out.items() if c})


class SubstitutionRule:
    """Base class of the supported substitution families."""

    def apply(self, op: WeylOperator) -> WeylOperator:
        raise NotImplementedError

    def __call__(self, op: WeylOperator) -> WeylOperator:
        return self.apply(op)


def substitute(op: WeylOperator, rule: SubstitutionRule) -> WeylOperator:
    return rule.apply(op)


@attrs.define(slots=True, frozen=True)
class ExpandLeft(SubstitutionRule):
    """Rewrite every ``dl_i`` as ``dt_i - dr_i`` on a normal form."""

    def apply(self, op: WeylOperator) -> WeylOperator:
        sig = op.signature
        if not {"dt", "dl", "dr"}.issubset(sig.blocks):
            raise SubstitutionError("expanding dl needs the dt, dl and dr blocks")
        dt, dl, dr = sig.block_slice("dt"), sig.block_slice("dl"), sig.block_slice("dr")
        out: Dict[Monomial, Any] = {}
        for m, c in op.terms.items():
            left = m[dl]
            if not any(left):
                out[m] = out[m] + c if m in out else c
                continue
            for j in itertools.product(*(range(e + 1) for e in left)):
                coeff = 1
                for e, ji in zip(left, j):
                    coeff *= comb(e, ji) * (-1) ** ji
                new = list(m)
                for i, (e, ji) in enumerate(zip(left, j)):
                    new[dl.start + i] = 0
                    new[dt.start + i] += e - ji
                    new[dr.start + i] += ji
                key = tuple(new)
                value = c * coeff
                out[key] = out[key] + value if key in out else value
        return WeylOperator(sig, {m: c for m, c in out.items() if c})


@attrs.define(slots=True, frozen=True)
class SpecializeZero(SubstitutionRule):
    """Set ``t = 0`` in an operator free of the differential letters of ``t``.

    The result lives in the signature without ``t``.
    """

    t_name: str

    def apply(self, op: WeylOperator) -> WeylOperator:
        sig = op.signature
        if self.t_name not in sig.t_vars:
            raise SubstitutionError(f"{self.t_name!r} is not a variable of {sig.describe()}")
        position = sig.t_vars.index(self.t_name)
        drop = [sig.block_slice(b).start + position for b in sig.blocks]
        for i in drop:
            if any(m[i] for m in op.terms):
                raise SubstitutionError(
                    f"cannot set {self.t_name} = 0 while {sig.letters[i]} is present"
                )
        target = sig.without_t(self.t_name)
        keep = [i for i in range(sig.width) if i not in drop]
        terms = []
        for m, c in op.terms.items():
            value = sig.field.subs_zero(c, self.t_name)
            if value:
                value = target.field.convert_from(value, sig.field)
                terms.append((tuple(m[i] for i in keep), value))
        return WeylOperator.from_terms(target, terms)


@attrs.define(slots=True, frozen=True)
class Rescale(SubstitutionRule):
    """The marker substitutions ``p_i -> t_i p_i`` of the Kronecker product.

    ``mode="shift"`` sends ``dp_i`` to ``t_i^-1 dp_i``; ``mode="swap"`` sends it to
    ``p_i^-1 dt_i`` and clears the p-denominators by a left monomial factor.
    ``target`` is the extended signature holding a ``t_i`` for every ``p_i``.
    """

    target: AlgebraSignature
    mode: str = attrs.field(validator=attrs.validators.in_(("shift", "swap")))

    def apply(self, op: WeylOperator) -> WeylOperator:
        sig, target = op.signature, self.target
        if sig.t_vars or sig.blocks:
            raise SubstitutionError("rescaling applies to operators in the p-letters only")
        if "dt" not in target.blocks:
            raise SubstitutionError("the target signature needs a dt block")
        n, tn = sig.n, target.n
        p_pos = [target.p_vars.index(p) for p in sig.p_vars]
        t_names = ["t" + p[1:] for p in sig.p_vars]
        for t in t_names:
            if t not in target.t_vars:
                raise SubstitutionError(f"{t!r} is missing from {target.describe()}")
        dt = target.block_slice("dt")
        t_pos = [target.t_vars.index(t) for t in t_names]
        field = target.field

        terms: List[Tuple[List[int], Any]] = []
        for m, c in op.terms.items():
            a, b = m[:n], m[n : 2 * n]
            coeff = field.convert_from(c, sig.field)
            new = [0] * target.width
            for i in range(n):
                gen = field.gen(t_names[i])
                if self.mode == "shift":
                    new[p_pos[i]] = a[i]
                    new[tn + p_pos[i]] = b[i]
                    shift = a[i] - b[i]
                else:
                    new[p_pos[i]] = a[i] - b[i]
                    new[dt.start + t_pos[i]] = b[i]
                    shift = a[i]
                if shift > 0:
                    coeff = coeff * gen**shift
                elif shift < 0:
                    coeff = coeff / gen ** (-shift)
            terms.append((new, coeff))

        lift = [0] * tn
        for new, _ in terms:
            for i in range(tn):
                lift[i] = max(lift[i], -new[i])
        cleared = []
        for new, coeff in terms:
            for i in range(tn):
                new[i] += lift[i]
            cleared.append((tuple(new), coeff))
        return WeylOperator.from_terms(target, cleared)


@attrs.define(slots=True, frozen=True)
class RenameToP(SubstitutionRule):
    """Read ``t_i`` as ``p_i`` and ``dt_i`` as ``dp_i``.

    The operator is first cleared of denominators; its t-monomials then move into
    the p-letters of ``target``, whose coefficient field keeps the parameters.
    """

    target: AlgebraSignature

    def apply(self, op: WeylOperator) -> WeylOperator:
        sig, target = op.signature, self.target
        if sig.n or sig.blocks != ("dt",):
            raise SubstitutionError("renaming to p-letters needs an operator in t and dt only")
        p_names = ["p" + t[1:] for t in sig.t_vars]
        p_pos = []
        for p in p_names:
            if p not in target.p_vars:
                raise SubstitutionError(f"{p!r} is missing from {target.describe()}")
            p_pos.append(target.p_vars.index(p))
        tn, k = target.n, sig.k
        dt = sig.block_slice("dt")
        cleared = op.normalized()
        source = sig.field
        param_field = CoefficientField(sig.params)

        terms: List[Tuple[Monomial, Any]] = []
        for m, c in cleared.terms.items():
            numer, _ = source.numer_denom(c)
            if source.ring is None:
                terms.append((_p_monomial(tn, p_pos, (0,) * k, m[dt]), target.field(numer)))
                continue
            for exps, coeff in numer.iterterms():
                t_exps, rest = exps[:k], exps[k:]
                value = _param_monomial(param_field, rest) * coeff
                value = target.field.convert_from(value, param_field)
                terms.append((_p_monomial(tn, p_pos, t_exps, m[dt]), value))
        return WeylOperator.from_terms(target, terms)


def _p_monomial(
    width: int, positions: Sequence[int], a: Sequence[int], b: Sequence[int]
) -> Monomial:
    m = [0] * (2 * width)
    for pos, ai, bi in zip(positions, a, b):
        m[pos] = ai
        m[width + pos] = bi
    return tuple(m)


def _param_monomial(field: CoefficientField, exps: Sequence[int]) -> Any:
    value = field.one
    for name, e in zip(field.names, exps):
        if e:
            value = value * field.gen(name) ** e
    return value


def _series_of(
    poly: Any, field: CoefficientField, t_name: str, target: CoefficientField
) -> Dict[int, Any]:
    """Split a coefficient polynomial by the power of ``t_name``."""
    if field.ring is None:
        return {0: target(poly)} if poly else {}
    position = field.index(t_name)
    others = [n for n in field.names if n != t_name]
    rest_field = CoefficientField(others) if others else None
    out: Dict[int, Any] = {}
    for exps, coeff in poly.iterterms():
        e = exps[position]
        rest = [x for i, x in enumerate(exps) if i != position]
        value = target(coeff)
        if rest_field is not None and any(rest):
            value = target.convert_from(_param_monomial(rest_field, rest), rest_field) * value
        out[e] = out[e] + value if e in out else value
    return {e: v for e, v in out.items() if v}


def _invert(series: Dict[int, Any], precision: int, field: CoefficientField) -> List[Any]:
    c0 = series.get(0)
    if not c0:
        raise SubstitutionError("the series has no constant term and cannot be inverted")
    inv = [field.one / c0]
    for m in range(1, precision):
        acc = field.zero
        for j in range(1, m + 1):
            if j in series:
                acc = acc + series[j] * inv[m - j]
        inv.append(-acc / c0)
    return inv


def apply_to_t_series(op: WeylOperator, s: TSeries, order: Optional[int] = None) -> TSeries:
    """The action of an operator in ``t, dt`` on a power series.

    Coefficients whose denominator vanishes at ``t = 0`` are handled by clearing
    all denominators first, which multiplies the result by a polynomial.
    ``order`` asks for that many coefficients of the result; when omitted every
    coefficient the input determines is returned.
    """
    sig = op.signature
    if sig.n or sig.k != 1 or sig.blocks != ("dt",):
        raise SignatureMismatch(f"expected an operator in one t-variable, got {sig.describe()}")
    t_name = sig.t_vars[0]
    field, target = sig.field, s.field
    position = field.index(t_name)

    terms = op.terms
    if any(_vanishes_at_zero(field.numer_denom(c)[1], field, position) for c in terms.values()):
        _log.debug("clearing denominators vanishing at %s = 0", t_name)
        terms = op.normalized().terms

    numerators: Dict[int, Dict[int, Any]] = {}
    denominators: Dict[int, Dict[int, Any]] = {}
    shift = 0
    for m, c in terms.items():
        j = m[0]
        numer, denom = field.numer_denom(c)
        numerators[j] = _series_of(numer, field, t_name, target)
        denominators[j] = _series_of(denom, field, t_name, target)
        shift = max(shift, j - min(numerators[j]))
    polynomial = all(list(d) == [0] for d in denominators.values())

    attainable: Optional[int] = None
    if s.precision is not None:
        attainable = max(s.precision - shift, 0)
    if order is None:
        if attainable is not None:
            order = attainable
        elif polynomial:
            order = len(s) + max((max(nu) for nu in numerators.values()), default=0)
        else:
            raise ValueError("a rational coefficient needs an explicit order")
    elif attainable is not None and order > attainable:
        raise InsufficientTruncation(order - 1, attainable - 1)

    result = [target.zero] * order
    for j, numer in numerators.items():
        inverse = _invert(denominators[j], order, target)
        coeff = [target.zero] * order
        for e, v in numer.items():
            for i in range(order - e):
                if inverse[i]:
                    coeff[e + i] = coeff[e + i] + v * inverse[i]
        for idx, ci in enumerate(coeff):
            if not ci:
                continue
            # [t^m] dt^j s = (m+1)...(m+j) s_{m+j}
            for m_ in range(order - idx):
                src = m_ + j
                if src >= len(s.coefficients):
                    break
                a = s.coefficients[src]
                if not a:
                    continue
                falling = 1
                for r in range(1, j + 1):
                    falling *= m_ + r
                result[idx + m_] = result[idx + m_] + ci * a * falling

    exact = polynomial and s.precision is None
    return TSeries(tuple(result), None if exact else order, target)


def _vanishes_at_zero(denom: Any, field: CoefficientField, position: int) -> bool:
    if field.ring is None:
        return False
    return not any(exps[position] == 0 for exps, _ in denom.iterterms())


def act_on_expr(op: WeylOperator, expr: sympy.Expr) -> sympy.Expr:
    """Apply an operator in ``p, dp, dt`` to a symbolic function."""
    sig = op.signature
    if any(b != "dt" for b in sig.blocks):
        raise SignatureMismatch("only dt blocks act on functions")
    symbols = {name: sympy.Symbol(name) for name in sig.p_vars + sig.t_vars + sig.params}
    n = sig.n
    total = sympy.Integer(0)
    for m, c in op.terms.items():
        derivs: List[Tuple[sympy.Symbol, int]] = []
        for i, p in enumerate(sig.p_vars):
            if m[n + i]:
                derivs.append((symbols[p], m[n + i]))
        for i, t in enumerate(sig.t_vars):
            e = m[2 * n + i] if sig.blocks else 0
            if e:
                derivs.append((symbols[t], e))
        value = sympy.diff(expr, *itertools.chain.from_iterable(derivs)) if derivs else expr
        factor = sympy.Integer(1)
        for i, p in enumerate(sig.p_vars):
            factor *= symbols[p] ** m[i]
        coeff = c.as_expr() if sig.field.ring is not None else QQ.to_sympy(c)
        total += coeff * factor * value
    return total


def _iter_monomials(width: int, degree: int) -> Iterator[Monomial]:
    if width == 0:
        if degree == 0:
            yield ()
        return
    for first in range(degree, -1, -1):
        for rest in _iter_monomials(width - 1, degree - first):
            yield (first, *rest)
