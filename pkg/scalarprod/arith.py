from __future__ import annotations

import functools
import logging
from typing import Any, Dict, Iterable, List, Mapping, Optional, Sequence, Tuple

import attrs
import sympy
from sympy import QQ
from sympy.polys.fields import FracElement, FracField
from sympy.polys.orderings import grlex
from sympy.polys.rings import PolyElement, PolyRing

from scalarprod.errors import SubstitutionError
from scalarprod.utils import format_rational, to_expr, to_names

__all__: Tuple[str, ...] = (
    "QQ",
    "rational",
    "poly_ring",
    "poly_arith",
    "poly_gcd",
    "primitive_part",
    "ratfun_arith",
    "format_poly",
    "CoefficientField",
    "TSeries",
)
_log = logging.getLogger(__name__)


def rational(numerator: Any, denominator: Any = 1) -> Any:
    """An exact rational, always stored reduced with a positive denominator."""
    return QQ(int(numerator), int(denominator))


@functools.lru_cache(maxsize=None)
def poly_ring(names: Tuple[str, ...]) -> PolyRing:
    if not names:
        raise ValueError("a polynomial ring needs at least one indeterminate")
    if len(set(names)) != len(names):
        raise ValueError(f"duplicate indeterminates in {names}")
    return PolyRing(names, QQ, grlex)


@functools.lru_cache(maxsize=None)
def _frac_field(names: Tuple[str, ...]) -> FracField:
    return FracField(names, QQ, grlex)


def _ring_names(ring: PolyRing) -> Tuple[str, ...]:
    return tuple(str(s) for s in ring.symbols)


def _unify(a: PolyElement, b: PolyElement) -> Tuple[PolyElement, PolyElement]:
    if a.ring == b.ring:
        return a, b
    names = list(_ring_names(a.ring))
    names += [n for n in _ring_names(b.ring) if n not in names]
    ring = poly_ring(tuple(names))
    return a.set_ring(ring), b.set_ring(ring)


def poly_arith(a: PolyElement, b: PolyElement, op: str) -> PolyElement:
    a, b = _unify(a, b)
    if op == "add":
        return a + b
    if op == "sub":
        return a - b
    if op == "mul":
        return a * b
    raise ValueError(f"unknown polynomial operation {op!r}")


def _normalize_sign(p: PolyElement) -> PolyElement:
    if p and p.LC < 0:
        return -p
    return p


def poly_gcd(a: PolyElement, b: PolyElement) -> PolyElement:
    """Greatest common divisor, primitive over the integers with a positive leading coefficient."""
    a, b = _unify(a, b)
    if not a and not b:
        return a.ring.zero
    g = a.gcd(b)
    return _normalize_sign(g.primitive()[1])


def primitive_part(a: PolyElement, wrt: Iterable[str] = ()) -> Tuple[PolyElement, PolyElement]:
    """Split ``a`` as ``content * primitive``.

    The content is a polynomial in the ``wrt`` indeterminates only (times a
    rational number); the primitive part has positive leading coefficient.
    """
    ring = a.ring
    if not a:
        return ring.one, ring.zero

    names = _ring_names(ring)
    wrt = set(wrt)
    unknown = wrt.difference(names)
    if unknown:
        raise ValueError(f"{sorted(unknown)} are not indeterminates of {names}")
    keep = [i for i, n in enumerate(names) if n in wrt]

    g = ring.zero
    if keep:
        groups: Dict[Tuple[int, ...], PolyElement] = {}
        for monom, coeff in a.iterterms():
            outer = tuple(e if i not in keep else 0 for i, e in enumerate(monom))
            inner = tuple(e if i in keep else 0 for i, e in enumerate(monom))
            groups[outer] = groups.get(outer, ring.zero) + ring.term_new(inner, coeff)
        for part in groups.values():
            g = part if not g else g.gcd(part)
        g = _normalize_sign(g.primitive()[1])
    else:
        g = ring.one

    rest = a.exquo(g)
    number, prim = rest.primitive()
    if prim.LC < 0:
        number, prim = -number, -prim
    return g.mul_ground(number), prim


def ratfun_arith(a: FracElement, b: FracElement, op: str) -> FracElement:
    if a.field != b.field:
        names = list(str(s) for s in a.field.symbols)
        names += [str(s) for s in b.field.symbols if str(s) not in names]
        field = _frac_field(tuple(names))
        a, b = a.set_field(field), b.set_field(field)
    if op == "add":
        return a + b
    if op == "sub":
        return a - b
    if op == "mul":
        return a * b
    if op == "div":
        return a / b
    raise ValueError(f"unknown rational function operation {op!r}")


def _format_monomial(monom: Sequence[int], names: Sequence[str]) -> str:
    parts: List[str] = []
    for name, e in zip(names, monom):
        if e == 1:
            parts.append(name)
        elif e > 1:
            parts.append(f"{name}^{e}")
    return "*".join(parts)


def format_terms(terms: Iterable[Tuple[str, Any]]) -> str:
    """Join ``(monomial text, rational coefficient)`` pairs into ``a - b + c`` form."""
    out = ""
    for mon, coeff in terms:
        negative = coeff < 0
        mag = -coeff if negative else coeff
        if not mon:
            body = format_rational(mag)
        elif mag == 1:
            body = mon
        else:
            body = f"{format_rational(mag)}*{mon}"
        if not out:
            out = f"-{body}" if negative else body
        else:
            out += f" - {body}" if negative else f" + {body}"
    return out or "0"


def format_poly(p: PolyElement) -> str:
    names = _ring_names(p.ring)
    return format_terms((_format_monomial(m, names), c) for m, c in p.terms())


@attrs.define(slots=True, frozen=True)
class CoefficientField:
    """The field of coefficients of an operator algebra.

    Rational functions over :data:`QQ` in ``names`` (the t-variables followed by
    the formal parameters), or :data:`QQ` itself when ``names`` is empty.
    Denominators are kept with positive leading coefficient under grlex.
    """

    names: Tuple[str, ...] = attrs.field(converter=to_names)
    _field: Optional[FracField] = attrs.field(init=False, eq=False, repr=False)
    _index: Dict[str, int] = attrs.field(init=False, eq=False, repr=False)

    def __attrs_post_init__(self) -> None:
        object.__setattr__(self, "_field", _frac_field(self.names) if self.names else None)
        object.__setattr__(self, "_index", {n: i for i, n in enumerate(self.names)})

    @property
    def ring(self) -> Optional[PolyRing]:
        return None if self._field is None else self._field.ring

    @property
    def zero(self) -> Any:
        return QQ.zero if self._field is None else self._field.zero

    @property
    def one(self) -> Any:
        return QQ.one if self._field is None else self._field.one

    def __contains__(self, name: str) -> bool:
        return name in self._index

    def index(self, name: str) -> int:
        try:
            return self._index[name]
        except KeyError:
            raise ValueError(f"{name!r} is not a coefficient variable of {self.names}")

    def gen(self, name: str) -> FracElement:
        return self._field.gens[self.index(name)]  # type: ignore

    def __call__(self, value: Any) -> Any:
        if isinstance(value, str):
            value = to_expr(value)
        if self._field is None:
            if isinstance(value, sympy.Basic):
                if value.free_symbols:
                    raise ValueError(f"{value} is not a rational number")
                return QQ.from_sympy(value)
            return QQ.convert(value)
        if isinstance(value, sympy.Basic):
            names = {str(s) for s in value.free_symbols}
            if not names.issubset(self._index):
                raise ValueError(f"{value} involves symbols outside {self.names}")
            return self._canonical(self._field.from_expr(value))
        if isinstance(value, FracElement) and value.field != self._field:
            source = CoefficientField(tuple(str(s) for s in value.field.symbols))
            return self.convert_from(value, source)
        return self._canonical(self._field(value))

    def _canonical(self, c: FracElement) -> FracElement:
        c = self._field.new(c.numer, c.denom)  # type: ignore
        if c.denom.LC < 0:
            c = self._field.raw_new(-c.numer, -c.denom)  # type: ignore
        return c

    def diff(self, c: Any, name: str) -> Any:
        if self._field is None or name not in self._index or not c:
            return self.zero
        return c.diff(self.gen(name))

    def subs_zero(self, c: Any, name: str) -> Any:
        if self._field is None or name not in self._index or not c:
            return c
        i = self._index[name]
        numer, denom = c.numer.subs(i, 0), c.denom.subs(i, 0)
        if not denom:
            raise SubstitutionError(f"denominator {format_poly(c.denom)} vanishes at {name} = 0")
        return self._canonical(self._field.new(numer, denom))

    def is_constant(self, c: Any) -> bool:
        return self._field is None or (c.numer.is_ground and c.denom.is_ground)

    def involves(self, c: Any, name: str) -> bool:
        if self._field is None or name not in self._index or not c:
            return False
        i = self._index[name]
        return c.numer.degree(i) > 0 or c.denom.degree(i) > 0

    def numer_denom(self, c: Any) -> Tuple[Any, Any]:
        if self._field is None:
            return QQ(c.numerator), QQ(c.denominator)
        return c.numer, c.denom

    def from_poly(self, p: Any) -> Any:
        if self._field is None:
            return QQ.convert(p)
        return self._field.raw_new(p)

    def convert_from(
        self, c: Any, source: CoefficientField, rename: Optional[Mapping[str, str]] = None
    ) -> Any:
        """Move ``c`` from ``source`` into this field, renaming variables on the way."""
        if source._field is None:
            return self(c)
        if source == self and not rename:
            return c
        rename = rename or {}
        num = self._move_poly(c.numer, source, rename)
        den = self._move_poly(c.denom, source, rename)
        if self._field is None:
            return num / den
        return self._canonical(self._field.new(num, den))

    def _move_poly(
        self, p: PolyElement, source: CoefficientField, rename: Mapping[str, str]
    ) -> Any:
        if self._field is None:
            if not p.is_ground:
                raise SubstitutionError(f"{format_poly(p)} is not constant")
            return QQ.convert(p.LC) if p else QQ.zero

        ring = self._field.ring
        targets: List[int] = []
        for name in source.names:
            target = rename.get(name, name)
            targets.append(self._index.get(target, -1))

        out: Dict[Tuple[int, ...], Any] = {}
        width = len(self.names)
        for monom, coeff in p.iterterms():
            exps = [0] * width
            for i, e in enumerate(monom):
                if not e:
                    continue
                j = targets[i]
                if j < 0:
                    raise SubstitutionError(f"{source.names[i]} has no counterpart in {self.names}")
                exps[j] += e
            key = tuple(exps)
            out[key] = out.get(key, QQ.zero) + coeff
        return ring.from_dict({k: v for k, v in out.items() if v})

    def normalize_coefficients(self, coeffs: Sequence[Any], *, full: bool = True) -> List[Any]:
        """Scale ``coeffs`` by one common factor so they become coprime polynomials.

        The first coefficient ends with a positive leading integer coefficient.
        With ``full=False`` only the rational content is removed and common
        polynomial factors are kept.
        """
        if not coeffs:
            return []
        if self._field is None:
            den = 1
            for c in coeffs:
                den = sympy.ilcm(den, int(c.denominator))
            nums = [int(c.numerator) * (den // int(c.denominator)) for c in coeffs]
            g = 0
            for n in nums:
                g = sympy.igcd(g, n)
            sign = -1 if nums[0] < 0 else 1
            return [QQ(sign * n // g) for n in nums]

        ring = self._field.ring
        den = ring.one
        for c in coeffs:
            den = den.lcm(c.denom)
        nums = [c.numer * den.exquo(c.denom) for c in coeffs]
        if full:
            g = ring.zero
            for n in nums:
                g = n if not g else g.gcd(n)
                if g.is_ground:
                    break
            if not g.is_ground:
                nums = [n.exquo(g) for n in nums]
        cont = QQ.zero
        for n in nums:
            cont = QQ.gcd(cont, n.content())
        nums = [n.quo_ground(cont) for n in nums]
        if nums[0].LC < 0:
            nums = [-n for n in nums]
        return [self._field.raw_new(n) for n in nums]

    def to_text(self, c: Any) -> str:
        if self._field is None:
            return format_rational(c)
        num = format_poly(c.numer)
        if c.denom == 1:
            return num
        den = format_poly(c.denom)
        if len(c.numer) > 1:
            num = f"({num})"
        if len(c.denom) > 1 or not c.denom.is_ground:
            den = f"({den})"
        return f"{num}/{den}"


_RATIONALS = CoefficientField(())


@attrs.define(slots=True, frozen=True)
class TSeries:
    """A power series in one variable known up to ``precision``.

    ``coefficients[n]`` is the coefficient of t^n. A ``precision`` of ``None``
    marks an exact polynomial; otherwise only indices below ``precision`` are known.
    """

    coefficients: Tuple[Any, ...] = attrs.field(converter=tuple)
    precision: Optional[int] = None
    field: CoefficientField = _RATIONALS

    def __len__(self) -> int:
        return len(self.coefficients)

    def __getitem__(self, n: int) -> Any:
        if n < 0:
            return self.field.zero
        if self.precision is not None and n >= self.precision:
            raise IndexError(f"coefficient {n} lies beyond the known precision {self.precision}")
        if n < len(self.coefficients):
            return self.coefficients[n]
        return self.field.zero

    @property
    def known(self) -> int:
        return len(self.coefficients) if self.precision is None else self.precision

    def truncate(self, order: int) -> TSeries:
        known = min(order, self.known) if self.precision is not None else order
        coeffs = tuple(self[n] for n in range(known))
        return TSeries(coeffs, known, self.field)

    def valuation(self) -> Optional[int]:
        for n, c in enumerate(self.coefficients):
            if c:
                return n
        return None

    def to_text(self, var: str = "t") -> str:
        parts: List[str] = []
        for n, c in enumerate(self.coefficients):
            if not c:
                continue
            coeff = self.field.to_text(c)
            if n == 0:
                parts.append(coeff)
            else:
                mon = var if n == 1 else f"{var}^{n}"
                parts.append(mon if coeff == "1" else f"({coeff})*{mon}")
        body = " + ".join(parts) or "0"
        if self.precision is None:
            return body
        return f"{body} + O({var}^{self.precision})"
