from __future__ import annotations

import logging
import math
from typing import TYPE_CHECKING, Any, Dict, Iterable, List, Optional, Sequence, Tuple

import attrs
import sympy
from sympy.polys.domains import FractionField
from sympy.polys.matrices import DomainMatrix
from sympy.polys.polyroots import roots
from sympy.polys.rings import PolyElement

from scalarprod.arith import QQ, CoefficientField, format_poly, format_terms, poly_ring
from scalarprod.errors import BFileError, InconclusiveGrowth, ParseError, SingularRecurrence
from scalarprod.parsing import Builder, parse_expression, parse_polynomial
from scalarprod.utils import Normalization, format_rational, to_expr
from scalarprod.weyl import WeylOperator

if TYPE_CHECKING:
    from scalarprod.types import GrowthPayload, RecurrencePayload, WindowPayload

__all__: Tuple[str, ...] = (
    "Recurrence",
    "SequenceWindow",
    "Growth",
    "ode_to_rec",
    "required_initial_indices",
    "unroll",
    "hadamard_rescale",
    "growth_exponent",
    "read_bfile",
    "write_bfile",
)
_log = logging.getLogger(__name__)

N_RING = poly_ring(("n",))
N_FIELD = CoefficientField(("n",))


def _to_coefficients(_v: Iterable[Any]) -> Tuple[PolyElement, ...]:
    out = []
    for q in _v:
        if isinstance(q, PolyElement):
            out.append(q.set_ring(N_RING) if q.ring != N_RING else q)
        else:
            out.append(N_RING.from_expr(to_expr(q)) if not isinstance(q, int) else N_RING(q))
    while out and not out[-1]:
        out.pop()
    return tuple(out)


def _shift_text(j: int) -> str:
    if j == 0:
        return "a(n)"
    return f"a(n+{j})" if j > 0 else f"a(n-{-j})"


@attrs.define(slots=True, frozen=True)
class Recurrence:
    """A linear recurrence ``sum_j q_j(n) a(n+j) = 0`` with polynomial coefficients.

    The recurrence holds for every ``n >= start``; values at negative indices count as zero.

    Attributes
    ----------
    coefficients: Tuple[:class:`PolyElement`, ...]
        ``q_0(n), ..., q_r(n)`` in the ring ``QQ[n]``. The last one is nonzero.
    start: :class:`int`
        The first index the relation holds at; negative for recurrences read off an
        operator, whose lowest coefficients only involve the first few terms.
    """

    coefficients: Tuple[PolyElement, ...] = attrs.field(converter=_to_coefficients)
    start: int = attrs.field(default=0, eq=False)

    def __attrs_post_init__(self) -> None:
        if not self.coefficients:
            raise ValueError("a recurrence needs a nonzero coefficient")

    @property
    def order(self) -> int:
        return len(self.coefficients) - 1

    @property
    def leading(self) -> PolyElement:
        return self.coefficients[-1]

    def degrees(self) -> Tuple[int, ...]:
        return tuple(q.degree() if q else -1 for q in self.coefficients)

    def normalized(self) -> Recurrence:
        """Rational content removed, ``q_r`` with a positive leading coefficient."""
        content = QQ.zero
        for q in self.coefficients:
            if q:
                content = QQ.gcd(content, q.content())
        coeffs = [q.quo_ground(content) for q in self.coefficients]
        if coeffs[-1].LC < 0:
            coeffs = [-q for q in coeffs]
        return Recurrence(coeffs, self.start)

    def shift(self, s: int) -> Recurrence:
        """The same relation read at ``n + s``."""
        n = N_RING.gens[0]
        return Recurrence([q.compose(n, n + s) for q in self.coefficients], self.start - s)

    def evaluate(self, n: int) -> List[Any]:
        return [q(n) if q else QQ.zero for q in self.coefficients]

    def residuals(self, window: SequenceWindow) -> List[Any]:
        """``sum_j q_j(n) a(n+j)`` for every ``n`` the window covers."""
        out = []
        r = self.order
        for n in range(window.start, window.end - r + 1):
            if n < 0:
                continue
            values = self.evaluate(n)
            out.append(sum((c * window[n + j] for j, c in enumerate(values)), QQ.zero))
        return out

    def satisfied_by(self, window: SequenceWindow) -> bool:
        return not any(self.residuals(window))

    def to_text(self) -> str:
        parts: List[str] = []
        for j in range(self.order, -1, -1):
            q = self.coefficients[j]
            if not q:
                continue
            shift = _shift_text(j)
            if q.is_ground:
                parts.append(format_terms([(shift, q.LC)]))
            elif len(q) > 1:
                parts.append(f"({format_poly(q)})*{shift}")
            else:
                parts.append(f"{format_poly(q)}*{shift}")
        return " + ".join(parts).replace("+ -", "- ") + " = 0"

    def __str__(self) -> str:
        return self.to_text()

    @classmethod
    def from_text(cls, text: str) -> Recurrence:
        """Read ``2*(n+1)*a(n+1) - 2*n*a(n) - a(n-2) = 0`` style text."""
        value = parse_expression(text, _RecurrenceBuilder())
        rest = value.pop(None, N_RING.zero)
        if rest:
            raise ParseError(f"the recurrence is inhomogeneous: {format_poly(rest)}", 0)
        value = {j: q for j, q in value.items() if q}
        if not value:
            raise ParseError("the recurrence has no a(...) terms", 0)
        low = min(value)  # type: ignore
        n = N_RING.gens[0]
        coeffs = [N_RING.zero] * (max(value) - low + 1)  # type: ignore
        for j, q in value.items():
            coeffs[j - low] = q.compose(n, n - low) if low else q  # type: ignore
        return cls(coeffs).normalized()

    def to_dict(self) -> RecurrencePayload:
        return {
            "order": self.order,
            "coefficients": [format_poly(q) for q in self.coefficients],
            "text": self.to_text(),
        }

    @classmethod
    def from_data(cls, data: RecurrencePayload) -> Recurrence:
        return cls([parse_polynomial(q, ("n",)) for q in data["coefficients"]])


Terms = Dict[Optional[int], PolyElement]


class _RecurrenceBuilder(Builder[Terms]):
    # ``None`` holds the part free of a(...)
    def number(self, value: int, position: int) -> Terms:
        return {None: N_RING(value)}

    def symbol(self, name: str, position: int) -> Terms:
        if name != "n":
            raise ParseError(f"unknown symbol {name!r}, expected n or a(n+j)", position)
        return {None: N_RING.gens[0]}

    def call(self, name: str, argument: Terms, position: int) -> Terms:
        if name != "a":
            raise ParseError(f"unknown sequence {name!r}", position)
        arg = argument.get(None, N_RING.zero)
        if set(argument) - {None} or arg.degree() != 1 or arg.coeff(N_RING.gens[0]) != 1:
            raise ParseError("sequence terms must read a(n+j) for an integer j", position)
        shift = arg - N_RING.gens[0]
        if not shift.is_ground or shift.LC != int(shift.LC):
            raise ParseError("sequence terms must read a(n+j) for an integer j", position)
        return {int(shift.LC): N_RING.one}

    def add(self, a: Terms, b: Terms) -> Terms:
        out = dict(a)
        for j, q in b.items():
            out[j] = out[j] + q if j in out else q
        return out

    def sub(self, a: Terms, b: Terms) -> Terms:
        return self.add(a, self.neg(b))

    def neg(self, a: Terms) -> Terms:
        return {j: -q for j, q in a.items()}

    def mul(self, a: Terms, b: Terms, position: int) -> Terms:
        if set(a) - {None} and set(b) - {None}:
            raise ParseError("products of sequence terms are not linear", position)
        if set(a) == {None}:
            a, b = b, a
        factor = b.get(None, N_RING.zero)
        return {j: q * factor for j, q in a.items()}

    def div(self, a: Terms, b: Terms, position: int) -> Terms:
        divisor = b.get(None, N_RING.zero)
        if set(b) != {None} or not divisor.is_ground or not divisor:
            raise ParseError("only division by nonzero numbers is allowed", position)
        return {j: q.quo_ground(divisor.LC) for j, q in a.items()}

    def pow(self, a: Terms, e: int, position: int) -> Terms:
        if set(a) != {None}:
            raise ParseError("sequence terms cannot be raised to powers", position)
        return {None: a[None] ** e}


@attrs.define(slots=True, frozen=True)
class SequenceWindow:
    """Consecutive exact values ``a(start), a(start+1), ...``.

    Attributes
    ----------
    start: :class:`int`
        Index of the first value.
    values: Tuple[Any, ...]
        Exact rationals.
    normalization: :class:`Normalization`
        ``EGF`` when the values are series coefficients whose counts are ``n!`` times larger.
    """

    start: int
    values: Tuple[Any, ...] = attrs.field(converter=lambda v: tuple(QQ.convert(x) for x in v))
    normalization: Normalization = attrs.field(default=Normalization.ogf, converter=Normalization)

    @property
    def end(self) -> int:
        """Index of the last value, ``start - 1`` for an empty window."""
        return self.start + len(self.values) - 1

    def __len__(self) -> int:
        return len(self.values)

    def __getitem__(self, n: int) -> Any:
        if not self.start <= n <= self.end:
            raise IndexError(f"index {n} outside the window {self.start}..{self.end}")
        return self.values[n - self.start]

    def indices(self) -> range:
        return range(self.start, self.end + 1)

    def counts(self) -> Tuple[Any, ...]:
        """The values as counts: multiplied by ``n!`` for an EGF window."""
        if self.normalization is Normalization.ogf:
            return self.values
        return tuple(v * math.factorial(n) for n, v in zip(self.indices(), self.values))

    def with_counts(self) -> SequenceWindow:
        return SequenceWindow(self.start, self.counts(), Normalization.ogf)

    def to_dict(self) -> WindowPayload:
        return {
            "start": self.start,
            "normalization": self.normalization.value,
            "values": [format_rational(v) for v in self.values],
            "counts": [format_rational(v) for v in self.counts()],
        }


def ode_to_rec(op: WeylOperator) -> Recurrence:
    """The recurrence satisfied by the coefficients of every power-series solution.

    ``t^i dt^j`` sends ``sum a_m t^m`` to a series whose n-th coefficient is
    ``(n-i+1)...(n-i+j) a(n-i+j)``. The terms are collected by shift
    ``j - i`` and renumbered so the lowest shift is ``min(shift, 0)``.
    """
    sig = op.signature
    if sig.n or sig.k != 1 or sig.blocks != ("dt",) or sig.params:
        raise ValueError(f"expected an operator in one t-variable over QQ, got {sig.describe()}")
    if not op:
        raise ValueError("the zero operator has no recurrence")
    field = sig.field
    op = op.normalized()

    contributions: List[Tuple[int, int, Any]] = []
    for m, c in op.terms.items():
        numer, _ = field.numer_denom(c)
        for (i,), cij in numer.iterterms():
            contributions.append((i, m[0], cij))
    s0 = min(min(j - i for i, j, _ in contributions), 0)
    top = max(j - i for i, j, _ in contributions) - s0

    n = N_RING.gens[0]
    coeffs = [N_RING.zero] * (top + 1)
    for i, j, cij in contributions:
        rising = N_RING.one
        for r in range(1, j + 1):
            rising *= n - s0 - i + r
        coeffs[j - i - s0] += rising.mul_ground(cij)
    rec = Recurrence(coeffs, s0).normalized()
    _log.debug(
        "recurrence of order %d from an operator of order %d",
        rec.order,
        op.order_in(sig.letters[0]),
    )
    return rec


def _integer_roots(q: PolyElement) -> List[int]:
    if q.is_ground:
        return []
    poly = sympy.Poly(q.as_expr(), sympy.Symbol("n"))
    return sorted(int(z) for z in roots(poly, filter="Z"))


def required_initial_indices(rec: Recurrence) -> Tuple[int, ...]:
    """Indices no equation of ``rec`` determines.

    ``N`` is fixed by the relation at ``N - r`` when that relation holds and
    ``q_r(N - r)`` is nonzero; terms below index 0 count as zero.
    """
    r = rec.order
    low = [i for i in range(r) if i - r < rec.start]
    singular = [z + r for z in _integer_roots(rec.leading) if z >= rec.start and z + r >= 0]
    return tuple(sorted(set(low) | set(singular)))


def unroll(rec: Recurrence, init: SequenceWindow, N: int) -> SequenceWindow:
    """Exact values up to index ``N`` from the supplied initial terms."""
    if init.start != 0:
        raise ValueError("initial terms must start at index 0")
    values = list(init.values[: N + 1])
    missing = [i for i in required_initial_indices(rec) if len(values) <= i <= N]
    if missing:
        raise SingularRecurrence(missing)
    r = rec.order
    for idx in range(len(values), N + 1):
        m = idx - r
        q = rec.evaluate(m)
        acc = QQ.zero
        for j in range(max(-m, 0), r):
            if q[j]:
                acc += q[j] * values[m + j]
        values.append(-acc / q[r])
    return SequenceWindow(0, values, init.normalization)


def _reduction_vectors(rec: Recurrence, size: int) -> List[List[Any]]:
    """``u(n+j)`` as ``Q(n)``-combinations of ``u(n), ..., u(n+r-1)`` for ``j < size``."""
    r = rec.order
    n = N_RING.gens[0]
    out: List[List[Any]] = []
    for j in range(size):
        if j < r:
            out.append([N_FIELD.one if i == j else N_FIELD.zero for i in range(r)])
            continue
        q = [N_FIELD.from_poly(c.compose(n, n + (j - r))) for c in rec.coefficients]
        vec = [N_FIELD.zero] * r
        for l in range(r):
            if not q[l]:
                continue
            factor = -q[l] / q[r]
            vec = [v + factor * w for v, w in zip(vec, out[j - r + l])]
        out.append(vec)
    return out


def hadamard_rescale(rec: Recurrence, p: int, q: int) -> Recurrence:
    """A recurrence for ``u(n) v(n)`` where ``(n+q)^p v(n+q) = v(n)``.

    Both factors are written over the basis ``u(n+i) v(n+c)`` (``i < r``,
    ``c < q``); the first ``b(n), ..., b(n+J)`` with a dependency over ``Q(n)``
    give the result.
    """
    if q < 1:
        raise ValueError(f"the step q must be a positive integer, got {q}")
    r = rec.order
    if r == 0:
        return rec
    dim = r * q
    reductions = _reduction_vectors(rec, dim + 1)
    nvar = N_FIELD.gen("n")
    domain = FractionField(N_FIELD._field)

    columns: List[List[Any]] = []
    for j in range(dim + 1):
        c, m = j % q, j // q
        scale = N_FIELD.one
        for i in range(1, m + 1):
            factor = (nvar + c + q * i) ** abs(p)
            scale = scale * factor if p < 0 else scale / factor
        col = [N_FIELD.zero] * dim
        for i, value in enumerate(reductions[j]):
            col[i * q + c] = value * scale
        columns.append(col)
        if j < 1:
            continue
        rows = [[columns[k][row] for k in range(j + 1)] for row in range(dim)]
        kernel = DomainMatrix(rows, (dim, j + 1), domain).nullspace()
        if kernel.shape[0] == 0:
            continue
        vector = kernel.to_list()[0]
        coeffs = N_FIELD.normalize_coefficients(vector[::-1])[::-1]
        _log.debug("rescaled recurrence of order %d found in dimension %d", j, dim)
        return Recurrence([c.numer for c in coeffs]).normalized()
    raise RuntimeError("This is a library bug.")


@attrs.define(slots=True, frozen=True)
class Growth:
    """The dominant factorial growth ``a(n) ~ n!^exponent`` of a recurrence's solutions.

    When two terms balance, ``ratio_power`` is the number whose ``step``-th root
    is the geometric ratio per index.
    """

    exponent: Any
    step: Optional[int] = None
    ratio_power: Optional[Any] = None

    def to_text(self) -> str:
        text = f"n!^({self.exponent})"
        if self.step is None:
            return text
        ratio = format_rational(self.ratio_power)
        if self.step == 1:
            return f"{text} * ({ratio})^n"
        return f"{text} * ({ratio})^(n/{self.step})"

    def to_dict(self) -> GrowthPayload:
        payload: GrowthPayload = {
            "exponent": format_rational(self.exponent),
            "text": self.to_text(),
        }
        if self.step is not None:
            payload["step"] = self.step
            payload["ratio_power"] = format_rational(self.ratio_power)
        return payload


def growth_exponent(rec: Recurrence) -> Growth:
    """Top slope of the recurrence's Newton polygon (coefficient degree against shift)."""
    r = rec.order
    points = [(j, q.degree()) for j, q in enumerate(rec.coefficients) if q]
    if r == 0 or len(points) < 2:
        raise ValueError("the growth of a recurrence needs two nonzero coefficients")
    dr = rec.leading.degree()
    slopes = {j: sympy.Rational(d - dr, r - j) for j, d in points if j < r}
    kappa = max(slopes.values())
    edge = [(j, d) for j, d in points if j < r and slopes[j] == kappa] + [(r, dr)]
    if len(edge) > 2:
        raise InconclusiveGrowth(edge)
    j = edge[0][0]
    ratio_power = -rec.coefficients[j].LC / rec.leading.LC
    return Growth(kappa, r - j, ratio_power)


def read_bfile(text: str) -> SequenceWindow:
    """Parse ``n value`` lines; ``#`` starts a comment."""
    indices: List[int] = []
    values: List[int] = []
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        fields = line.split()
        if len(fields) != 2:
            raise BFileError(f"line {lineno}: expected 'n value', got {line!r}")
        try:
            idx, value = int(fields[0]), int(fields[1])
        except ValueError:
            raise BFileError(f"line {lineno}: not an integer pair: {line!r}")
        if indices and idx != indices[-1] + 1:
            raise BFileError(f"line {lineno}: index {idx} does not follow {indices[-1]}")
        indices.append(idx)
        values.append(value)
    if not indices:
        raise BFileError("the b-file holds no terms")
    return SequenceWindow(indices[0], values)


def write_bfile(window: SequenceWindow) -> str:
    lines = [f"{n} {format_rational(v)}" for n, v in zip(window.indices(), window.counts())]
    return "\n".join(lines) + "\n"
