from __future__ import annotations

import logging
from typing import (
    TYPE_CHECKING,
    Any,
    Dict,
    List,
    Literal,
    Optional,
    Sequence,
    Tuple,
    Union,
)

import attrs
import sympy
from sympy.polys.domains import FractionField
from sympy.polys.rings import PolyElement, PolyRing
from sympy.polys.orderings import grlex

from scalarprod.adjunction import Adjunction
from scalarprod.arith import QQ, CoefficientField, TSeries
from scalarprod.errors import (
    InconclusiveCheck,
    InsufficientTruncation,
    SizeLimitExceeded,
)
from scalarprod.symfun import ClosedForm, SymPoly
from scalarprod.utils import to_expr, to_names, variable_index
from scalarprod.weyl import WeylOperator, apply_to_t_series

if TYPE_CHECKING:
    from scalarprod.types import CheckPayload, CheckStatus

__all__: Tuple[str, ...] = (
    "TruncatedSymSeries",
    "CheckResult",
    "trunc_exp",
    "trunc_reciprocal",
    "truncate",
    "scalar_product_trunc",
    "kronecker_trunc",
    "theta_specialize",
    "apply_operator",
    "annihilation_check",
    "operator_check",
    "direct_count",
    "series_solution",
    "DEFAULT_FLOOR",
    "MAX_DIRECT_SIZE",
)
_log = logging.getLogger(__name__)

DEFAULT_FLOOR = 5
MAX_DIRECT_SIZE = 7

Key = Tuple[Tuple[str, int], ...]


def _series_ring(names: Tuple[str, ...], params: Tuple[str, ...]) -> PolyRing:
    field = CoefficientField(params)
    domain = QQ if not params else FractionField(field._field)
    return PolyRing(names, domain, grlex)


@attrs.define(slots=True, frozen=True, eq=False)
class TruncatedSymSeries:
    """A symmetric series in the power sums, known up to a p-weight.

    ``p_i`` weighs ``i``; t-variables and parameters weigh nothing. Every term of
    weight at most ``bound`` is stored, and no other.

    Attributes
    ----------
    poly: :class:`PolyElement`
        The stored terms, over the ring of ``p_vars + t_vars`` with the parameters
        in the coefficient domain.
    bound: :class:`int`
        The largest p-weight that is known.
    inv_grading: :class:`sympy.Rational`
        A lower bound for ``t-degree / p-weight`` over the (infinitely many)
        terms of the full series. It decides which t-orders a pairing determines.
    exact: :class:`bool`
        ``True`` when the series is a polynomial and ``poly`` is all of it.
    """

    poly: PolyElement
    p_vars: Tuple[str, ...] = attrs.field(converter=to_names)
    t_vars: Tuple[str, ...] = attrs.field(converter=to_names)
    params: Tuple[str, ...] = attrs.field(converter=to_names)
    bound: int
    inv_grading: Any = sympy.Integer(0)
    exact: bool = False

    @property
    def ring(self) -> PolyRing:
        return self.poly.ring

    @property
    def field(self) -> CoefficientField:
        return CoefficientField(self.params)

    @property
    def weights(self) -> Tuple[int, ...]:
        return tuple(variable_index(p) for p in self.p_vars)

    def weight(self, exps: Sequence[int]) -> int:
        return sum(w * e for w, e in zip(self.weights, exps))

    @property
    def max_weight(self) -> int:
        return max((self.weight(e) for e in self.poly.itermonoms()), default=0)

    @classmethod
    def empty_ring(
        cls, p_vars: Sequence[str], t_vars: Sequence[str] = (), params: Sequence[str] = ()
    ) -> PolyRing:
        p_vars, t_vars, params = to_names(p_vars), to_names(t_vars), to_names(params)
        if not p_vars:
            raise ValueError("a symmetric series needs at least one power sum")
        return _series_ring(p_vars + t_vars, params)

    @classmethod
    def from_expr(
        cls,
        expr: SymPoly,
        bound: int,
        p_vars: Sequence[str],
        t_vars: Sequence[str] = (),
        params: Sequence[str] = (),
    ) -> TruncatedSymSeries:
        """An exact polynomial, truncated to ``bound``."""
        ring = cls.empty_ring(p_vars, t_vars, params)
        full = cls(ring.from_expr(to_expr(expr)), p_vars, t_vars, params, bound, exact=True)
        ratio, _ = _min_ratio(full.poly, len(full.p_vars), full.weights)
        return attrs.evolve(full, inv_grading=ratio).truncate(bound)

    def truncate_poly(self, poly: PolyElement, bound: int) -> PolyElement:
        return poly.ring.from_dict({e: c for e, c in poly.iterterms() if self.weight(e) <= bound})

    def truncate(self, bound: int) -> TruncatedSymSeries:
        poly = self.truncate_poly(self.poly, bound)
        if self.exact:
            return attrs.evolve(self, poly=poly, bound=bound, exact=poly == self.poly)
        return attrs.evolve(self, poly=poly, bound=min(bound, self.bound))

    def to_expr(self) -> sympy.Expr:
        return self.poly.as_expr()

    def grouped(self, field: Optional[CoefficientField] = None) -> Dict[Key, Dict[int, Any]]:
        """Terms keyed by their p-monomial, each a dict ``t-degree -> coefficient``."""
        field = field or self.field
        source = self.field
        n = len(self.p_vars)
        out: Dict[Key, Dict[int, Any]] = {}
        for exps, c in self.poly.iterterms():
            key = tuple((p, e) for p, e in zip(self.p_vars, exps[:n]) if e)
            tdeg = sum(exps[n:])
            value = field.convert_from(c, source) if field != source else c
            bucket = out.setdefault(key, {})
            bucket[tdeg] = bucket[tdeg] + value if tdeg in bucket else value
        return out


def _min_ratio(poly: PolyElement, n: int, weights: Sequence[int]) -> Tuple[Any, bool]:
    """``min(t-degree / p-weight)`` over terms of positive weight.

    Also reports whether a weight-0 term exists.
    """
    ratio: Any = None
    has_constant = False
    for exps in poly.itermonoms():
        w = sum(wi * e for wi, e in zip(weights, exps[:n]))
        if w == 0:
            has_constant = True
            continue
        r = sympy.Rational(sum(exps[n:]), w)
        ratio = r if ratio is None or r < ratio else ratio
    return (ratio if ratio is not None else sympy.Integer(0)), has_constant


def _names(
    expr: SymPoly,
    p_vars: Optional[Sequence[str]],
    t_vars: Optional[Sequence[str]],
    params: Optional[Sequence[str]],
    kind: Literal["exp", "recip"],
) -> ClosedForm:
    return ClosedForm._infer(kind, to_expr(expr), p_vars, t_vars, params)


def trunc_exp(
    q: SymPoly,
    bound: int,
    p_vars: Optional[Sequence[str]] = None,
    t_vars: Optional[Sequence[str]] = None,
    params: Optional[Sequence[str]] = None,
) -> TruncatedSymSeries:
    """``exp(Q)`` up to p-weight ``bound``; ``Q`` must vanish at ``p = 0``."""
    cf = _names(q, p_vars, t_vars, params, "exp")
    ring = TruncatedSymSeries.empty_ring(cf.p_vars, cf.t_vars, cf.params)
    series = TruncatedSymSeries(ring.one, cf.p_vars, cf.t_vars, cf.params, bound, exact=True)
    qp = ring.from_expr(cf.expr)
    if not qp:
        return series
    n = len(cf.p_vars)
    ratio, has_constant = _min_ratio(qp, n, series.weights)
    if has_constant:
        raise ValueError(f"the exponent {cf.expr} must vanish at p = 0")

    total, term = ring.one, ring.one
    for m in range(1, bound + 1):
        term = series.truncate_poly(term * qp, bound).quo_ground(ring.domain.convert(m))
        if not term:
            break
        total += term
    return TruncatedSymSeries(total, cf.p_vars, cf.t_vars, cf.params, bound, ratio, False)


def trunc_reciprocal(
    u: SymPoly,
    bound: int,
    p_vars: Optional[Sequence[str]] = None,
    t_vars: Optional[Sequence[str]] = None,
    params: Optional[Sequence[str]] = None,
) -> TruncatedSymSeries:
    """``1/u`` up to p-weight ``bound``; the weight-0 part of ``u`` must be a nonzero number."""
    cf = _names(u, p_vars, t_vars, params, "recip")
    ring = TruncatedSymSeries.empty_ring(cf.p_vars, cf.t_vars, cf.params)
    up = ring.from_expr(cf.expr)
    shape = TruncatedSymSeries(up, cf.p_vars, cf.t_vars, cf.params, bound)
    constant = ring.from_dict({e: c for e, c in up.iterterms() if shape.weight(e) == 0})
    if not constant or not constant.is_ground:
        raise ValueError(f"the p-free part of {cf.expr} must be a nonzero number")
    c0 = constant.LC
    rest = (ring.one - up.quo_ground(c0))
    if not rest:
        return TruncatedSymSeries(
            ring.one.quo_ground(c0), cf.p_vars, cf.t_vars, cf.params, bound, exact=True
        )
    ratio, _ = _min_ratio(rest, len(cf.p_vars), shape.weights)

    total, term = ring.one, ring.one
    for _ in range(bound):
        term = shape.truncate_poly(term * rest, bound)
        if not term:
            break
        total += term
    return TruncatedSymSeries(
        total.quo_ground(c0), cf.p_vars, cf.t_vars, cf.params, bound, ratio, False
    )


def truncate(form: ClosedForm, bound: int) -> TruncatedSymSeries:
    """The truncated series of a closed form."""
    if form.kind == "exp":
        return trunc_exp(form.expr, bound, form.p_vars, form.t_vars, form.params)
    return trunc_reciprocal(form.expr, bound, form.p_vars, form.t_vars, form.params)


def _pairing_weights(
    keys: Sequence[Key], adj: Adjunction, field: CoefficientField
) -> Dict[Key, Any]:
    cache: Dict[Tuple[str, int], Any] = {}
    out: Dict[Key, Any] = {}
    for key in keys:
        value = field.one
        for name, e in key:
            if (name, e) not in cache:
                cache[(name, e)] = field(adj.pairing_weight(name, e))
            value = value * cache[(name, e)]
        out[key] = value
    return out


def _union(*names: Sequence[str]) -> Tuple[str, ...]:
    out: List[str] = []
    for group in names:
        out += [n for n in group if n not in out]
    return tuple(out)


def _determined(f: TruncatedSymSeries, g: TruncatedSymSeries) -> Tuple[bool, int]:
    """Whether the pairing is exact, and the largest p-weight it sees completely."""
    if f.exact and g.exact:
        return True, max(f.max_weight, g.max_weight)
    if f.exact and f.max_weight <= g.bound:
        return True, f.max_weight
    if g.exact and g.max_weight <= f.bound:
        return True, g.max_weight
    return False, min(f.bound, g.bound)


def scalar_product_trunc(
    f: TruncatedSymSeries,
    g: TruncatedSymSeries,
    adj: Optional[Adjunction] = None,
    order: Optional[int] = None,
) -> TSeries:
    """``<F, G>`` as a series in t.

    ``p^a`` pairs with ``p^a`` with weight ``prod_i w_i^{a_i} a_i!``, which is
    ``z_λ`` for the symmetric adjunction. ``order`` asks for that many
    coefficients; by default every determined coefficient is returned.
    """
    adj = adj or Adjunction()
    t_names = _union(f.t_vars, g.t_vars)
    if len(t_names) > 1:
        raise ValueError(f"the pairing collects a series in one variable, got {list(t_names)}")
    params = _union(f.params, g.params)
    field = CoefficientField(params)
    left, right = f.grouped(field), g.grouped(field)
    common = [key for key in left if key in right]
    weights = _pairing_weights(common, adj, field)

    exact, seen = _determined(f, g)
    if exact:
        attainable: Optional[int] = None
    else:
        slope = f.inv_grading + g.inv_grading
        attainable = int(sympy.ceiling((seen + 1) * slope)) - 1 if slope > 0 else -1

    coefficients: Dict[int, Any] = {}
    for key in common:
        w = weights[key]
        for a, ca in left[key].items():
            for b, cb in right[key].items():
                n = a + b
                if attainable is not None and n > attainable:
                    continue
                value = w * ca * cb
                coefficients[n] = coefficients[n] + value if n in coefficients else value

    if order is None:
        if attainable is None:
            order = max((n for n, c in coefficients.items() if c), default=-1) + 1
        else:
            order = attainable + 1
    elif attainable is not None and order > attainable + 1:
        raise InsufficientTruncation(order - 1, attainable)
    values = tuple(coefficients.get(n, field.zero) for n in range(order))
    _log.debug("pairing of %d p-monomials gives %d coefficients", len(common), order)
    return TSeries(values, None if attainable is None else order, field)


def kronecker_trunc(
    f: TruncatedSymSeries, g: TruncatedSymSeries, adj: Optional[Adjunction] = None
) -> TruncatedSymSeries:
    """The termwise product ``p^a * p^a = (prod_i w_i^{a_i} a_i!) p^a``."""
    if f.t_vars or g.t_vars:
        raise ValueError("the Kronecker product is taken on series in the power sums only")
    adj = adj or Adjunction()
    p_vars = tuple(sorted(_union(f.p_vars, g.p_vars), key=variable_index))
    params = _union(f.params, g.params)
    field = CoefficientField(params)
    left, right = f.grouped(field), g.grouped(field)
    common = [key for key in left if key in right]
    weights = _pairing_weights(common, adj, field)
    exact, seen = _determined(f, g)

    ring = _series_ring(p_vars, params)
    position = {p: i for i, p in enumerate(p_vars)}
    terms: Dict[Tuple[int, ...], Any] = {}
    for key in common:
        exps = [0] * len(p_vars)
        for name, e in key:
            exps[position[name]] = e
        value = weights[key] * left[key][0] * right[key][0]
        if value:
            terms[tuple(exps)] = value
    bound = seen if exact else min(f.bound, g.bound)
    return TruncatedSymSeries(ring.from_dict(terms), p_vars, (), params, bound, exact=exact)


def theta_specialize(f: Union[TruncatedSymSeries, SymPoly]) -> TSeries:
    """``p1 -> t``, ``p_i -> 0`` for ``i > 1``."""
    if not isinstance(f, TruncatedSymSeries):
        expr = to_expr(f)
        form = ClosedForm.exp(expr)
        p_vars = form.p_vars or ("p1",)
        degree = sympy.Poly(expr, *[sympy.Symbol(p) for p in p_vars]).total_degree()
        bound = int(degree) * max(variable_index(p) for p in p_vars)
        f = TruncatedSymSeries.from_expr(expr, bound, p_vars, form.t_vars, form.params)
    if f.t_vars:
        raise ValueError("theta acts on series in the power sums only")
    field = f.field
    coefficients: Dict[int, Any] = {}
    first = f.p_vars.index("p1") if "p1" in f.p_vars else None
    for exps, c in f.poly.iterterms():
        if any(e for i, e in enumerate(exps) if i != first):
            continue
        n = exps[first] if first is not None else 0
        coefficients[n] = c
    if f.exact:
        length = max(coefficients, default=-1) + 1
        return TSeries(tuple(coefficients.get(n, field.zero) for n in range(length)), None, field)
    order = f.bound + 1
    return TSeries(tuple(coefficients.get(n, field.zero) for n in range(order)), order, field)


def _reembed(
    series: TruncatedSymSeries,
    p_vars: Tuple[str, ...],
    t_vars: Tuple[str, ...],
    params: Tuple[str, ...],
) -> TruncatedSymSeries:
    names = p_vars + t_vars
    if (series.p_vars, series.t_vars, series.params) == (p_vars, t_vars, params):
        return series
    ring = _series_ring(names, params)
    source, target = series.field, CoefficientField(params)
    position = [names.index(n) for n in series.p_vars + series.t_vars]
    terms: Dict[Tuple[int, ...], Any] = {}
    for exps, c in series.poly.iterterms():
        new = [0] * len(names)
        for i, e in zip(position, exps):
            new[i] = e
        terms[tuple(new)] = target.convert_from(c, source)
    return TruncatedSymSeries(
        ring.from_dict(terms),
        p_vars,
        t_vars,
        params,
        series.bound,
        series.inv_grading,
        series.exact,
    )


def apply_operator(op: WeylOperator, series: TruncatedSymSeries) -> TruncatedSymSeries:
    """The action of an operator in ``p, dp, dt`` on a truncated series.

    Coefficients must be polynomial in the t-variables. The result is known up
    to the input bound minus the largest weight an operator term removes.
    """
    sig = op.signature
    if any(b != "dt" for b in sig.blocks):
        raise ValueError("only dt blocks act on series")
    p_vars = tuple(sorted(_union(series.p_vars, sig.p_vars), key=variable_index))
    t_vars = _union(series.t_vars, sig.t_vars)
    params = _union(series.params, sig.params)
    series = _reembed(series, p_vars, t_vars, params)
    ring = series.ring
    field = sig.field
    n, pn = sig.n, len(p_vars)
    p_index = [p_vars.index(p) for p in sig.p_vars]
    t_index = [pn + t_vars.index(t) for t in sig.t_vars]
    w = [variable_index(p) for p in sig.p_vars]

    drop = 0
    total = ring.zero
    for m, c in op.terms.items():
        numer, denom = field.numer_denom(c)
        if field.ring is not None and any(
            denom.degree(field.index(t)) > 0 for t in sig.t_vars
        ):
            raise ValueError("clear the t-denominators before applying an operator to a series")
        coeff = ring.from_expr(c.as_expr() if field.ring is not None else QQ.to_sympy(c))
        value = series.poly
        for i in range(n):
            for _ in range(m[n + i]):
                value = value.diff(ring.gens[p_index[i]])
        for i, t in enumerate(t_index):
            for _ in range(m[2 * n + i] if sig.blocks else 0):
                value = value.diff(ring.gens[t])
        for i in range(n):
            if m[i]:
                value = value * ring.gens[p_index[i]] ** m[i]
        total += coeff * value
        lowered = sum(wi * b for wi, b in zip(w, m[n : 2 * n]))
        raised = sum(wi * a for wi, a in zip(w, m[:n]))
        drop = max(drop, lowered - raised)

    bound = series.bound - drop
    result = attrs.evolve(series, poly=total, bound=bound)
    if series.exact:
        return result
    return attrs.evolve(result, poly=series.truncate_poly(total, bound))


@attrs.define(slots=True, frozen=True)
class CheckResult:
    """The outcome of an annihilation check.

    Attributes
    ----------
    subject: :class:`str`
        The operator that was checked.
    passed: :class:`bool`
        ``True`` when every checked coefficient vanished.
    checked: :class:`int`
        How many coefficients (t-orders or p-weights) were compared.
    first_failure: Optional[:class:`int`]
        The lowest index with a nonzero residual.
    skipped: :class:`bool`
        The check was switched off on request.
    """

    subject: str
    passed: bool
    checked: int = 0
    first_failure: Optional[int] = None
    skipped: bool = False

    @classmethod
    def skip(cls, subject: str) -> CheckResult:
        return cls(subject, True, skipped=True)

    @property
    def status(self) -> CheckStatus:
        if self.skipped:
            return "skipped"
        return "passed" if self.passed else "failed"

    def to_dict(self) -> CheckPayload:
        payload: CheckPayload = {
            "operator": self.subject,
            "status": self.status,
            "checked": self.checked,
        }
        if self.first_failure is not None:
            payload["first_failure"] = self.first_failure
        return payload


def annihilation_check(
    op: WeylOperator, s: TSeries, floor: int = DEFAULT_FLOOR
) -> CheckResult:
    """Whether ``op`` kills the series ``s`` as far as ``s`` is known."""
    residual = apply_to_t_series(op, s)
    exact = residual.precision is None
    checked = len(residual.coefficients) if exact else residual.known
    if not exact and checked < floor:
        _log.warning("only %d coefficients determined, below the floor of %d", checked, floor)
        raise InconclusiveCheck(
            f"only {checked} coefficients of the residual are determined (floor {floor})"
        )
    first = next((i for i, c in enumerate(residual.coefficients[:checked]) if c), None)
    return CheckResult(op.to_text(), first is None, checked, first)


def operator_check(
    op: WeylOperator, series: TruncatedSymSeries, floor: int = DEFAULT_FLOOR
) -> CheckResult:
    """Whether ``op`` kills a truncated symmetric series up to its attainable weight."""
    residual = apply_operator(op, series)
    checked = residual.bound + 1
    if not residual.exact and checked < floor:
        _log.warning("only %d weights determined, below the floor of %d", checked, floor)
        raise InconclusiveCheck(
            f"only {checked} weights of the residual are determined (floor {floor})"
        )
    failures = [residual.weight(e) for e in residual.poly.itermonoms()]
    first = min(failures) if failures else None
    return CheckResult(op.to_text(), first is None, checked, first)


def _count_matrices(n: int, k: int, kind: str) -> int:
    rem = [k] * n
    memo: Dict[Tuple[int, int, Tuple[int, ...]], int] = {}

    def fill(i: int, j: int) -> int:
        if i == n:
            return 1
        if j == n:
            return fill(i + 1, i + 1) if rem[i] == 0 else 0
        key = (i, j, tuple(rem[i:]))
        if key in memo:
            return memo[key]
        total = 0
        if j == i:
            if kind == "kregular":
                choices: Sequence[int] = (0,)
            elif kind == "multigraph":
                choices = range(0, rem[i] + 1, 2)
            else:
                choices = range(rem[i] + 1)
            if j == n - 1:
                choices = [d for d in choices if d == rem[i]]
            for d in choices:
                rem[i] -= d
                total += fill(i, j + 1)
                rem[i] += d
        else:
            hi = min(rem[i], rem[j], 1 if kind == "kregular" else rem[i])
            choices = range(hi + 1) if j < n - 1 else ([rem[i]] if rem[i] <= hi else [])
            for x in choices:
                rem[i] -= x
                rem[j] -= x
                total += fill(i, j + 1)
                rem[i] += x
                rem[j] += x
        memo[key] = total
        return total

    return fill(0, 0)


def direct_count(
    problem: Literal["kregular", "ktableaux", "multigraph"], k: int, n_max: int
) -> List[int]:
    """Counts for ``n = 0..n_max`` by enumerating symmetric matrices with row sums ``k``.

    ``kregular`` counts 0/1 matrices with zero diagonal (labeled k-regular
    graphs), ``ktableaux`` nonnegative integer matrices (k-uniform tableaux),
    ``multigraph`` nonnegative integer matrices with even diagonal.
    """
    if problem not in ("kregular", "ktableaux", "multigraph"):
        raise ValueError(f"unknown problem {problem!r}")
    if k < 1:
        raise ValueError(f"k must be a positive integer, got {k}")
    if n_max > MAX_DIRECT_SIZE:
        raise SizeLimitExceeded(
            f"exhaustive enumeration is limited to n <= {MAX_DIRECT_SIZE}, asked for {n_max}"
        )
    return [_count_matrices(n, k, problem) for n in range(n_max + 1)]


def series_solution(op: WeylOperator, init: Sequence[Any], order: int) -> TSeries:
    """The first ``order`` coefficients of the power-series solution with leading terms ``init``."""
    from scalarprod.sequences import SequenceWindow, ode_to_rec, unroll

    rec = ode_to_rec(op)
    window = unroll(rec, SequenceWindow(0, tuple(QQ.convert(v) for v in init)), order - 1)
    return TSeries(window.values[:order], order)
