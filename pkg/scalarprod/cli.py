from __future__ import annotations

import argparse
import asyncio
import logging
import os
import sys
from typing import List, Optional, Sequence, Tuple, Union

import attrs

from scalarprod._http import HTTPClient
from scalarprod.actions import Action
from scalarprod.arith import TSeries
from scalarprod.budget import Budget
from scalarprod.engine import algorithm1, algorithm3
from scalarprod.errors import (
    InsufficientTruncation,
    ParseError,
    ResourceLimitExceeded,
    ScalarProductException,
    VerificationFailure,
)
from scalarprod.hammond import algorithm2
from scalarprod.kronecker import KroneckerProblem, algorithm4
from scalarprod.oracle import (
    DEFAULT_FLOOR,
    CheckResult,
    annihilation_check,
    kronecker_trunc,
    operator_check,
    scalar_product_trunc,
    truncate,
)
from scalarprod.problems import InputSystem, Problem, build_problems, read_input
from scalarprod.report import Comparison, Report
from scalarprod.sequences import (
    Recurrence,
    SequenceWindow,
    growth_exponent,
    hadamard_rescale,
    ode_to_rec,
    read_bfile,
    required_initial_indices,
    unroll,
)
from scalarprod.symfun import ClosedForm
from scalarprod.utils import (
    Engine,
    Normalization,
    OutputFormat,
    is_oeis_id,
    to_names,
    to_optional_int,
    to_positive_int,
)
from scalarprod.weyl import AlgebraSignature, WeylOperator

__all__: Tuple[str, ...] = (
    "JobSpec",
    "run",
    "compare_bfile",
    "load_bfile",
    "build_parser",
    "main",
)
_log = logging.getLogger(__name__)

_EXTRA_ORDERS = 8
_KRONECKER_WEIGHT = 12


def _to_rescale(_v: Union[str, Tuple[int, int], None]) -> Optional[Tuple[int, int]]:
    if _v is None:
        return None
    if isinstance(_v, str):
        p, sep, q = _v.partition(":")
        if not sep:
            raise ValueError(f"expected P:Q, got {_v!r}")
        _v = (int(p), int(q))
    p, q = _v
    if q < 1:
        raise ValueError(f"the step Q must be positive, got {q}")
    return (int(p), int(q))


@attrs.define(slots=True, frozen=True, kw_only=True)
class JobSpec:
    """One invocation: what to solve, with which engine, and what to report.

    Attributes
    ----------
    problem: :class:`str`
        ``kregular:K``, ``ktableaux:K``, ``schur-sum``, ``scalar-product`` or ``kronecker``.
    engine: :class:`Engine`
        ``direct`` picks the scalar product engine from the t-dependence of F.
    actions: :class:`Action`
        Artifacts besides the operators.
    terms: :class:`int`
        How many terms ``Action.terms`` computes.
    oracle_degree: Optional[:class:`int`]
        Truncation weight of the oracle; derived from the operators by default.
    """

    problem: str
    engine: Engine = attrs.field(default=Engine.direct, converter=Engine)
    actions: Action = Action.ode | Action.oracle_check
    budget: Budget = attrs.field(factory=Budget)
    format: OutputFormat = attrs.field(default=OutputFormat.text, converter=OutputFormat)
    f_path: Optional[str] = None
    g_path: Optional[str] = None
    params: Tuple[str, ...] = attrs.field(factory=tuple, converter=to_names)
    adjunction: Optional[str] = None
    terms: int = attrs.field(default=20, converter=to_positive_int)
    oracle_degree: Optional[int] = attrs.field(default=None, converter=to_optional_int)
    compare: Optional[str] = None
    rescale: Optional[Tuple[int, int]] = attrs.field(default=None, converter=_to_rescale)
    verify: bool = True
    output: Optional[str] = None

    @classmethod
    def from_args(cls, ns: argparse.Namespace) -> JobSpec:
        actions = Action.none()
        for action in Action.all():
            if getattr(ns, action.name) not in (None, False):
                actions |= action
        if not ns.no_verify:
            actions |= Action.oracle_check
        if not actions & (Action.rec | Action.terms | Action.growth):
            actions |= Action.ode
        budget = Budget(max_degree=ns.max_degree, max_seconds=ns.max_seconds)
        return cls(
            problem=ns.problem,
            engine="direct" if ns.alg is None else ns.alg,
            actions=actions,
            budget=budget,
            format=ns.format,
            f_path=ns.f,
            g_path=ns.g,
            params=ns.param or (),
            adjunction=ns.adjunction,
            terms=ns.terms or 20,
            oracle_degree=ns.oracle_check,
            compare=ns.compare,
            rescale=ns.rescale,
            verify=not ns.no_verify,
            output=ns.output,
        )


def _read_system(path: Optional[str], params: Sequence[str]) -> Optional[InputSystem]:
    if path is None:
        return None
    with open(path, encoding="utf-8") as f:
        return read_input(f.read(), params, source=path)


def _in_t(op: WeylOperator) -> WeylOperator:
    """The one-variable output of any engine, with its variable called ``t``."""
    sig = op.signature
    if sig.t_vars == ("t",) or sig.k != 1:
        return op
    name = sig.t_vars[0]
    target = AlgebraSignature(t_vars=("t",), blocks=("dt",), params=sig.params)
    return op.convert(target, {name: "t", sig.block_letter("dt", name): "dt"})


def _solve(problem: Problem, job: JobSpec) -> Tuple[Engine, List[WeylOperator]]:
    f_ops, g_ops = problem.f.operators, problem.g.operators
    if problem.kronecker:
        if job.engine not in (Engine.direct, Engine.kronecker):
            raise ValueError(
                f"{problem.name} is a Kronecker product; --alg {job.engine.value} does not apply"
            )
        found = algorithm4(KroneckerProblem(f_ops, g_ops, problem.adj), job.budget)
        return Engine.kronecker, found
    if job.engine is Engine.hammond:
        if problem.hammond_k is None:
            raise ValueError("the Hammond engine needs G = exp(t h_k)")
        op = algorithm2(problem.hammond_k, f_ops, problem.adj, job.budget)
        return Engine.hammond, [_in_t(op)]
    if job.engine is Engine.kronecker:
        raise ValueError(f"{problem.name} is a scalar product; use --alg direct or hammond")
    if job.engine is Engine.algorithm3 or problem.f.involves_t:
        found = algorithm3(f_ops, g_ops, problem.adj, job.budget)
        return Engine.algorithm3, [_in_t(op) for op in found]
    found = algorithm1(f_ops, g_ops, problem.adj, job.budget)
    return Engine.algorithm1, [_in_t(op) for op in found]


def _forms(problem: Problem, engine: Engine) -> Tuple[ClosedForm, ClosedForm]:
    f, g = problem.f.closed_form, problem.g.closed_form
    if engine is Engine.hammond:
        g = problem.hammond_g()
    if f is None or g is None:
        raise ValueError("verification needs closed forms for F and G; pass --no-verify to skip it")
    return f, g


def _pairing(problem: Problem, engine: Engine, order: int, bound: Optional[int] = None) -> TSeries:
    f, g = _forms(problem, engine)
    bound = bound or problem.t_weight * (order + _EXTRA_ORDERS)
    _log.debug("oracle pairing of %s truncated at weight %d", problem.name, bound)
    return scalar_product_trunc(truncate(f, bound), truncate(g, bound), problem.adj)


def _check(
    problem: Problem, engine: Engine, ops: Sequence[WeylOperator], job: JobSpec
) -> List[CheckResult]:
    if not job.verify:
        _log.warning("oracle check of %s skipped on request", problem.name)
        return [CheckResult.skip(op.to_text()) for op in ops]
    if engine is Engine.kronecker:
        f, g = _forms(problem, engine)
        bound = job.oracle_degree or _KRONECKER_WEIGHT
        series = kronecker_trunc(truncate(f, bound), truncate(g, bound), problem.adj)
        return [operator_check(op, series, DEFAULT_FLOOR) for op in ops]
    order = max(op.order_in("dt") for op in ops)
    series = _pairing(problem, engine, order, job.oracle_degree)
    return [annihilation_check(op, series, DEFAULT_FLOOR) for op in ops]


def _initial_terms(
    problem: Problem, engine: Engine, rec: Recurrence, count: int, job: JobSpec
) -> SequenceWindow:
    needed = [i for i in required_initial_indices(rec) if i < count]
    size = max(needed, default=-1) + 1
    bound = max(job.oracle_degree or 0, problem.t_weight * (size + _EXTRA_ORDERS))
    series = _pairing(problem, engine, size, bound)
    if series.precision is not None and series.precision < size:
        raise InsufficientTruncation(size, series.precision - 1)
    return SequenceWindow(0, [series[i] for i in range(size)])


def load_bfile(source: str) -> SequenceWindow:
    """A b-file from a path, or downloaded when ``source`` is an A-number."""
    if is_oeis_id(source) and not os.path.exists(source):

        async def download() -> SequenceWindow:
            async with HTTPClient() as client:
                return await client.get_bfile(source)

        return asyncio.run(download())
    with open(source, encoding="utf-8") as f:
        return read_bfile(f.read())


def compare_bfile(
    terms: SequenceWindow, bfile: Union[str, SequenceWindow], source: Optional[str] = None
) -> Comparison:
    """Index-aligned comparison of computed counts with a b-file."""
    if isinstance(bfile, str):
        source = source or bfile
        bfile = load_bfile(bfile)
    source = source or "b-file"
    counts = terms.with_counts()
    low, high = max(counts.start, bfile.start), min(counts.end, bfile.end)
    if low > high:
        return Comparison(source, "inconclusive")
    for n in range(low, high + 1):
        if counts[n] != bfile[n]:
            return Comparison(source, "mismatch", n - low, n, bfile[n], counts[n])
    return Comparison(source, "equal", high - low + 1)


def run(job: JobSpec) -> Report:
    """Solve the job's problems and collect the requested artifacts."""
    f = _read_system(job.f_path, job.params)
    g = _read_system(job.g_path, job.params)
    param = job.params[0] if job.params else "N"
    problems = build_problems(job.problem, f, g, job.adjunction, param)
    _log.info(
        "running %s with %s", job.problem, ", ".join(a.flag_name for a in job.actions) or "nothing"
    )

    operators: List[WeylOperator] = []
    checks: List[CheckResult] = []
    engine = job.engine
    for problem in problems:
        engine, ops = _solve(problem, job)
        _log.debug("%s: %d operators from %s", problem.name, len(ops), engine.value)
        results = _check(problem, engine, ops, job)
        for result in results:
            if not result.passed:
                raise VerificationFailure(
                    f"{result.subject} does not annihilate the oracle series "
                    f"(first failure at {result.first_failure})",
                    result,
                )
        operators += ops
        checks += results

    problem = problems[0]
    normalization = Normalization.egf if engine is Engine.hammond else problem.normalization
    report = Report(
        problem=job.problem,
        engine=engine,
        normalization=normalization,
        operators=operators if job.actions & Action.ode else (),
        checks=checks,
    )
    if not job.actions & (Action.rec | Action.terms | Action.growth) and job.compare is None:
        return report

    if len(operators) != 1 or engine is Engine.kronecker:
        raise ValueError("recurrences, terms and growth need a single operator in t")
    rec = ode_to_rec(operators[0])
    shown = hadamard_rescale(rec, *job.rescale) if job.rescale is not None else rec
    if job.actions & Action.rec:
        report = attrs.evolve(report, recurrence=shown)
    if job.actions & Action.growth:
        report = attrs.evolve(report, growth=growth_exponent(shown))

    if job.actions & Action.terms or job.compare is not None:
        init = _initial_terms(problem, engine, rec, job.terms, job)
        window = unroll(rec, init, job.terms - 1)
        window = SequenceWindow(0, window.values, normalization)
        report = attrs.evolve(report, terms=window)
        if job.compare is not None:
            report = attrs.evolve(report, comparison=compare_bfile(window, job.compare))
    return report


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="scalarprod",
        description="D-finite scalar and Kronecker products of symmetric functions.",
    )
    parser.add_argument(
        "problem", help="kregular:K, ktableaux:K, schur-sum, scalar-product or kronecker"
    )
    parser.add_argument("--f", help="input file for the left factor")
    parser.add_argument("--g", help="input file for the right factor")
    parser.add_argument("--param", action="append", help="declare a formal parameter (repeatable)")
    parser.add_argument("--adjunction", help="symmetric (default), uniform:W or hall:q")
    parser.add_argument(
        "--alg",
        choices=[e.value for e in Engine],
        help="engine; direct picks by the t-dependence of F",
    )
    parser.add_argument("--ode", action="store_true", help="print the differential operators")
    parser.add_argument("--rec", action="store_true", help="print the recurrence")
    parser.add_argument("--terms", type=int, metavar="N", help="print the first N counts")
    parser.add_argument(
        "--oracle-check", type=int, metavar="D", help="truncation weight of the oracle check"
    )
    parser.add_argument("--growth", action="store_true", help="print the factorial growth")
    parser.add_argument(
        "--rescale", metavar="P:Q", help="rescale the recurrence by a Hadamard product"
    )
    parser.add_argument("--compare", metavar="BFILE", help="b-file path or OEIS A-number")
    parser.add_argument("--max-degree", type=int, default=30, help="largest monomial degree")
    parser.add_argument("--max-seconds", type=float, help="wall-clock ceiling")
    parser.add_argument(
        "--format", choices=[f.value for f in OutputFormat], default=OutputFormat.text.value
    )
    parser.add_argument("--no-verify", action="store_true", help="skip the oracle check")
    parser.add_argument("--output", metavar="FILE", help="write the report to FILE")
    parser.add_argument("-v", "--verbose", action="count", default=0)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    ns = parser.parse_args(argv)
    logging.basicConfig(
        level=max(logging.WARNING - 10 * ns.verbose, logging.DEBUG),
        stream=sys.stderr,
        format="%(levelname)s %(name)s: %(message)s",
    )
    try:
        job = JobSpec.from_args(ns)
        report = run(job)
    except VerificationFailure as e:
        print(f"verification failed: {e}", file=sys.stderr)
        return 1
    except (ParseError, ValueError, OSError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 2
    except ResourceLimitExceeded as e:
        print(f"budget exceeded: {e}", file=sys.stderr)
        return 3
    except ScalarProductException as e:
        print(f"error: {e}", file=sys.stderr)
        return 4

    text = report.render(job.format)
    if job.output is not None:
        with open(job.output, "w", encoding="utf-8") as f:
            f.write(text)
    else:
        sys.stdout.write(text)
    return 0
