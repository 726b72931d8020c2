from __future__ import annotations

from typing import TYPE_CHECKING, Any, List, Optional, Tuple

import attrs

from scalarprod.oracle import CheckResult
from scalarprod.sequences import Growth, Recurrence, SequenceWindow
from scalarprod.utils import Engine, Normalization, OutputFormat, _to_json, format_rational
from scalarprod.weyl import WeylOperator

if TYPE_CHECKING:
    from scalarprod.types import ComparisonPayload, CompareStatus, ReportPayload, TermPayload

__all__: Tuple[str, ...] = ("Comparison", "Report")


@attrs.define(slots=True, frozen=True)
class Comparison:
    """Computed counts against a b-file, aligned by index.

    Attributes
    ----------
    source: :class:`str`
        The b-file path or A-number.
    status: :class:`str`
        ``equal``, ``mismatch`` or ``inconclusive`` (no common index).
    compared: :class:`int`
        Number of common indices checked.
    first_divergence: Optional[:class:`int`]
        The first index where the values differ.
    """

    source: str
    status: CompareStatus
    compared: int = 0
    first_divergence: Optional[int] = None
    expected: Optional[Any] = None
    actual: Optional[Any] = None

    @property
    def equal(self) -> bool:
        return self.status == "equal"

    def to_text(self) -> str:
        if self.status == "mismatch":
            return (
                f"{self.source}: mismatch at n={self.first_divergence} "
                f"(expected {format_rational(self.expected)}, got {format_rational(self.actual)})"
            )
        if self.status == "inconclusive":
            return f"{self.source}: inconclusive, no common index"
        return f"{self.source}: equal on {self.compared} terms"

    def to_dict(self) -> ComparisonPayload:
        payload: ComparisonPayload = {
            "source": self.source,
            "status": self.status,
            "compared": self.compared,
        }
        if self.first_divergence is not None:
            payload["first_divergence"] = self.first_divergence
            payload["expected"] = format_rational(self.expected)
            payload["actual"] = format_rational(self.actual)
        return payload


@attrs.define(slots=True, frozen=True, kw_only=True)
class Report:
    """Everything one job produced, in a fixed order."""

    problem: str
    engine: Engine
    normalization: Normalization
    operators: Tuple[WeylOperator, ...] = attrs.field(factory=tuple, converter=tuple)
    recurrence: Optional[Recurrence] = None
    terms: Optional[SequenceWindow] = None
    checks: Tuple[CheckResult, ...] = attrs.field(factory=tuple, converter=tuple)
    growth: Optional[Growth] = None
    comparison: Optional[Comparison] = None

    def _term_payloads(self) -> List[TermPayload]:
        if self.terms is None:
            return []
        return [
            {"n": n, "value": format_rational(v)}
            for n, v in zip(self.terms.indices(), self.terms.counts())
        ]

    def to_dict(self) -> ReportPayload:
        payload: ReportPayload = {
            "problem": self.problem,
            "engine": self.engine.value,
            "normalization": self.normalization.value,
            "operators": [op.to_dict() for op in self.operators],
            "recurrence": self.recurrence.to_dict() if self.recurrence is not None else None,
            "terms": self._term_payloads(),
            "checks": [check.to_dict() for check in self.checks],
        }
        if self.growth is not None:
            payload["growth"] = self.growth.to_dict()
        if self.comparison is not None:
            payload["comparison"] = self.comparison.to_dict()
        return payload

    def to_text(self) -> str:
        lines = [f"problem: {self.problem}", f"engine: {self.engine.value}"]
        lines += [f"operator: {op.to_text()}" for op in self.operators]
        if self.recurrence is not None:
            lines.append(f"recurrence: {self.recurrence.to_text()}")
        if self.terms is not None:
            counts = ", ".join(format_rational(v) for v in self.terms.counts())
            lines.append(f"terms ({self.normalization.value}): {counts}")
        for check in self.checks:
            detail = f"{check.checked} coefficients"
            if check.first_failure is not None:
                detail += f", first failure at {check.first_failure}"
            lines.append(f"check {check.subject}: {check.status} ({detail})")
        if self.growth is not None:
            lines.append(f"growth: {self.growth.to_text()}")
        if self.comparison is not None:
            lines.append(f"compare {self.comparison.to_text()}")
        return "\n".join(lines) + "\n"

    def render(self, format: OutputFormat = OutputFormat.text) -> str:
        if format is OutputFormat.structured:
            return _to_json(self.to_dict()) + "\n"
        return self.to_text()
