from __future__ import annotations

from typing import List, Literal, Optional, Tuple, TypedDict

from typing_extensions import NotRequired

from .algebra import OperatorPayload
from .sequences import GrowthPayload, RecurrencePayload, TermPayload

__all__: Tuple[str, ...] = (
    "CheckStatus",
    "CompareStatus",
    "CheckPayload",
    "ComparisonPayload",
    "ReportPayload",
)


CheckStatus = Literal["passed", "failed", "skipped"]
CompareStatus = Literal["equal", "mismatch", "inconclusive"]


class CheckPayload(TypedDict):
    operator: str
    status: CheckStatus
    checked: int
    first_failure: NotRequired[int]


class ComparisonPayload(TypedDict):
    source: str
    status: CompareStatus
    compared: int
    first_divergence: NotRequired[int]
    expected: NotRequired[str]
    actual: NotRequired[str]


class ReportPayload(TypedDict):
    problem: str
    engine: str
    normalization: str
    operators: List[OperatorPayload]
    recurrence: Optional[RecurrencePayload]
    terms: List[TermPayload]
    checks: List[CheckPayload]
    growth: NotRequired[GrowthPayload]
    comparison: NotRequired[ComparisonPayload]
