from __future__ import annotations

from typing import List, Literal, Tuple, TypedDict

from typing_extensions import NotRequired

__all__: Tuple[str, ...] = (
    "NormalizationName",
    "RecurrencePayload",
    "WindowPayload",
    "TermPayload",
    "GrowthPayload",
)


NormalizationName = Literal["EGF", "OGF"]


class RecurrencePayload(TypedDict):
    order: int
    coefficients: List[str]
    text: str


class WindowPayload(TypedDict):
    start: int
    normalization: NormalizationName
    values: List[str]
    counts: List[str]


class TermPayload(TypedDict):
    n: int
    value: str


class GrowthPayload(TypedDict):
    exponent: str
    step: NotRequired[int]
    ratio_power: NotRequired[str]
    text: str
