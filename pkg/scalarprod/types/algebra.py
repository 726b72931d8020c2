from __future__ import annotations

from typing import Dict, List, Literal, Tuple, TypedDict

__all__: Tuple[str, ...] = (
    "BlockName",
    "SignaturePayload",
    "OperatorTermPayload",
    "OperatorPayload",
)


BlockName = Literal["dt", "dl", "dr"]


class SignaturePayload(TypedDict, total=False):
    p_vars: List[str]
    t_vars: List[str]
    blocks: List[BlockName]
    params: List[str]


class OperatorTermPayload(TypedDict):
    numerator: str
    denominator: str
    monomial: Dict[str, int]


class OperatorPayload(TypedDict):
    signature: SignaturePayload
    terms: List[OperatorTermPayload]
    text: str
