from __future__ import annotations

import json
import re
from enum import Enum
from typing import Any, Iterable, Optional, Tuple, Union

import sympy

__all__: Tuple[str, ...] = (
    "Engine",
    "OutputFormat",
    "Normalization",
    "OrderKind",
    "Side",
)

_OEIS_ID = re.compile(r"^A(\d{6})$")
_TRAILING_INDEX = re.compile(r"(\d+)$")
_IDENTIFIER = re.compile(r"[A-Za-z_][A-Za-z_0-9]*")


class Engine(Enum):
    direct = "direct"
    algorithm1 = "algorithm1"
    algorithm3 = "algorithm3"
    hammond = "hammond"
    kronecker = "kronecker"


class OutputFormat(Enum):
    text = "text"
    structured = "structured"


class Normalization(Enum):
    egf = "EGF"
    ogf = "OGF"


class OrderKind(Enum):
    degrevlex = "degrevlex"
    block = "block"


class Side(Enum):
    left = "left"
    right_via_adjoint = "right-via-adjoint"


def _to_json(obj: Any) -> str:
    return json.dumps(obj, separators=(",", ":"), ensure_ascii=True)


def to_names(_v: Union[str, Iterable[str], None]) -> Tuple[str, ...]:
    if _v is None:
        return ()
    if isinstance(_v, str):
        return tuple(s.strip() for s in _v.split(",") if s.strip())
    return tuple(str(s) for s in _v)


def to_positive_int(_v: Any) -> int:
    v = int(_v)
    if v <= 0:
        raise ValueError(f"expected a positive integer, got {_v!r}")
    return v


def to_optional_int(_v: Optional[Any]) -> Optional[int]:
    if _v is None:
        return
    return to_positive_int(_v)


def to_optional_float(_v: Optional[Any]) -> Optional[float]:
    if _v is None:
        return
    v = float(_v)
    if v <= 0:
        raise ValueError(f"expected a positive number of seconds, got {_v!r}")
    return v


def to_expr(_v: Any) -> sympy.Expr:
    """Read a number, expression or text; every name in text is a plain symbol."""
    if isinstance(_v, str):
        text = _v.replace("^", "**")
        names = {name: sympy.Symbol(name) for name in _IDENTIFIER.findall(text)}
        return sympy.sympify(text, locals=names)
    return sympy.sympify(_v)


def variable_index(name: str) -> int:
    """The numeric suffix of a variable name, ``p12 -> 12``; bare names count as 1."""
    m = _TRAILING_INDEX.search(name)
    if m is None:
        return 1
    return int(m.group(1))


def format_rational(q: Any) -> str:
    num, den = int(q.numerator), int(q.denominator)
    if den == 1:
        return str(num)
    return f"{num}/{den}"


def is_oeis_id(text: str) -> bool:
    return _OEIS_ID.match(text) is not None


def bfile_path(anumber: str) -> str:
    m = _OEIS_ID.match(anumber)
    if m is None:
        raise ValueError(f"not an OEIS A-number: {anumber!r}")
    return f"/{anumber}/b{m.group(1)}.txt"
