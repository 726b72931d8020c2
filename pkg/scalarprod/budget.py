from __future__ import annotations

import logging
import time
from typing import Any, Dict, Optional, Tuple

import attrs

from scalarprod.errors import BudgetExceeded
from scalarprod.utils import to_optional_float, to_positive_int

__all__: Tuple[str, ...] = ("Budget", "Stopwatch")
_log = logging.getLogger(__name__)


@attrs.define(slots=True, frozen=True, kw_only=True)
class Budget:
    """Resource ceilings of the elimination engines.

    Attributes
    ----------
    max_degree: :class:`int`
        Largest total degree of enumerated monomials.
    max_seconds: Optional[:class:`float`]
        Wall-clock ceiling, ``None`` for no ceiling.
    max_rows: :class:`int`
        Largest number of rows kept by an elimination matrix.
    max_pairs: :class:`int`
        Largest number of S-pairs one Buchberger run may reduce.
    check_every: :class:`int`
        With several t-variables, run the zero-dimensionality test after this
        many insertions.
    """

    max_degree: int = attrs.field(default=30, converter=to_positive_int)
    max_seconds: Optional[float] = attrs.field(default=None, converter=to_optional_float)
    max_rows: int = attrs.field(default=20000, converter=to_positive_int)
    max_pairs: int = attrs.field(default=5000, converter=to_positive_int)
    check_every: int = attrs.field(default=10, converter=to_positive_int)

    def start(self) -> Stopwatch:
        return Stopwatch(self)


class Stopwatch:
    """Tracks elapsed time against a :class:`Budget` for one computation."""

    def __init__(self, budget: Budget) -> None:
        self.budget = budget
        self.started = time.monotonic()

    @property
    def elapsed(self) -> float:
        return time.monotonic() - self.started

    def check(self, state: Optional[Dict[str, Any]] = None) -> None:
        limit = self.budget.max_seconds
        if limit is not None and self.elapsed > limit:
            self.exceeded(f"time limit of {limit:g}s exceeded", state)

    def exceeded(self, message: str, state: Optional[Dict[str, Any]] = None) -> None:
        state = dict(state or {})
        state.setdefault("elapsed", round(self.elapsed, 3))
        _log.warning("budget exhausted: %s (%s)", message, state)
        raise BudgetExceeded(message, state)
