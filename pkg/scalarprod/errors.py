from __future__ import annotations

from typing import Any, Dict, Optional, Sequence, Tuple

__all__: Tuple[str, ...] = (
    "ScalarProductException",
    "SignatureMismatch",
    "AdjointUndefined",
    "SubstitutionError",
    "ResourceLimitExceeded",
    "BudgetExceeded",
    "ParseError",
    "InsufficientTruncation",
    "InconclusiveCheck",
    "VerificationFailure",
    "SingularRecurrence",
    "InconclusiveGrowth",
    "EliminationFailure",
    "DegenerateSystem",
    "SizeLimitExceeded",
    "BFileError",
)


class ScalarProductException(Exception):
    """Base exception of the library.

    Every error raised on purpose by ``scalarprod`` derives from this class,
    so catching it is enough to handle all of them.
    """


class SignatureMismatch(ScalarProductException):
    """Two operators over different algebras were combined."""


class AdjointUndefined(ScalarProductException):
    """The adjunction was applied to an operator containing a ∂t-block letter."""


class SubstitutionError(ScalarProductException):
    """A substitution was requested outside of the supported families."""


class ResourceLimitExceeded(ScalarProductException):
    """A computation went beyond a configured resource limit."""


class BudgetExceeded(ResourceLimitExceeded):
    """A :class:`Budget` limit was hit.

    Attributes
    ----------
    state: Dict[:class:`str`, Any]
        Diagnostic counters of the computation at the moment it stopped.
    """

    def __init__(self, message: str, state: Optional[Dict[str, Any]] = None) -> None:
        super().__init__(message)
        self.state: Dict[str, Any] = dict(state or {})


class ParseError(ScalarProductException):
    """The operator, polynomial or recurrence text could not be read.

    Attributes
    ----------
    position: :class:`int`
        Offset of the offending character in the input text.
    """

    def __init__(self, message: str, position: int = 0) -> None:
        super().__init__(f"{message} (at position {position})")
        self.position = position


class InsufficientTruncation(ScalarProductException):
    """The truncated series do not determine the requested order.

    Attributes
    ----------
    attainable: :class:`int`
        The largest t-order the truncation determines exactly (``-1`` if none).
    """

    def __init__(self, requested: int, attainable: int) -> None:
        super().__init__(
            f"requested order {requested} but the truncation only determines up to {attainable}"
        )
        self.requested = requested
        self.attainable = attainable


class InconclusiveCheck(ScalarProductException):
    """An annihilation check had fewer coefficients to look at than the configured floor."""


class VerificationFailure(ScalarProductException):
    """An operator failed its oracle annihilation check.

    Attributes
    ----------
    check: Any
        The failing :class:`~scalarprod.oracle.CheckResult`.
    """

    def __init__(self, message: str, check: Any = None) -> None:
        super().__init__(message)
        self.check = check


class SingularRecurrence(ScalarProductException):
    """Unrolling needs initial terms that were not supplied.

    Attributes
    ----------
    missing: Tuple[:class:`int`, ...]
        The indices whose values must be provided.
    """

    def __init__(self, missing: Sequence[int]) -> None:
        self.missing: Tuple[int, ...] = tuple(missing)
        super().__init__(f"initial terms missing at indices {list(self.missing)}")


class InconclusiveGrowth(ScalarProductException):
    """The dominant edge of the Newton polygon has three or more points.

    Attributes
    ----------
    edge: Tuple[Tuple[:class:`int`, :class:`int`], ...]
        The ``(shift, degree)`` points on the edge, left to manual analysis.
    """

    def __init__(self, edge: Sequence[Tuple[int, int]]) -> None:
        self.edge: Tuple[Tuple[int, int], ...] = tuple(edge)
        super().__init__(f"dominant balance involves {len(self.edge)} terms: {list(self.edge)}")


class EliminationFailure(ScalarProductException):
    """Skew elimination could not remove the requested letter."""


class DegenerateSystem(ScalarProductException):
    """Every operator vanished after a specialization."""


class SizeLimitExceeded(ScalarProductException):
    """An exhaustive enumeration was asked for beyond its size limit."""


class BFileError(ScalarProductException):
    """A b-file could not be read or fetched."""
