from __future__ import annotations

import enum
from typing import Any, Generator, Tuple

__all__: Tuple[str, ...] = ("Action",)


class Action(enum.IntFlag):
    """The artifacts a job produces besides the operators themselves."""

    ode = enum.auto()
    rec = enum.auto()
    terms = enum.auto()
    oracle_check = enum.auto()
    growth = enum.auto()

    def __iter__(self) -> Generator[Action, Any, None]:
        cls = type(self)
        n = self.value

        while n:
            b = n & -n
            yield cls(b)
            n ^= b

    @property
    def flag_name(self) -> str:
        if self._name_:
            return self._name_.replace("_", "-")

        raise RuntimeError("This is a library bug.")

    @classmethod
    def none(cls) -> Action:
        return cls(0)

    @classmethod
    def all(cls) -> Action:
        actions = cls.none()
        for action in cls._member_map_.values():
            actions |= action  # type: ignore
        return actions
