"""Edge conditions: small declarative predicates over a model response.

Declarative conditions serialize to tree files. ``Custom`` wraps any callable
and is accepted by the engine but cannot be written to disk.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import TYPE_CHECKING, Any, Callable

if TYPE_CHECKING:
    from ordex.tree.graph import RunState


@dataclass(frozen=True)
class Contains:
    """Case-insensitive substring test."""

    keyword: str
    kind = "contains"

    def __call__(self, response: str, state: RunState | None = None) -> bool:
        return self.keyword.casefold() in response.casefold()

    @property
    def arg(self) -> str:
        return self.keyword


@dataclass(frozen=True)
class Option:
    """Matches a numbered option such as ``#7.1`` without matching ``#7.10``."""

    number: str
    kind = "option"
    _regex: re.Pattern = field(init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        number = self.number.lstrip("#")
        object.__setattr__(self, "number", number)
        object.__setattr__(self, "_regex", re.compile(r"#\s?" + re.escape(number) + r"(?!\.?\d)"))

    def __call__(self, response: str, state: RunState | None = None) -> bool:
        return self._regex.search(response) is not None

    @property
    def arg(self) -> str:
        return self.number


@dataclass(frozen=True)
class Regex:
    """``re.search`` with IGNORECASE and DOTALL."""

    pattern: str
    kind = "regex"
    _regex: re.Pattern = field(init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        object.__setattr__(self, "_regex", re.compile(self.pattern, re.IGNORECASE | re.DOTALL))

    def __call__(self, response: str, state: RunState | None = None) -> bool:
        return self._regex.search(response) is not None

    @property
    def arg(self) -> str:
        return self.pattern


@dataclass(frozen=True)
class Always:
    kind = "always"

    def __call__(self, response: str, state: RunState | None = None) -> bool:
        return True

    @property
    def arg(self) -> bool:
        return True


@dataclass(frozen=True)
class Custom:
    fn: Callable[[str, Any], bool]
    name: str = "custom"
    kind = "custom"

    def __call__(self, response: str, state: RunState | None = None) -> bool:
        return bool(self.fn(response, state))


DECLARATIVE = {"contains": Contains, "option": Option, "regex": Regex, "always": Always}


def from_spec(kind: str, arg: Any) -> Contains | Option | Regex | Always:
    try:
        cls = DECLARATIVE[kind]
    except KeyError:
        raise ValueError(f"unknown condition kind {kind!r}; expected one of {sorted(DECLARATIVE)}") from None
    if cls is Always:
        return Always()
    return cls(str(arg))
