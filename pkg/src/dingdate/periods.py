"""The 11-class period taxonomy for bronze Dings.

Four dynasties, each split into phases; Shang has only Early and Late,
giving 11 valid (dynasty, phase) pairs with a total chronological order.
"""

from __future__ import annotations

import enum
import functools
from dataclasses import dataclass


class Dynasty(enum.Enum):
    SHANG = "Shang"
    WESTERN_ZHOU = "WesternZhou"
    SPRING_AND_AUTUMN = "SpringAndAutumn"
    WARRING_STATES = "WarringStates"


class Phase(enum.Enum):
    EARLY = "Early"
    MID = "Mid"
    LATE = "Late"


class InvalidPeriodError(ValueError):
    """Raised for a (dynasty, phase) pair outside the 11 valid ones."""


_VALID_PAIRS: tuple[tuple[Dynasty, Phase], ...] = (
    (Dynasty.SHANG, Phase.EARLY),
    (Dynasty.SHANG, Phase.LATE),
    (Dynasty.WESTERN_ZHOU, Phase.EARLY),
    (Dynasty.WESTERN_ZHOU, Phase.MID),
    (Dynasty.WESTERN_ZHOU, Phase.LATE),
    (Dynasty.SPRING_AND_AUTUMN, Phase.EARLY),
    (Dynasty.SPRING_AND_AUTUMN, Phase.MID),
    (Dynasty.SPRING_AND_AUTUMN, Phase.LATE),
    (Dynasty.WARRING_STATES, Phase.EARLY),
    (Dynasty.WARRING_STATES, Phase.MID),
    (Dynasty.WARRING_STATES, Phase.LATE),
)

_CHRONO_INDEX = {pair: i for i, pair in enumerate(_VALID_PAIRS)}


@functools.total_ordering
@dataclass(frozen=True)
class Period:
    """One of the 11 chronological classes, ordered oldest first."""

    dynasty: Dynasty
    phase: Phase

    def __post_init__(self) -> None:
        if (self.dynasty, self.phase) not in _CHRONO_INDEX:
            raise InvalidPeriodError(
                f"no such period: {self.dynasty.value}.{self.phase.value}"
            )

    @property
    def chrono_index(self) -> int:
        return _CHRONO_INDEX[(self.dynasty, self.phase)]

    def __lt__(self, other: "Period") -> bool:
        if not isinstance(other, Period):
            return NotImplemented
        return self.chrono_index < other.chrono_index

    def __str__(self) -> str:
        return f"{self.dynasty.value}.{self.phase.value}"

    @classmethod
    def parse(cls, text: str) -> "Period":
        """Parse the canonical "<Dynasty>.<Phase>" form, e.g. "Shang.Late"."""
        dyn_name, sep, phase_name = text.partition(".")
        if not sep:
            raise InvalidPeriodError(f"malformed period string: {text!r}")
        try:
            dynasty = Dynasty(dyn_name)
            phase = Phase(phase_name)
        except ValueError:
            raise InvalidPeriodError(f"malformed period string: {text!r}") from None
        return cls(dynasty, phase)


PERIODS: tuple[Period, ...] = tuple(Period(d, p) for d, p in _VALID_PAIRS)
