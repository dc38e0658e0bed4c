"""Daily-dose values and the closed unit set shared by prescriptions and
dosage rules.

There is deliberately no unit conversion: comparing doses across units is a
unit_mismatch outcome, never a silent coercion.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass


class DoseUnit(enum.Enum):
    MG_PER_DAY = "mg/day"
    UG_PER_DAY = "µg/day"
    G_PER_DAY = "g/day"
    IU_PER_DAY = "IU/day"
    TABLETS_PER_DAY = "tablets/day"

    def __str__(self) -> str:
        return self.value


_ALIASES = {
    "ug/day": DoseUnit.UG_PER_DAY,  # ASCII spelling of µg/day
    "iu/day": DoseUnit.IU_PER_DAY,
}


class UnknownUnit(ValueError):
    def __init__(self, text: str):
        self.text = text
        allowed = ", ".join(u.value for u in DoseUnit)
        super().__init__(f"unknown dose unit {text!r}; allowed: {allowed}")


def parse_unit(text: str) -> DoseUnit:
    for unit in DoseUnit:
        if text == unit.value:
            return unit
    alias = _ALIASES.get(text.lower())
    if alias is not None:
        return alias
    raise UnknownUnit(text)


@dataclass(frozen=True)
class Dose:
    """A daily dose: non-negative value plus a unit from the closed set."""

    value: float
    unit: DoseUnit

    def __post_init__(self):
        if isinstance(self.unit, str):
            object.__setattr__(self, "unit", parse_unit(self.unit))
        object.__setattr__(self, "value", float(self.value))

    def __str__(self) -> str:
        value = int(self.value) if self.value == int(self.value) else self.value
        return f"{value} {self.unit.value}"
