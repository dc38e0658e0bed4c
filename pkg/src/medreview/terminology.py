"""Code-system primitives: ATC, ICD-10 and LOINC codes with prefix matching.

Drug classes, condition groups and screening criteria all name code
*prefixes*; membership is plain prefix containment on the normalized form.
ICD-10 matching ignores the dot (I50.1 is a member of I50). LOINC codes are
shape-checked only, the check digit is not verified.
"""

from __future__ import annotations

import re
from dataclasses import dataclass


class MalformedCode(ValueError):
    """A code string does not match its code system's pattern."""

    def __init__(self, code: str, position: int, reason: str):
        self.code = code
        self.position = position
        self.reason = reason
        super().__init__(f"{code!r}: {reason} (at position {position})")


# ATC levels are 1, 3, 4, 5 and 7 characters: letter, 2 digits, letter,
# letter, 2 digits. Any truncation at a level boundary is a valid class.
_ATC_FULL = re.compile(r"^[A-Z]\d{2}[A-Z]{2}\d{2}$")
_ATC_LEVEL_PATTERNS = (
    re.compile(r"^[A-Z]$"),
    re.compile(r"^[A-Z]\d{2}$"),
    re.compile(r"^[A-Z]\d{2}[A-Z]$"),
    re.compile(r"^[A-Z]\d{2}[A-Z]{2}$"),
    _ATC_FULL,
)

# Letter + 2 digits, optionally "." + 1-2 alphanumerics; bare prefixes down
# to a single letter are allowed so rules can target whole chapters.
_ICD10_PREFIX = re.compile(r"^[A-Z]\d{0,2}$")
_ICD10_CODE = re.compile(r"^[A-Z]\d{2}(\.[A-Z0-9]{1,2})?$")

_LOINC = re.compile(r"^\d+-\d$")


@dataclass(frozen=True)
class AtcCode:
    """An ATC code or class prefix, uppercase-normalized."""

    code: str

    def __post_init__(self):
        normalized = self.code.upper()
        object.__setattr__(self, "code", normalized)
        if not normalized:
            raise MalformedCode(self.code, 0, "empty ATC code")
        if not any(p.match(normalized) for p in _ATC_LEVEL_PATTERNS):
            raise MalformedCode(
                normalized, _first_mismatch(normalized), "not a valid ATC level prefix"
            )

    @property
    def is_full(self) -> bool:
        """True for a complete 7-character substance code."""
        return bool(_ATC_FULL.match(self.code))

    def matches(self, class_prefix: "AtcCode") -> bool:
        return self.code.startswith(class_prefix.code)

    def __str__(self) -> str:
        return self.code


@dataclass(frozen=True)
class Icd10Code:
    """An ICD-10 code or class prefix.

    The display form keeps the dot; ``canonical`` is the dot-stripped form
    used for matching.
    """

    code: str

    def __post_init__(self):
        normalized = self.code.upper()
        object.__setattr__(self, "code", normalized)
        if not (_ICD10_CODE.match(normalized) or _ICD10_PREFIX.match(normalized)):
            raise MalformedCode(
                normalized, _first_mismatch(normalized), "not a valid ICD-10 code or prefix"
            )

    @property
    def canonical(self) -> str:
        return self.code.replace(".", "")

    def matches(self, prefix: "Icd10Code") -> bool:
        return self.canonical.startswith(prefix.canonical)

    def __str__(self) -> str:
        return self.code


@dataclass(frozen=True)
class LoincCode:
    """A LOINC identifier (digits, dash, check digit).

    Only the syntactic shape is validated; the mod-10 check digit is not
    verified, LOINC is used purely as an identifier namespace here.
    """

    code: str

    def __post_init__(self):
        if not _LOINC.match(self.code):
            raise MalformedCode(
                self.code, _first_mismatch(self.code), "not digits-dash-checkdigit"
            )

    def __str__(self) -> str:
        return self.code


def _first_mismatch(code: str) -> int:
    """Best-effort index of the first offending character, for error messages."""
    for i, ch in enumerate(code):
        if not (ch.isalnum() or ch in ".-"):
            return i
    return len(code)


def parse_atc(text: str) -> AtcCode:
    """Parse and normalize an ATC code or class prefix.

    Raises MalformedCode unless the text is a valid ATC level prefix.
    """
    return AtcCode(text)


def parse_icd10(text: str) -> Icd10Code:
    return Icd10Code(text)


def parse_loinc(text: str) -> LoincCode:
    return LoincCode(text)


def atc_matches(code: AtcCode, class_prefix: AtcCode) -> bool:
    """Class membership: true iff code starts with the class prefix."""
    return code.matches(class_prefix)


def icd10_matches(code: Icd10Code, prefix: Icd10Code) -> bool:
    """Prefix containment on dot-stripped canonical forms."""
    return code.matches(prefix)
