"""Patient records and the derived clinical context rules evaluate against.

A PatientRecord is an immutable snapshot: demographics, medication lines
(full ATC code, daily dose, optional duration and indication), coded
conditions and lab results. derive_context() computes the values dosage
rules and screening criteria need: age, creatinine clearance
(Cockcroft-Gault), hepatic impairment and the co-prescribed drug set.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, replace

from .terminology import AtcCode, Icd10Code, LoincCode, icd10_matches
from .units import Dose

# Serum creatinine, mass concentration. The clearance formula is pinned to
# mg/dL, so only results carrying that unit are used.
CREATININE_LOINC = LoincCode("2160-0")
CREATININE_UNIT = "mg/dL"

# Conditions counting as hepatic impairment, overridable in derive_context.
DEFAULT_HEPATIC_PREFIXES = ("K70", "K71", "K72", "K74")


class Sex(enum.Enum):
    MALE = "male"
    FEMALE = "female"
    OTHER = "other"


@dataclass(frozen=True)
class MedicationLine:
    atc: AtcCode  # full substance code
    daily_dose: Dose
    duration_days: int | None = None
    indication: Icd10Code | None = None


@dataclass(frozen=True)
class LabResult:
    loinc: LoincCode
    value: float
    unit: str
    observed_days_ago: int


@dataclass(frozen=True)
class PatientRecord:
    id: str
    age: int
    sex: Sex
    weight_kg: float | None = None
    medications: tuple[MedicationLine, ...] = ()
    conditions: tuple[Icd10Code, ...] = ()
    labs: tuple[LabResult, ...] = ()
    interview: str | None = None  # free-text interview notes, opaque to the engine
    pending_labs: tuple[LoincCode, ...] = ()

    def with_medications(self, medications: tuple[MedicationLine, ...]) -> "PatientRecord":
        return replace(self, medications=medications)

    def current_lab(self, loinc: LoincCode) -> LabResult | None:
        """Most recent result for a LOINC code; ties break by record order."""
        best = None
        for lab in self.labs:
            if lab.loinc == loinc and (best is None or lab.observed_days_ago < best.observed_days_ago):
                best = lab
        return best


@dataclass(frozen=True)
class PatientContext:
    """Derived values consumed by dosage rules and rule predicates."""

    age: int
    sex: Sex
    creatinine_clearance: float | None
    hepatic_impairment: bool
    conditions: tuple[Icd10Code, ...]
    co_prescribed: frozenset[AtcCode]


@dataclass(frozen=True)
class ValidationFinding:
    path: str
    code: str
    message: str


class NonPositiveCreatinine(ValueError):
    def __init__(self, value: float):
        self.value = value
        super().__init__(f"serum creatinine must be positive, got {value}")


def validate_patient(record: PatientRecord) -> list[ValidationFinding]:
    """Check record invariants; an empty list means the record is valid.

    Findings are order-insensitive with respect to list permutations: each
    finding's path names the offending entry by content, not position.
    """
    findings = []
    if record.age < 0:
        findings.append(ValidationFinding("age", "NegativeAge", f"age {record.age} < 0"))
    if record.weight_kg is not None and record.weight_kg <= 0:
        findings.append(
            ValidationFinding("weight_kg", "InvalidWeight", f"weight {record.weight_kg} <= 0")
        )
    seen: set[str] = set()
    for line in record.medications:
        key = line.atc.code
        if key in seen:
            findings.append(
                ValidationFinding(
                    f"medications[{key}]",
                    "DuplicateMedication",
                    f"ATC {key} appears on more than one line",
                )
            )
        seen.add(key)
        if not line.atc.is_full:
            findings.append(
                ValidationFinding(
                    f"medications[{key}]",
                    "NotAFullCode",
                    f"medication lines need a full 7-character ATC code, got {key}",
                )
            )
        if line.daily_dose.value < 0:
            findings.append(
                ValidationFinding(
                    f"medications[{key}].daily_dose",
                    "InvalidDose",
                    f"daily dose {line.daily_dose.value} < 0",
                )
            )
        if line.duration_days is not None and line.duration_days < 0:
            findings.append(
                ValidationFinding(
                    f"medications[{key}].duration_days",
                    "InvalidDuration",
                    f"duration {line.duration_days} < 0",
                )
            )
    for lab in record.labs:
        if lab.observed_days_ago < 0:
            findings.append(
                ValidationFinding(
                    f"labs[{lab.loinc}]",
                    "InvalidObservationAge",
                    f"observed_days_ago {lab.observed_days_ago} < 0",
                )
            )
    findings.sort(key=lambda f: (f.path, f.code))
    return findings


def creatinine_clearance(record: PatientRecord) -> float | None:
    """Cockcroft-Gault estimate in mL/min, or None when inputs are missing.

    ((140 - age) * weight_kg) / (72 * serum_creatinine[mg/dL]), times 0.85
    for female patients. Requires weight and a serum-creatinine lab result
    in mg/dL; the most recent result is used.
    """
    if record.weight_kg is None:
        return None
    lab = _current_creatinine(record)
    if lab is None:
        return None
    if lab.value <= 0:
        raise NonPositiveCreatinine(lab.value)
    clearance = ((140 - record.age) * record.weight_kg) / (72 * lab.value)
    if record.sex is Sex.FEMALE:
        clearance *= 0.85
    return clearance


def _current_creatinine(record: PatientRecord) -> LabResult | None:
    best = None
    for lab in record.labs:
        if lab.loinc != CREATININE_LOINC or lab.unit != CREATININE_UNIT:
            continue
        if best is None or lab.observed_days_ago < best.observed_days_ago:
            best = lab
    return best


def derive_context(
    record: PatientRecord,
    hepatic_prefixes: tuple[str, ...] = DEFAULT_HEPATIC_PREFIXES,
) -> PatientContext:
    """Pure derivation of the evaluation context from a validated record."""
    prefixes = tuple(Icd10Code(p) for p in hepatic_prefixes)
    hepatic = any(
        icd10_matches(cond, prefix) for cond in record.conditions for prefix in prefixes
    )
    return PatientContext(
        age=record.age,
        sex=record.sex,
        creatinine_clearance=creatinine_clearance(record),
        hepatic_impairment=hepatic,
        conditions=record.conditions,
        co_prescribed=frozenset(line.atc for line in record.medications),
    )
