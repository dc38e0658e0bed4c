"""Medication-review sessions and the comparative before/after analysis.

A session snapshots a baseline record and accumulates ordered pharmacist
interventions. compare() re-analyzes the treatment after applying them and
partitions detected problems into resolved / persisting / new, alongside
dosage, effect and interaction deltas, so an intervention plan can be
checked for solving problems without introducing new ones.
"""

from __future__ import annotations

import uuid
from dataclasses import dataclass, field, replace
from datetime import datetime, timezone

from .analysis import AnalysisReport, DosageStatus, analyze
from .drugdb import DrugKB, ResolvedInteraction
from .patient import MedicationLine, PatientRecord
from .rules import DetectedProblem, InterventionAction, RuleSet
from .terminology import AtcCode, LoincCode, atc_matches
from .units import Dose


class InterventionError(ValueError):
    pass


class TargetNotFound(InterventionError):
    def __init__(self, atc: AtcCode):
        self.atc = atc
        super().__init__(f"no medication line matches {atc}")


class DuplicatePrescription(InterventionError):
    def __init__(self, atc: AtcCode):
        self.atc = atc
        super().__init__(f"{atc} is already prescribed")


class MissingDose(InterventionError):
    def __init__(self, atc: AtcCode | None):
        super().__init__(f"prescribing {atc or 'a drug'} requires a daily dose")


class FullCodeRequired(InterventionError):
    def __init__(self, atc: AtcCode):
        self.atc = atc
        super().__init__(f"prescriptions need a full 7-character ATC code, got {atc}")


class SessionFinalized(RuntimeError):
    def __init__(self, session_id: str):
        super().__init__(f"session {session_id} is finalized and cannot change")


@dataclass(frozen=True)
class Intervention:
    """A pharmacist's proposed change, field requirements depending on action:
    deprescribe(target), prescribe(target + dose), replace(target + new_atc +
    dose), change_dose(target + dose), lab_test(loinc)."""

    action: InterventionAction
    target_atc: AtcCode | None = None
    new_atc: AtcCode | None = None
    new_daily_dose: Dose | None = None
    lab_loinc: LoincCode | None = None
    free_comment: str = ""

    def __post_init__(self):
        a = self.action
        if a is not InterventionAction.LAB_TEST and self.target_atc is None:
            raise InterventionError(f"{a.value} needs target_atc")
        if a is InterventionAction.REPLACE and self.new_atc is None:
            raise InterventionError("replace needs new_atc")
        if a is InterventionAction.CHANGE_DOSE and self.new_daily_dose is None:
            raise InterventionError("change_dose needs new_daily_dose")
        if a is InterventionAction.LAB_TEST and self.lab_loinc is None:
            raise InterventionError("lab_test needs lab_loinc")


def apply_interventions(
    baseline: PatientRecord, interventions: list[Intervention] | tuple[Intervention, ...]
) -> PatientRecord:
    """Apply interventions in order to produce the modified treatment.

    Targets are matched by ATC prefix containment, so class-level targets
    (deprescribe(C03C)) act on every matching line. replace is deprescribe
    plus prescribe, atomically. lab_test only appends a pending-lab marker.
    """
    record = baseline
    for iv in interventions:
        record = _apply_one(record, iv)
    return record


def _apply_one(record: PatientRecord, iv: Intervention) -> PatientRecord:
    action = iv.action
    if action is InterventionAction.LAB_TEST:
        return replace(record, pending_labs=record.pending_labs + (iv.lab_loinc,))

    if action is InterventionAction.DEPRESCRIBE:
        remaining = _without_target(record, iv.target_atc)
        return record.with_medications(remaining)

    if action is InterventionAction.PRESCRIBE:
        return record.with_medications(
            record.medications + (_new_line(record.medications, iv.target_atc, iv.new_daily_dose),)
        )

    if action is InterventionAction.REPLACE:
        remaining = _without_target(record, iv.target_atc)
        return record.with_medications(
            remaining + (_new_line(remaining, iv.new_atc, iv.new_daily_dose),)
        )

    # change_dose
    if iv.new_daily_dose is None:
        raise MissingDose(iv.target_atc)
    matched = False
    lines = []
    for line in record.medications:
        if atc_matches(line.atc, iv.target_atc):
            matched = True
            lines.append(replace(line, daily_dose=iv.new_daily_dose))
        else:
            lines.append(line)
    if not matched:
        raise TargetNotFound(iv.target_atc)
    return record.with_medications(tuple(lines))


def _without_target(record: PatientRecord, target: AtcCode) -> tuple[MedicationLine, ...]:
    remaining = tuple(line for line in record.medications if not atc_matches(line.atc, target))
    if len(remaining) == len(record.medications):
        raise TargetNotFound(target)
    return remaining


def _new_line(
    existing: tuple[MedicationLine, ...], atc: AtcCode, dose: Dose | None
) -> MedicationLine:
    if not atc.is_full:
        raise FullCodeRequired(atc)
    if dose is None:
        raise MissingDose(atc)
    if any(line.atc == atc for line in existing):
        raise DuplicatePrescription(atc)
    return MedicationLine(atc=atc, daily_dose=dose)


# --- sessions ----------------------------------------------------------


def _now() -> str:
    return datetime.now(timezone.utc).isoformat(timespec="seconds")


@dataclass(frozen=True)
class ReviewSession:
    """Snapshot of a baseline plus the ordered intervention list.

    Timestamps are bookkeeping and excluded from equality, so adding then
    removing an intervention restores a session equal to the prior state.
    """

    session_id: str
    patient_id: str
    baseline: PatientRecord
    interventions: tuple[Intervention, ...] = ()
    elapsed_seconds: float = 0.0
    finalized: bool = False
    created: str = field(default="", compare=False)
    updated: str = field(default="", compare=False)


def create_session(patient: PatientRecord, session_id: str | None = None) -> ReviewSession:
    now = _now()
    return ReviewSession(
        session_id=session_id or uuid.uuid4().hex,
        patient_id=patient.id,
        baseline=patient,
        created=now,
        updated=now,
    )


def add_intervention(session: ReviewSession, intervention: Intervention) -> ReviewSession:
    _check_open(session)
    return replace(
        session, interventions=session.interventions + (intervention,), updated=_now()
    )


def remove_last(session: ReviewSession) -> ReviewSession:
    _check_open(session)
    if not session.interventions:
        raise InterventionError("no intervention to remove")
    return replace(session, interventions=session.interventions[:-1], updated=_now())


def add_elapsed(session: ReviewSession, seconds: float) -> ReviewSession:
    _check_open(session)
    if seconds < 0:
        raise InterventionError("elapsed time cannot decrease")
    return replace(session, elapsed_seconds=session.elapsed_seconds + seconds, updated=_now())


def finalize(session: ReviewSession) -> ReviewSession:
    _check_open(session)
    return replace(session, finalized=True, updated=_now())


def _check_open(session: ReviewSession) -> None:
    if session.finalized:
        raise SessionFinalized(session.session_id)


# --- comparison --------------------------------------------------------


@dataclass(frozen=True)
class DosageDelta:
    atc: AtcCode
    before: DosageStatus | None  # None: line absent before
    after: DosageStatus | None


@dataclass(frozen=True)
class EffectDelta:
    category: str
    before: float
    after: float


@dataclass(frozen=True)
class ComparisonReport:
    problems_resolved: tuple[DetectedProblem, ...]
    problems_persisting: tuple[DetectedProblem, ...]
    problems_new: tuple[DetectedProblem, ...]
    dosage_deltas: tuple[DosageDelta, ...]
    effect_deltas: tuple[EffectDelta, ...]
    interactions_added: tuple[ResolvedInteraction, ...]
    interactions_removed: tuple[ResolvedInteraction, ...]
    before: AnalysisReport
    after: AnalysisReport


def compare(session: ReviewSession, kb: DrugKB, rules: RuleSet) -> ComparisonReport:
    """Analyze baseline and post-intervention treatments and diff them.

    Problem identity is (rule id, sorted bound ATC codes), so a problem
    re-detected with the same trigger counts as persisting even if data
    order changed.
    """
    before = analyze(session.baseline, kb, rules)
    modified = apply_interventions(session.baseline, session.interventions)
    after = analyze(modified, kb, rules)

    before_sigs = {p.signature(): p for p in before.problems}
    after_sigs = {p.signature(): p for p in after.problems}
    resolved = tuple(p for sig, p in before_sigs.items() if sig not in after_sigs)
    persisting = tuple(p for sig, p in before_sigs.items() if sig in after_sigs)
    new = tuple(p for sig, p in after_sigs.items() if sig not in before_sigs)

    return ComparisonReport(
        problems_resolved=resolved,
        problems_persisting=persisting,
        problems_new=new,
        dosage_deltas=_dosage_deltas(before, after),
        effect_deltas=_effect_deltas(before, after),
        interactions_added=_edge_diff(after, before),
        interactions_removed=_edge_diff(before, after),
        before=before,
        after=after,
    )


def _dosage_deltas(before: AnalysisReport, after: AnalysisReport) -> tuple[DosageDelta, ...]:
    b = {d.atc: d.status for d in before.dosages}
    a = {d.atc: d.status for d in after.dosages}
    deltas = []
    for atc in sorted(set(b) | set(a), key=lambda c: c.code):
        if b.get(atc) != a.get(atc):
            deltas.append(DosageDelta(atc, b.get(atc), a.get(atc)))
    return tuple(deltas)


def _effect_deltas(before: AnalysisReport, after: AnalysisReport) -> tuple[EffectDelta, ...]:
    b = {c.category: c.combined_probability for c in before.effects.categories}
    a = {c.category: c.combined_probability for c in after.effects.categories}
    deltas = []
    for category in sorted(set(b) | set(a)):
        pb, pa = b.get(category, 0.0), a.get(category, 0.0)
        if pb != pa:
            deltas.append(EffectDelta(category, pb, pa))
    return tuple(deltas)


def _edge_key(e: ResolvedInteraction):
    return (e.drug_a.code, e.drug_b.code, e.severity_level, e.mechanism)


def _edge_diff(x: AnalysisReport, y: AnalysisReport) -> tuple[ResolvedInteraction, ...]:
    """Edges present in x but not in y."""
    y_keys = {_edge_key(e) for e in y.interactions.edges}
    return tuple(e for e in x.interactions.edges if _edge_key(e) not in y_keys)
