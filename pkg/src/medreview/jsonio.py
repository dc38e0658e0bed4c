"""JSON wire formats and canonical serialization.

Every document the engine reads or writes is plain JSON; this module is the
single place where domain objects meet dictionaries. canonical_json() gives
byte-stable output (sorted keys, fixed separators) so identical analyses
serialize identically across runs and platforms.
"""

from __future__ import annotations

import csv
import io
import json

from .analysis import (
    AnalysisReport,
    CategoryProfile,
    DosageAssessment,
    DosageStatus,
    EffectContribution,
    EffectProfile,
    GraphNode,
    InteractionGraph,
)
from .drugdb import ResolvedInteraction, Interaction
from .patient import LabResult, MedicationLine, PatientRecord, Sex
from .review import (
    ComparisonReport,
    DosageDelta,
    EffectDelta,
    Intervention,
    ReviewSession,
)
from .rules import (
    Binding,
    DetectedProblem,
    DoseDirection,
    InterventionAction,
    InterventionTemplate,
    RuleKind,
)
from .terminology import AtcCode, Icd10Code, LoincCode, MalformedCode
from .trial import (
    Arm,
    ComparisonStat,
    GoldProblem,
    GoldStandardCase,
    Group,
    PharmacistProfile,
    ReviewRow,
    ReviewSubmission,
    ScoredIntervention,
    TrialRecord,
    TrialSummary,
)
from .units import Dose, UnknownUnit


class FormatError(ValueError):
    """A document does not match its schema; message carries the location."""

    def __init__(self, location: str, message: str):
        self.location = location
        super().__init__(f"{location}: {message}")


def canonical_json(data) -> str:
    """Deterministic serialization: sorted keys, minimal separators, ASCII
    escapes, trailing newline."""
    return json.dumps(data, sort_keys=True, separators=(",", ":"), ensure_ascii=True) + "\n"


def pretty_json(data) -> str:
    return json.dumps(data, sort_keys=True, indent=2, ensure_ascii=False) + "\n"


# --- small helpers -----------------------------------------------------


def _require(doc: dict, key: str, loc: str):
    if key not in doc:
        raise FormatError(loc, f"missing required key {key!r}")
    return doc[key]


def _expect_dict(value, loc: str) -> dict:
    if not isinstance(value, dict):
        raise FormatError(loc, "expected a JSON object")
    return value


def _expect_list(value, loc: str) -> list:
    if not isinstance(value, list):
        raise FormatError(loc, "expected a JSON array")
    return value


def _code(value, cls, loc: str):
    if not isinstance(value, str):
        raise FormatError(loc, f"expected a {cls.__name__} string")
    try:
        return cls(value)
    except MalformedCode as exc:
        raise FormatError(loc, str(exc)) from exc


def _number(value, loc: str) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise FormatError(loc, f"expected a number, got {value!r}")
    return float(value)


def _integer(value, loc: str) -> int:
    if isinstance(value, bool) or not isinstance(value, int):
        raise FormatError(loc, f"expected an integer, got {value!r}")
    return value


def dose_to_dict(dose: Dose) -> dict:
    return {"value": dose.value, "unit": dose.unit.value}


def dose_from_dict(raw, loc: str) -> Dose:
    doc = _expect_dict(raw, loc)
    value = _number(_require(doc, "value", loc), f"{loc}.value")
    try:
        return Dose(value, str(_require(doc, "unit", loc)))
    except UnknownUnit as exc:
        raise FormatError(f"{loc}.unit", str(exc)) from exc


# --- patients ----------------------------------------------------------


def patient_to_dict(record: PatientRecord) -> dict:
    doc: dict = {
        "id": record.id,
        "age": record.age,
        "sex": record.sex.value,
        "medications": [_medication_to_dict(m) for m in record.medications],
        "conditions": [c.code for c in record.conditions],
        "labs": [
            {
                "loinc": lab.loinc.code,
                "value": lab.value,
                "unit": lab.unit,
                "observed_days_ago": lab.observed_days_ago,
            }
            for lab in record.labs
        ],
    }
    if record.weight_kg is not None:
        doc["weight_kg"] = record.weight_kg
    if record.interview is not None:
        doc["interview"] = record.interview
    if record.pending_labs:
        doc["pending_labs"] = [l.code for l in record.pending_labs]
    return doc


def _medication_to_dict(line: MedicationLine) -> dict:
    doc: dict = {"atc": line.atc.code, "daily_dose": dose_to_dict(line.daily_dose)}
    if line.duration_days is not None:
        doc["duration_days"] = line.duration_days
    if line.indication is not None:
        doc["indication"] = line.indication.code
    return doc


def patient_from_dict(raw, loc: str = "patient") -> PatientRecord:
    doc = _expect_dict(raw, loc)
    patient_id = _require(doc, "id", loc)
    if not isinstance(patient_id, str) or not patient_id:
        raise FormatError(f"{loc}.id", "id must be a non-empty string")
    age = _integer(_require(doc, "age", loc), f"{loc}.age")
    sex_raw = _require(doc, "sex", loc)
    try:
        sex = Sex(sex_raw)
    except ValueError as exc:
        raise FormatError(f"{loc}.sex", f"sex must be male/female/other, got {sex_raw!r}") from exc
    weight = doc.get("weight_kg")
    if weight is not None:
        weight = _number(weight, f"{loc}.weight_kg")

    medications = []
    for i, raw_line in enumerate(_expect_list(doc.get("medications", []), f"{loc}.medications")):
        lloc = f"{loc}.medications[{i}]"
        line = _expect_dict(raw_line, lloc)
        duration = line.get("duration_days")
        if duration is not None:
            duration = _integer(duration, f"{lloc}.duration_days")
        indication = line.get("indication")
        medications.append(
            MedicationLine(
                atc=_code(_require(line, "atc", lloc), AtcCode, f"{lloc}.atc"),
                daily_dose=dose_from_dict(_require(line, "daily_dose", lloc), f"{lloc}.daily_dose"),
                duration_days=duration,
                indication=_code(indication, Icd10Code, f"{lloc}.indication")
                if indication is not None
                else None,
            )
        )

    conditions = tuple(
        _code(c, Icd10Code, f"{loc}.conditions[{i}]")
        for i, c in enumerate(_expect_list(doc.get("conditions", []), f"{loc}.conditions"))
    )
    labs = []
    for i, raw_lab in enumerate(_expect_list(doc.get("labs", []), f"{loc}.labs")):
        lloc = f"{loc}.labs[{i}]"
        lab = _expect_dict(raw_lab, lloc)
        labs.append(
            LabResult(
                loinc=_code(_require(lab, "loinc", lloc), LoincCode, f"{lloc}.loinc"),
                value=_number(_require(lab, "value", lloc), f"{lloc}.value"),
                unit=str(lab.get("unit", "")),
                observed_days_ago=_integer(
                    _require(lab, "observed_days_ago", lloc), f"{lloc}.observed_days_ago"
                ),
            )
        )
    pending = tuple(
        _code(c, LoincCode, f"{loc}.pending_labs[{i}]")
        for i, c in enumerate(_expect_list(doc.get("pending_labs", []), f"{loc}.pending_labs"))
    )
    interview = doc.get("interview")
    if interview is not None and not isinstance(interview, str):
        raise FormatError(f"{loc}.interview", "interview must be a string")

    return PatientRecord(
        id=patient_id,
        age=age,
        sex=sex,
        weight_kg=weight,
        medications=tuple(medications),
        conditions=conditions,
        labs=tuple(labs),
        interview=interview,
        pending_labs=pending,
    )


def load_patient(text: str | bytes) -> PatientRecord:
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise FormatError("patient", f"not valid JSON: {exc}") from exc
    return patient_from_dict(raw)


# --- intervention templates and interventions --------------------------


def template_to_dict(template: InterventionTemplate) -> dict:
    doc: dict = {"action": template.action.value}
    if template.target_atc is not None:
        doc["target_atc"] = template.target_atc.code
    if template.replacement_atc is not None:
        doc["replacement_atc"] = template.replacement_atc.code
    if template.dose_direction is not None:
        doc["dose_direction"] = template.dose_direction.value
    if template.lab_loinc is not None:
        doc["lab_loinc"] = template.lab_loinc.code
    return doc


def template_from_dict(raw, loc: str) -> InterventionTemplate:
    doc = _expect_dict(raw, loc)
    action_raw = _require(doc, "action", loc)
    try:
        action = InterventionAction(action_raw)
    except ValueError as exc:
        raise FormatError(f"{loc}.action", f"unknown action {action_raw!r}") from exc
    direction = doc.get("dose_direction")
    try:
        return InterventionTemplate(
            action=action,
            target_atc=_code(doc["target_atc"], AtcCode, f"{loc}.target_atc")
            if doc.get("target_atc") is not None
            else None,
            replacement_atc=_code(doc["replacement_atc"], AtcCode, f"{loc}.replacement_atc")
            if doc.get("replacement_atc") is not None
            else None,
            dose_direction=DoseDirection(direction) if direction is not None else None,
            lab_loinc=_code(doc["lab_loinc"], LoincCode, f"{loc}.lab_loinc")
            if doc.get("lab_loinc") is not None
            else None,
        )
    except ValueError as exc:
        raise FormatError(loc, str(exc)) from exc


def intervention_to_dict(iv: Intervention) -> dict:
    doc: dict = {"action": iv.action.value}
    if iv.target_atc is not None:
        doc["target_atc"] = iv.target_atc.code
    if iv.new_atc is not None:
        doc["new_atc"] = iv.new_atc.code
    if iv.new_daily_dose is not None:
        doc["new_daily_dose"] = dose_to_dict(iv.new_daily_dose)
    if iv.lab_loinc is not None:
        doc["lab_loinc"] = iv.lab_loinc.code
    if iv.free_comment:
        doc["free_comment"] = iv.free_comment
    return doc


def intervention_from_dict(raw, loc: str = "intervention") -> Intervention:
    doc = _expect_dict(raw, loc)
    action_raw = _require(doc, "action", loc)
    try:
        action = InterventionAction(action_raw)
    except ValueError as exc:
        raise FormatError(f"{loc}.action", f"unknown action {action_raw!r}") from exc
    try:
        return Intervention(
            action=action,
            target_atc=_code(doc["target_atc"], AtcCode, f"{loc}.target_atc")
            if doc.get("target_atc") is not None
            else None,
            new_atc=_code(doc["new_atc"], AtcCode, f"{loc}.new_atc")
            if doc.get("new_atc") is not None
            else None,
            new_daily_dose=dose_from_dict(doc["new_daily_dose"], f"{loc}.new_daily_dose")
            if doc.get("new_daily_dose") is not None
            else None,
            lab_loinc=_code(doc["lab_loinc"], LoincCode, f"{loc}.lab_loinc")
            if doc.get("lab_loinc") is not None
            else None,
            free_comment=str(doc.get("free_comment", "")),
        )
    except ValueError as exc:
        if isinstance(exc, FormatError):
            raise
        raise FormatError(loc, str(exc)) from exc


# --- analysis reports ---------------------------------------------------


def _binding_to_dict(b: Binding) -> dict:
    doc: dict = {"predicate": b.predicate, "kind": b.kind, "matched": b.matched}
    if b.atc is not None:
        doc["atc"] = b.atc
    return doc


def problem_to_dict(p: DetectedProblem) -> dict:
    return {
        "rule_id": p.rule_id,
        "kind": p.kind.value,
        "problem_text": p.problem_text,
        "severity_hint": p.severity_hint,
        "suggestion": template_to_dict(p.suggestion),
        "trigger_bindings": [_binding_to_dict(b) for b in p.trigger_bindings],
    }


def _dosage_to_dict(d: DosageAssessment) -> dict:
    return {
        "atc": d.atc.code,
        "drug_name": d.drug_name,
        "current_daily_dose": d.current_daily_dose,
        "recommended_min": d.recommended_min,
        "recommended_max": d.recommended_max,
        "status": d.status.value,
    }


def _effects_to_dict(profile: EffectProfile) -> dict:
    return {
        "categories": [
            {
                "category": c.category,
                "combined_probability": c.combined_probability,
                "max_severity": c.max_severity,
                "contributors": [
                    {"atc": x.atc.code, "frequency": x.frequency, "severity": x.severity}
                    for x in c.contributors
                ],
            }
            for c in profile.categories
        ]
    }


def _edge_to_dict(e: ResolvedInteraction) -> dict:
    return {
        "drug_a": e.drug_a.code,
        "drug_b": e.drug_b.code,
        "severity_level": e.severity_level,
        "mechanism": e.mechanism,
        "source_a": e.source.atc_a.code,
        "source_b": e.source.atc_b.code,
    }


def _graph_to_dict(g: InteractionGraph) -> dict:
    return {
        "nodes": [{"atc": n.atc.code, "name": n.name} for n in g.nodes],
        "edges": [_edge_to_dict(e) for e in g.edges],
    }


def report_to_dict(report: AnalysisReport) -> dict:
    return {
        "kb_version": report.kb_version,
        "patient_id": report.patient_id,
        "problems": [problem_to_dict(p) for p in report.problems],
        "dosages": [_dosage_to_dict(d) for d in report.dosages],
        "effects": _effects_to_dict(report.effects),
        "interactions": _graph_to_dict(report.interactions),
    }


def comparison_to_dict(cmp: ComparisonReport) -> dict:
    return {
        "problems_resolved": [problem_to_dict(p) for p in cmp.problems_resolved],
        "problems_persisting": [problem_to_dict(p) for p in cmp.problems_persisting],
        "problems_new": [problem_to_dict(p) for p in cmp.problems_new],
        "dosage_deltas": [
            {
                "atc": d.atc.code,
                "before": d.before.value if d.before else None,
                "after": d.after.value if d.after else None,
            }
            for d in cmp.dosage_deltas
        ],
        "effect_deltas": [
            {"category": d.category, "before": d.before, "after": d.after}
            for d in cmp.effect_deltas
        ],
        "interactions_added": [_edge_to_dict(e) for e in cmp.interactions_added],
        "interactions_removed": [_edge_to_dict(e) for e in cmp.interactions_removed],
        "before": report_to_dict(cmp.before),
        "after": report_to_dict(cmp.after),
    }


# --- sessions -----------------------------------------------------------


def session_to_dict(session: ReviewSession) -> dict:
    return {
        "session_id": session.session_id,
        "patient_id": session.patient_id,
        "baseline": patient_to_dict(session.baseline),
        "interventions": [intervention_to_dict(iv) for iv in session.interventions],
        "elapsed_seconds": session.elapsed_seconds,
        "finalized": session.finalized,
        "created": session.created,
        "updated": session.updated,
    }


def session_from_dict(raw, loc: str = "session") -> ReviewSession:
    doc = _expect_dict(raw, loc)
    return ReviewSession(
        session_id=str(_require(doc, "session_id", loc)),
        patient_id=str(_require(doc, "patient_id", loc)),
        baseline=patient_from_dict(_require(doc, "baseline", loc), f"{loc}.baseline"),
        interventions=tuple(
            intervention_from_dict(iv, f"{loc}.interventions[{i}]")
            for i, iv in enumerate(_expect_list(doc.get("interventions", []), f"{loc}.interventions"))
        ),
        elapsed_seconds=_number(doc.get("elapsed_seconds", 0.0), f"{loc}.elapsed_seconds"),
        finalized=bool(doc.get("finalized", False)),
        created=str(doc.get("created", "")),
        updated=str(doc.get("updated", "")),
    )


# --- gold standard ------------------------------------------------------


def gold_case_to_dict(case: GoldStandardCase) -> dict:
    return {
        "case_id": case.case_id,
        "patient": patient_to_dict(case.patient),
        "problems": [
            {
                "problem_id": p.problem_id,
                "description": p.description,
                "optimal": {
                    "intervention": template_to_dict(p.optimal.template),
                    "score": p.optimal.score,
                },
                "alternatives": [
                    {"intervention": template_to_dict(a.template), "score": a.score}
                    for a in p.alternatives
                ],
                "harmful": [template_to_dict(h) for h in p.harmful],
            }
            for p in case.problems
        ],
    }


def gold_case_from_dict(raw, loc: str = "gold") -> GoldStandardCase:
    doc = _expect_dict(raw, loc)
    case_id = str(_require(doc, "case_id", loc))
    patient = patient_from_dict(_require(doc, "patient", loc), f"{loc}.patient")
    problems = []
    for i, raw_p in enumerate(_expect_list(_require(doc, "problems", loc), f"{loc}.problems")):
        ploc = f"{loc}.problems[{i}]"
        p = _expect_dict(raw_p, ploc)
        optimal_raw = _expect_dict(_require(p, "optimal", ploc), f"{ploc}.optimal")
        optimal = ScoredIntervention(
            template=template_from_dict(
                _require(optimal_raw, "intervention", f"{ploc}.optimal"), f"{ploc}.optimal.intervention"
            ),
            score=_integer(_require(optimal_raw, "score", f"{ploc}.optimal"), f"{ploc}.optimal.score"),
        )
        alternatives = []
        for j, raw_a in enumerate(_expect_list(p.get("alternatives", []), f"{ploc}.alternatives")):
            aloc = f"{ploc}.alternatives[{j}]"
            a = _expect_dict(raw_a, aloc)
            alternatives.append(
                ScoredIntervention(
                    template=template_from_dict(_require(a, "intervention", aloc), f"{aloc}.intervention"),
                    score=_integer(_require(a, "score", aloc), f"{aloc}.score"),
                )
            )
        harmful = tuple(
            template_from_dict(h, f"{ploc}.harmful[{j}]")
            for j, h in enumerate(_expect_list(p.get("harmful", []), f"{ploc}.harmful"))
        )
        try:
            problems.append(
                GoldProblem(
                    problem_id=str(_require(p, "problem_id", ploc)),
                    description=str(p.get("description", "")),
                    optimal=optimal,
                    alternatives=tuple(alternatives),
                    harmful=harmful,
                )
            )
        except ValueError as exc:
            raise FormatError(ploc, str(exc)) from exc
    return GoldStandardCase(case_id=case_id, patient=patient, problems=tuple(problems))


def load_gold_cases(text: str | bytes) -> dict[str, GoldStandardCase]:
    """Load one case or an array of cases, keyed by case id."""
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise FormatError("gold", f"not valid JSON: {exc}") from exc
    raw_cases = raw if isinstance(raw, list) else [raw]
    cases = {}
    for i, raw_case in enumerate(raw_cases):
        case = gold_case_from_dict(raw_case, f"gold[{i}]")
        if case.case_id in cases:
            raise FormatError(f"gold[{i}]", f"duplicate case id {case.case_id!r}")
        cases[case.case_id] = case
    return cases


# --- trial records ------------------------------------------------------


def profile_to_dict(profile: PharmacistProfile) -> dict:
    return {
        "pharmacist_id": profile.pharmacist_id,
        "age_class": profile.age_class,
        "sex": profile.sex,
        "stopp_start_known": profile.stopp_start_known,
        "mr_count_last_year": profile.mr_count_last_year,
        "group": profile.group.value,
    }


def profile_from_dict(raw, loc: str = "pharmacist") -> PharmacistProfile:
    doc = _expect_dict(raw, loc)
    group_raw = _require(doc, "group", loc)
    try:
        group = Group(group_raw)
    except ValueError as exc:
        raise FormatError(f"{loc}.group", f"unknown group {group_raw!r}") from exc
    return PharmacistProfile(
        pharmacist_id=str(_require(doc, "pharmacist_id", loc)),
        age_class=str(doc.get("age_class", "")),
        sex=str(doc.get("sex", "")),
        stopp_start_known=bool(doc.get("stopp_start_known", False)),
        mr_count_last_year=_integer(doc.get("mr_count_last_year", 0), f"{loc}.mr_count_last_year"),
        group=group,
    )


def submission_to_dict(sub: ReviewSubmission) -> dict:
    return {
        "pharmacist_id": sub.pharmacist_id,
        "group": sub.group.value,
        "passage": sub.passage,
        "case_id": sub.case_id,
        "arm": sub.arm.value,
        "elapsed_seconds": sub.elapsed_seconds,
        "interventions": [intervention_to_dict(iv) for iv in sub.interventions],
    }


def submission_from_dict(raw, loc: str = "submission") -> ReviewSubmission:
    doc = _expect_dict(raw, loc)
    group_raw = _require(doc, "group", loc)
    try:
        group = Group(group_raw)
    except ValueError as exc:
        raise FormatError(f"{loc}.group", f"unknown group {group_raw!r}") from exc
    arm_raw = _require(doc, "arm", loc)
    try:
        arm = Arm(arm_raw)
    except ValueError as exc:
        raise FormatError(f"{loc}.arm", f"arm must be 'without' or 'with', got {arm_raw!r}") from exc
    passage = _integer(_require(doc, "passage", loc), f"{loc}.passage")
    if passage not in (1, 2, 3, 4):
        raise FormatError(f"{loc}.passage", f"passage must be 1..4, got {passage}")
    return ReviewSubmission(
        pharmacist_id=str(_require(doc, "pharmacist_id", loc)),
        group=group,
        passage=passage,
        case_id=str(_require(doc, "case_id", loc)),
        arm=arm,
        elapsed_seconds=_number(_require(doc, "elapsed_seconds", loc), f"{loc}.elapsed_seconds"),
        interventions=tuple(
            intervention_from_dict(iv, f"{loc}.interventions[{i}]")
            for i, iv in enumerate(_expect_list(doc.get("interventions", []), f"{loc}.interventions"))
        ),
    )


def load_submissions(text: str | bytes) -> list[ReviewSubmission]:
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise FormatError("submissions", f"not valid JSON: {exc}") from exc
    if isinstance(raw, dict):
        raw = raw.get("reviews", raw)
    return [
        submission_from_dict(s, f"submissions[{i}]")
        for i, s in enumerate(_expect_list(raw, "submissions"))
    ]


def load_trial_records(text: str | bytes) -> list[TrialRecord]:
    """Records file: {"pharmacists": [...], "reviews": [...]}, reviews keyed
    to pharmacists by id."""
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise FormatError("records", f"not valid JSON: {exc}") from exc
    doc = _expect_dict(raw, "records")
    profiles = {
        p.pharmacist_id: p
        for p in (
            profile_from_dict(x, f"records.pharmacists[{i}]")
            for i, x in enumerate(_expect_list(_require(doc, "pharmacists", "records"), "records.pharmacists"))
        )
    }
    reviews_by_pharmacist: dict[str, list[ReviewSubmission]] = {pid: [] for pid in profiles}
    for i, raw_sub in enumerate(_expect_list(_require(doc, "reviews", "records"), "records.reviews")):
        sub = submission_from_dict(raw_sub, f"records.reviews[{i}]")
        if sub.pharmacist_id not in profiles:
            raise FormatError(
                f"records.reviews[{i}]", f"unknown pharmacist {sub.pharmacist_id!r}"
            )
        reviews_by_pharmacist[sub.pharmacist_id].append(sub)
    return [
        TrialRecord(profile=profiles[pid], reviews=tuple(sorted(subs, key=lambda s: s.passage)))
        for pid, subs in reviews_by_pharmacist.items()
    ]


# --- summary and CSV ----------------------------------------------------


def _comparison_stat_to_dict(stat: ComparisonStat) -> dict:
    return {
        "n_a": stat.n_a,
        "n_b": stat.n_b,
        "t": stat.t,
        "df": stat.df,
        "p": stat.p,
        "method": stat.method,
    }


def summary_to_dict(summary: TrialSummary) -> dict:
    def arm_stats_to_dict(stats) -> dict:
        return {
            "n": stats.n,
            "mean_pct": stats.mean_pct,
            "mean_cleo": stats.mean_cleo,
            "mean_minutes": stats.mean_minutes,
            "median_minutes": stats.median_minutes,
        }

    return {
        "per_case": {
            case: {arm: arm_stats_to_dict(s) for arm, s in arms.items()}
            for case, arms in summary.per_case.items()
        },
        "overall": {arm: arm_stats_to_dict(s) for arm, s in summary.overall.items()},
        "comparisons": {k: _comparison_stat_to_dict(v) for k, v in summary.comparisons.items()},
        "carryover": {
            label: {k: _comparison_stat_to_dict(v) for k, v in stats.items()}
            for label, stats in summary.carryover.items()
        },
    }


REVIEW_CSV_COLUMNS = (
    "pharmacist_id",
    "group",
    "passage",
    "case",
    "arm",
    "pct_identified",
    "cleo_ratio",
    "seconds",
)

DEMOGRAPHICS_CSV_COLUMNS = (
    "pharmacist_id",
    "group",
    "age_class",
    "sex",
    "stopp_start_known",
    "mr_count_last_year",
)


def rows_to_csv(rows: list[ReviewRow]) -> str:
    # floats use shortest-repr form so the export round-trips exactly
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(REVIEW_CSV_COLUMNS)
    for r in rows:
        writer.writerow(
            [
                r.pharmacist_id,
                r.group,
                r.passage,
                r.case_id,
                r.arm.value,
                repr(r.pct_identified),
                repr(r.cleo_ratio),
                repr(r.seconds),
            ]
        )
    return buffer.getvalue()


def rows_from_csv(text: str) -> list[ReviewRow]:
    reader = csv.DictReader(io.StringIO(text))
    missing = set(REVIEW_CSV_COLUMNS) - set(reader.fieldnames or ())
    if missing:
        raise FormatError("csv", f"missing columns: {', '.join(sorted(missing))}")
    rows = []
    for i, rec in enumerate(reader):
        loc = f"csv row {i + 2}"
        try:
            rows.append(
                ReviewRow(
                    pharmacist_id=rec["pharmacist_id"],
                    group=rec["group"],
                    passage=int(rec["passage"]),
                    case_id=rec["case"],
                    arm=Arm(rec["arm"]),
                    pct_identified=float(rec["pct_identified"]),
                    cleo_ratio=float(rec["cleo_ratio"]),
                    seconds=float(rec["seconds"]),
                )
            )
        except (ValueError, KeyError) as exc:
            raise FormatError(loc, str(exc)) from exc
    return rows


def demographics_to_csv(profiles: list[PharmacistProfile]) -> str:
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(DEMOGRAPHICS_CSV_COLUMNS)
    for p in profiles:
        writer.writerow(
            [
                p.pharmacist_id,
                p.group.value,
                p.age_class,
                p.sex,
                str(p.stopp_start_known).lower(),
                p.mr_count_last_year,
            ]
        )
    return buffer.getvalue()
