"""Simulation-trial harness: randomization groups, gold-standard matching,
review scoring and trial-level aggregation.

Scoring follows a three-tier greedy matching against the gold standard:
optimal templates award the problem's full score, acceptable alternatives a
lower one, harmful patterns -1; anything else scores 0 and is flagged for
manual review. The two review criteria are the fraction of gold problems
identified and the ratio of awarded to gold-standard scores.
"""

from __future__ import annotations

import enum
import random
import statistics
from dataclasses import dataclass

from .patient import PatientRecord
from .review import Intervention
from .rules import InterventionAction, InterventionTemplate
from .stats import (
    InsufficientData,
    ZeroVariance,
    _welch_from_moments,
    log_times,
    welch_t_test,
)
from .terminology import AtcCode


class Group(enum.Enum):
    G1 = "G1"
    G2 = "G2"
    G3 = "G3"
    G4 = "G4"


class Arm(enum.Enum):
    WITHOUT = "without"
    WITH = "with"


class UnknownGroup(ValueError):
    def __init__(self, value):
        super().__init__(f"unknown randomization group {value!r}")


class ZeroGoldTotal(ValueError):
    def __init__(self, case_id: str):
        super().__init__(f"gold case {case_id} has no scored problems")


# Crossover design: every pharmacist solves all four cases, the first two
# without decision support, the last two with it; the case sequence is a
# Latin square over the groups.
_CASE_ORDERS: dict[Group, tuple[str, str, str, str]] = {
    Group.G1: ("A", "B", "C", "D"),
    Group.G2: ("C", "D", "A", "B"),
    Group.G3: ("B", "A", "D", "C"),
    Group.G4: ("D", "C", "B", "A"),
}

PASSAGE_ARMS = (Arm.WITHOUT, Arm.WITHOUT, Arm.WITH, Arm.WITH)


def case_order(group: Group | str) -> list[tuple[str, Arm]]:
    """The (case, arm) sequence a pharmacist in this group works through."""
    if isinstance(group, str):
        try:
            group = Group(group)
        except ValueError as exc:
            raise UnknownGroup(group) from exc
    return list(zip(_CASE_ORDERS[group], PASSAGE_ARMS))


def assign_group(pharmacist_index: int) -> Group:
    """Plain round-robin over G1..G4 by position."""
    return list(Group)[pharmacist_index % 4]


def assign_groups(pharmacist_ids: list[str], seed: int) -> dict[str, Group]:
    """Balanced randomization: seeded shuffle, then round-robin G1..G4.

    Group sizes differ by at most one; the same seed always yields the
    same assignment.
    """
    ids = list(pharmacist_ids)
    random.Random(seed).shuffle(ids)
    return {pid: assign_group(i) for i, pid in enumerate(ids)}


# --- gold standard -----------------------------------------------------


@dataclass(frozen=True)
class ScoredIntervention:
    template: InterventionTemplate
    score: int  # CLEO clinical scale, 1 (minor) .. 4 (vital)


@dataclass(frozen=True)
class GoldProblem:
    problem_id: str
    description: str
    optimal: ScoredIntervention
    alternatives: tuple[ScoredIntervention, ...] = ()
    harmful: tuple[InterventionTemplate, ...] = ()

    def __post_init__(self):
        if self.optimal.score not in (1, 2, 3, 4):
            raise ValueError(f"{self.problem_id}: optimal score must be 1..4")
        for alt in self.alternatives:
            if not 1 <= alt.score < self.optimal.score:
                raise ValueError(
                    f"{self.problem_id}: alternative score {alt.score} must be below "
                    f"the optimal score {self.optimal.score}"
                )


@dataclass(frozen=True)
class GoldStandardCase:
    case_id: str
    patient: PatientRecord
    problems: tuple[GoldProblem, ...]

    @property
    def gold_total(self) -> int:
        return sum(p.optimal.score for p in self.problems)


# Expected desk metrics of the four reference cases:
# (n drugs, n conditions, n problems, total CLEO score).
REFERENCE_CASE_METRICS: dict[str, tuple[int, int, int, int]] = {
    "A": (8, 8, 6, 10),
    "B": (7, 7, 5, 7),
    "C": (5, 6, 6, 7),
    "D": (5, 5, 5, 11),
}


def check_reference_metrics(case: GoldStandardCase) -> list[str]:
    """Mismatches against the reference metrics table; empty when the case
    is not one of the reference ids or matches exactly."""
    expected = REFERENCE_CASE_METRICS.get(case.case_id)
    if expected is None:
        return []
    actual = (
        len(case.patient.medications),
        len(case.patient.conditions),
        len(case.problems),
        case.gold_total,
    )
    labels = ("drugs", "conditions", "problems", "total CLEO")
    return [
        f"case {case.case_id}: expected {e} {label}, got {a}"
        for label, e, a in zip(labels, expected, actual)
        if e != a
    ]


# --- matching ----------------------------------------------------------


def _atc_compatible(a: AtcCode | None, b: AtcCode | None) -> bool:
    if a is None or b is None:
        return a is None and b is None
    return a.code.startswith(b.code) or b.code.startswith(a.code)


def _matches_template(iv: Intervention, template: InterventionTemplate) -> bool:
    if iv.action is not template.action:
        return False
    action = template.action
    if action is InterventionAction.LAB_TEST:
        return iv.lab_loinc == template.lab_loinc
    if not _atc_compatible(iv.target_atc, template.target_atc):
        return False
    if action is InterventionAction.REPLACE:
        return _atc_compatible(iv.new_atc, template.replacement_atc)
    # change_dose matches on action and target only: a submitted intervention
    # carries the new dose, not a direction.
    return True


@dataclass(frozen=True)
class MatchOutcome:
    submission_index: int
    matched_problem_id: str | None
    tier: str  # optimal | alternative | harmful | unmatched
    awarded: int
    manual_review: bool


@dataclass(frozen=True)
class MatchResult:
    outcomes: tuple[MatchOutcome, ...]
    identified_problem_ids: tuple[str, ...]
    total_awarded: int


def match_interventions(
    submitted: list[Intervention] | tuple[Intervention, ...], gold: GoldStandardCase
) -> MatchResult:
    """Greedy one-to-one matching of submissions against gold problems.

    Submissions are processed in order; each gold problem is consumed at
    most once, by its first optimal- or alternative-tier match. Harmful
    matches award -1 without consuming the problem (it was not identified).
    Unmatched submissions award 0 and are flagged for manual review.
    """
    consumed: set[str] = set()
    outcomes: list[MatchOutcome] = []
    identified: list[str] = []
    total = 0

    for index, iv in enumerate(submitted):
        outcome = None
        for problem in gold.problems:
            if problem.problem_id in consumed:
                continue
            if _matches_template(iv, problem.optimal.template):
                outcome = MatchOutcome(index, problem.problem_id, "optimal", problem.optimal.score, False)
                break
        if outcome is None:
            for problem in gold.problems:
                if problem.problem_id in consumed:
                    continue
                alt = next(
                    (a for a in problem.alternatives if _matches_template(iv, a.template)), None
                )
                if alt is not None:
                    outcome = MatchOutcome(index, problem.problem_id, "alternative", alt.score, False)
                    break
        if outcome is not None:
            consumed.add(outcome.matched_problem_id)
            identified.append(outcome.matched_problem_id)
        else:
            harmful_of = next(
                (
                    p.problem_id
                    for p in gold.problems
                    if any(_matches_template(iv, h) for h in p.harmful)
                ),
                None,
            )
            if harmful_of is not None:
                outcome = MatchOutcome(index, harmful_of, "harmful", -1, False)
            else:
                outcome = MatchOutcome(index, None, "unmatched", 0, True)
        total += outcome.awarded
        outcomes.append(outcome)

    return MatchResult(
        outcomes=tuple(outcomes),
        identified_problem_ids=tuple(identified),
        total_awarded=total,
    )


def problems_identified_pct(match: MatchResult, gold: GoldStandardCase) -> float:
    """Fraction of gold problems the review identified, in [0, 1]."""
    if not gold.problems:
        raise ZeroGoldTotal(gold.case_id)
    return len(match.identified_problem_ids) / len(gold.problems)


def cleo_ratio(match: MatchResult, gold: GoldStandardCase) -> float:
    """Sum of awarded scores over the gold total; negative with harmful
    interventions, never above 1."""
    total = gold.gold_total
    if total <= 0:
        raise ZeroGoldTotal(gold.case_id)
    return match.total_awarded / total


# --- trial records and aggregation -------------------------------------


@dataclass(frozen=True)
class PharmacistProfile:
    pharmacist_id: str
    age_class: str  # e.g. "30-39", "60+"
    sex: str
    stopp_start_known: bool
    mr_count_last_year: int
    group: Group


@dataclass(frozen=True)
class ReviewSubmission:
    pharmacist_id: str
    group: Group
    passage: int  # 1..4
    case_id: str
    arm: Arm
    elapsed_seconds: float
    interventions: tuple[Intervention, ...]


@dataclass(frozen=True)
class TrialRecord:
    profile: PharmacistProfile
    reviews: tuple[ReviewSubmission, ...]


def validate_trial_record(record: TrialRecord) -> list[str]:
    """Protocol conformance: four reviews following the group's case order."""
    findings = []
    expected = case_order(record.profile.group)
    if len(record.reviews) != 4:
        findings.append(
            f"{record.profile.pharmacist_id}: expected 4 reviews, got {len(record.reviews)}"
        )
        return findings
    for i, review in enumerate(sorted(record.reviews, key=lambda r: r.passage)):
        case_id, arm = expected[i]
        if review.passage != i + 1:
            findings.append(f"{record.profile.pharmacist_id}: passage numbers must be 1..4")
        if (review.case_id, review.arm) != (case_id, arm):
            findings.append(
                f"{record.profile.pharmacist_id} passage {i + 1}: expected case {case_id} "
                f"({arm.value}), got {review.case_id} ({review.arm.value})"
            )
    return findings


@dataclass(frozen=True)
class ReviewRow:
    """One scored review: the flat export/summary unit."""

    pharmacist_id: str
    group: str
    passage: int
    case_id: str
    arm: Arm
    pct_identified: float
    cleo_ratio: float
    seconds: float


def score_submission(submission: ReviewSubmission, gold: GoldStandardCase) -> ReviewRow:
    match = match_interventions(submission.interventions, gold)
    return ReviewRow(
        pharmacist_id=submission.pharmacist_id,
        group=submission.group.value,
        passage=submission.passage,
        case_id=submission.case_id,
        arm=submission.arm,
        pct_identified=problems_identified_pct(match, gold),
        cleo_ratio=cleo_ratio(match, gold),
        seconds=submission.elapsed_seconds,
    )


def score_records(
    records: list[TrialRecord], golds: dict[str, GoldStandardCase]
) -> list[ReviewRow]:
    rows = []
    for record in records:
        for submission in record.reviews:
            gold = golds.get(submission.case_id)
            if gold is None:
                raise KeyError(f"no gold standard for case {submission.case_id}")
            rows.append(score_submission(submission, gold))
    return rows


@dataclass(frozen=True)
class ArmStats:
    n: int
    mean_pct: float
    mean_cleo: float
    mean_minutes: float
    median_minutes: float


@dataclass(frozen=True)
class ComparisonStat:
    """A without-vs-with (or passage-vs-passage) test on one criterion."""

    n_a: int
    n_b: int
    t: float | None
    df: float | None
    p: float | None
    method: str  # welch | degenerate | insufficient_data


@dataclass(frozen=True)
class TrialSummary:
    per_case: dict  # case_id -> arm value -> ArmStats
    overall: dict  # arm value -> ArmStats
    comparisons: dict[str, ComparisonStat]  # criterion -> stat (without vs with)
    carryover: dict[str, dict[str, ComparisonStat]]  # passage pair -> criterion -> stat


def _arm_stats(rows: list[ReviewRow]) -> ArmStats:
    minutes = [r.seconds / 60.0 for r in rows]
    return ArmStats(
        n=len(rows),
        mean_pct=statistics.fmean(r.pct_identified for r in rows),
        mean_cleo=statistics.fmean(r.cleo_ratio for r in rows),
        mean_minutes=statistics.fmean(minutes),
        median_minutes=statistics.median(minutes),
    )


def _compare_samples(sample_a: list[float], sample_b: list[float]) -> ComparisonStat:
    """Welch comparison that degrades gracefully on degenerate samples.

    Perfectly separated constant samples (the engineered-fixture case) get
    p=0 when means differ, p=1 when equal; a single constant sample keeps
    the Welch formulas, which stay finite.
    """
    n_a, n_b = len(sample_a), len(sample_b)
    try:
        result = welch_t_test(sample_a, sample_b)
        return ComparisonStat(n_a, n_b, result.t, result.df, result.p, "welch")
    except InsufficientData:
        return ComparisonStat(n_a, n_b, None, None, None, "insufficient_data")
    except ZeroVariance:
        mean_a, mean_b = statistics.fmean(sample_a), statistics.fmean(sample_b)
        var_a = statistics.variance(sample_a, mean_a)
        var_b = statistics.variance(sample_b, mean_b)
        if var_a == 0.0 and var_b == 0.0:
            p = 1.0 if mean_a == mean_b else 0.0
            return ComparisonStat(n_a, n_b, None, None, p, "degenerate")
        result = _welch_from_moments(mean_a, var_a, n_a, mean_b, var_b, n_b)
        return ComparisonStat(n_a, n_b, result.t, result.df, result.p, "welch")


def _criteria_comparisons(
    rows_a: list[ReviewRow], rows_b: list[ReviewRow]
) -> dict[str, ComparisonStat]:
    """The three criteria compared between two row sets; times are logged
    before comparison to damp long durations."""
    out = {
        "pct_identified": _compare_samples(
            [r.pct_identified for r in rows_a], [r.pct_identified for r in rows_b]
        ),
        "cleo_ratio": _compare_samples(
            [r.cleo_ratio for r in rows_a], [r.cleo_ratio for r in rows_b]
        ),
        "log_time": _compare_samples(
            log_times([r.seconds for r in rows_a]) if rows_a else [],
            log_times([r.seconds for r in rows_b]) if rows_b else [],
        ),
    }
    return out


def summarize_rows(rows: list[ReviewRow]) -> TrialSummary:
    """Aggregate scored reviews per (case, arm) and overall, with Welch
    comparisons for the three criteria and the two carryover checks."""
    per_case: dict = {}
    for case_id in sorted({r.case_id for r in rows}):
        per_case[case_id] = {}
        for arm in Arm:
            subset = [r for r in rows if r.case_id == case_id and r.arm is arm]
            if subset:
                per_case[case_id][arm.value] = _arm_stats(subset)
    overall = {}
    for arm in Arm:
        subset = [r for r in rows if r.arm is arm]
        if subset:
            overall[arm.value] = _arm_stats(subset)

    without_rows = [r for r in rows if r.arm is Arm.WITHOUT]
    with_rows = [r for r in rows if r.arm is Arm.WITH]
    comparisons = _criteria_comparisons(without_rows, with_rows)

    carryover = {}
    for label, (p_a, p_b) in {"passage_1_vs_2": (1, 2), "passage_3_vs_4": (3, 4)}.items():
        rows_a = [r for r in rows if r.passage == p_a]
        rows_b = [r for r in rows if r.passage == p_b]
        carryover[label] = _criteria_comparisons(rows_a, rows_b)

    return TrialSummary(
        per_case=per_case, overall=overall, comparisons=comparisons, carryover=carryover
    )


def summarize_trial(
    records: list[TrialRecord], golds: dict[str, GoldStandardCase]
) -> TrialSummary:
    return summarize_rows(score_records(records, golds))
