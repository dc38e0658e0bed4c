import random
from collections import Counter

import pytest

from medreview.review import Intervention
from medreview.rules import DoseDirection, InterventionAction, InterventionTemplate
from medreview.terminology import AtcCode, LoincCode
from medreview.trial import (
    Arm,
    Group,
    GoldProblem,
    GoldStandardCase,
    PharmacistProfile,
    ReviewSubmission,
    ScoredIntervention,
    TrialRecord,
    UnknownGroup,
    ZeroGoldTotal,
    assign_group,
    assign_groups,
    case_order,
    check_reference_metrics,
    cleo_ratio,
    match_interventions,
    problems_identified_pct,
    score_records,
    summarize_rows,
    summarize_trial,
    validate_trial_record,
)
from medreview.units import Dose


def deprescribe(atc):
    return Intervention(InterventionAction.DEPRESCRIBE, target_atc=AtcCode(atc))


def change_dose(atc, value=1.0, unit="mg/day"):
    return Intervention(
        InterventionAction.CHANGE_DOSE, target_atc=AtcCode(atc), new_daily_dose=Dose(value, unit)
    )


def prescribe(atc, value=1.0, unit="mg/day"):
    return Intervention(
        InterventionAction.PRESCRIBE, target_atc=AtcCode(atc), new_daily_dose=Dose(value, unit)
    )


class TestCaseOrder:
    EXPECTED = {
        "G1": [("A", "without"), ("B", "without"), ("C", "with"), ("D", "with")],
        "G2": [("C", "without"), ("D", "without"), ("A", "with"), ("B", "with")],
        "G3": [("B", "without"), ("A", "without"), ("D", "with"), ("C", "with")],
        "G4": [("D", "without"), ("C", "without"), ("B", "with"), ("A", "with")],
    }

    def test_cell_for_cell(self):
        for group, expected in self.EXPECTED.items():
            got = [(case_id, arm.value) for case_id, arm in case_order(group)]
            assert got == expected

    def test_g2_first_passage(self):
        assert case_order(Group.G2)[0] == ("C", Arm.WITHOUT)

    def test_g4_last_passage(self):
        assert case_order(Group.G4)[3] == ("A", Arm.WITH)

    def test_controls_before_tests_in_every_group(self):
        for group in Group:
            arms = [arm for _, arm in case_order(group)]
            assert arms == [Arm.WITHOUT, Arm.WITHOUT, Arm.WITH, Arm.WITH]

    def test_latin_square_property(self):
        for position in range(4):
            cases = {case_order(g)[position][0] for g in Group}
            assert cases == {"A", "B", "C", "D"}
        for group in Group:
            assert {c for c, _ in case_order(group)} == {"A", "B", "C", "D"}

    def test_unknown_group(self):
        with pytest.raises(UnknownGroup):
            case_order("G5")


class TestAssignment:
    def test_round_robin(self):
        assert [assign_group(i).value for i in range(5)] == ["G1", "G2", "G3", "G4", "G1"]

    def test_39_pharmacists_balanced(self):
        groups = assign_groups([f"ph{i}" for i in range(39)], seed=42)
        sizes = sorted(Counter(g.value for g in groups.values()).values())
        assert sizes == [9, 10, 10, 10]

    def test_deterministic_given_seed(self):
        ids = [f"ph{i}" for i in range(17)]
        assert assign_groups(ids, seed=7) == assign_groups(ids, seed=7)
        assert assign_groups(ids, seed=7) != assign_groups(ids, seed=8)

    def test_four_pharmacists_one_per_group(self):
        groups = assign_groups(["a", "b", "c", "d"], seed=1)
        assert sorted(g.value for g in groups.values()) == ["G1", "G2", "G3", "G4"]


def template(action, target=None, replacement=None, direction=None, loinc=None):
    return InterventionTemplate(
        InterventionAction(action),
        target_atc=AtcCode(target) if target else None,
        replacement_atc=AtcCode(replacement) if replacement else None,
        dose_direction=DoseDirection(direction) if direction else None,
        lab_loinc=LoincCode(loinc) if loinc else None,
    )


def make_gold():
    from medreview.patient import PatientRecord, Sex

    problems = (
        GoldProblem(
            problem_id="P1",
            description="loop diuretic",
            optimal=ScoredIntervention(template("deprescribe", "C03CA"), 3),
            alternatives=(ScoredIntervention(template("change_dose", "C03CA", direction="decrease"), 1),),
        ),
        GoldProblem(
            problem_id="P2",
            description="needs anticoagulant",
            optimal=ScoredIntervention(template("prescribe", "B01AA"), 2),
            harmful=(template("prescribe", "B01AC"),),
        ),
    )
    patient = PatientRecord(id="gx", age=80, sex=Sex.MALE)
    return GoldStandardCase(case_id="X", patient=patient, problems=problems)


class TestMatching:
    def test_optimal_prefix_match(self):
        gold = make_gold()
        result = match_interventions([deprescribe("C03CA01")], gold)
        assert result.identified_problem_ids == ("P1",)
        assert result.total_awarded == 3
        assert result.outcomes[0].tier == "optimal"

    def test_alternative_tier(self):
        gold = make_gold()
        result = match_interventions([change_dose("C03CA01")], gold)
        assert result.identified_problem_ids == ("P1",)
        assert result.total_awarded == 1
        assert result.outcomes[0].tier == "alternative"

    def test_harmful_tier_not_identified(self):
        gold = make_gold()
        result = match_interventions([prescribe("B01AC06")], gold)
        assert result.identified_problem_ids == ()
        assert result.total_awarded == -1
        assert result.outcomes[0].tier == "harmful"
        assert not result.outcomes[0].manual_review

    def test_unmatched_flags_manual_review(self):
        gold = make_gold()
        result = match_interventions([deprescribe("A02BC01")], gold)
        assert result.total_awarded == 0
        assert result.outcomes[0].tier == "unmatched"
        assert result.outcomes[0].manual_review

    def test_problem_consumed_once(self):
        gold = make_gold()
        result = match_interventions([deprescribe("C03CA01"), deprescribe("C03CA02")], gold)
        assert result.identified_problem_ids == ("P1",)
        assert result.outcomes[1].tier == "unmatched"

    def test_harmful_does_not_consume(self):
        gold = make_gold()
        result = match_interventions(
            [prescribe("B01AC06"), prescribe("B01AA03")], gold
        )
        assert result.identified_problem_ids == ("P2",)
        assert result.total_awarded == -1 + 2

    def test_replace_requires_compatible_replacement(self):
        problems = (
            GoldProblem(
                problem_id="P1",
                description="swap antihistamine",
                optimal=ScoredIntervention(template("replace", "R06AB", replacement="R06AX"), 2),
            ),
        )
        gold = GoldStandardCase("Y", make_gold().patient, problems)
        good = Intervention(
            InterventionAction.REPLACE,
            target_atc=AtcCode("R06AB02"),
            new_atc=AtcCode("R06AX13"),
            new_daily_dose=Dose(10, "mg/day"),
        )
        bad = Intervention(
            InterventionAction.REPLACE,
            target_atc=AtcCode("R06AB02"),
            new_atc=AtcCode("N05BA01"),
            new_daily_dose=Dose(5, "mg/day"),
        )
        assert match_interventions([good], gold).identified_problem_ids == ("P1",)
        assert match_interventions([bad], gold).identified_problem_ids == ()

    def test_lab_test_matches_on_loinc(self):
        problems = (
            GoldProblem(
                problem_id="P1",
                description="check renal function",
                optimal=ScoredIntervention(template("lab_test", loinc="2160-0"), 1),
            ),
        )
        gold = GoldStandardCase("Z", make_gold().patient, problems)
        right = Intervention(InterventionAction.LAB_TEST, lab_loinc=LoincCode("2160-0"))
        wrong = Intervention(InterventionAction.LAB_TEST, lab_loinc=LoincCode("2823-3"))
        assert match_interventions([right], gold).total_awarded == 1
        assert match_interventions([wrong], gold).total_awarded == 0


class TestCriteria:
    def test_pct_bounds(self):
        gold = make_gold()
        empty = match_interventions([], gold)
        assert problems_identified_pct(empty, gold) == 0.0
        full = match_interventions([deprescribe("C03CA01"), prescribe("B01AA03")], gold)
        assert problems_identified_pct(full, gold) == 1.0

    def test_cleo_ratio_full_marks(self):
        gold = make_gold()
        full = match_interventions([deprescribe("C03CA01"), prescribe("B01AA03")], gold)
        assert cleo_ratio(full, gold) == 1.0

    def test_cleo_ratio_negative_floor(self):
        gold = make_gold()
        harmful = match_interventions([prescribe("B01AC06")], gold)
        assert cleo_ratio(harmful, gold) == pytest.approx(-1 / 5)

    def test_worked_example_case_a(self, gold_cases):
        gold = gold_cases["A"]
        submitted = [
            deprescribe("N05BA01"),           # optimal on the benzodiazepine problem: +2
            change_dose("C03CA01", 20),       # alternative on the diuretic problem: +1
        ]
        result = match_interventions(submitted, gold)
        assert problems_identified_pct(result, gold) == pytest.approx(0.333, abs=0.0005)
        assert cleo_ratio(result, gold) == pytest.approx(0.30, abs=0.0005)

    def test_zero_gold_total(self):
        gold = GoldStandardCase("E", make_gold().patient, ())
        with pytest.raises(ZeroGoldTotal):
            problems_identified_pct(match_interventions([], gold), gold)
        with pytest.raises(ZeroGoldTotal):
            cleo_ratio(match_interventions([], gold), gold)

    def test_random_invariants(self, gold_cases):
        rng = random.Random(21)
        gold = gold_cases["D"]
        pool = [
            deprescribe("A03FA03"), prescribe("B01AA03"), prescribe("B01AC06"),
            change_dose("C10AA01"), deprescribe("C01BD01"), prescribe("A11CC05"),
            Intervention(InterventionAction.LAB_TEST, lab_loinc=LoincCode("2160-0")),
        ]
        for _ in range(100):
            submitted = [rng.choice(pool) for _ in range(rng.randint(0, 6))]
            result = match_interventions(submitted, gold)
            pct = problems_identified_pct(result, gold)
            ratio = cleo_ratio(result, gold)
            assert 0.0 <= pct <= 1.0
            assert ratio <= 1.0
            assert ratio >= -len(submitted) / gold.gold_total
            assert len(set(result.identified_problem_ids)) == len(result.identified_problem_ids)


def test_reference_metrics_hold_for_shipped_cases(gold_cases):
    for case in gold_cases.values():
        assert check_reference_metrics(case) == []


def test_reference_metrics_reports_mismatch(gold_cases):
    case = gold_cases["A"]
    broken = GoldStandardCase("A", case.patient, case.problems[:-1])
    assert check_reference_metrics(broken) != []


def _perfect_submissions(gold_cases):
    """One pharmacist per group; with-arm reviews nail every problem, the
    without-arm submits nothing."""
    optimal_by_case = {
        cid: [
            _intervention_for(p.optimal.template) for p in case.problems
        ]
        for cid, case in gold_cases.items()
    }
    records = []
    rng = random.Random(99)
    for i, group in enumerate(Group):
        for copy in range(2):  # 8 pharmacists, 2 per group
            pid = f"ph-{group.value}-{copy}"
            profile = PharmacistProfile(pid, "40-49", "female", True, 3, group)
            reviews = []
            for passage, (case_id, arm) in enumerate(case_order(group), start=1):
                interventions = tuple(optimal_by_case[case_id]) if arm is Arm.WITH else ()
                reviews.append(
                    ReviewSubmission(
                        pharmacist_id=pid,
                        group=group,
                        passage=passage,
                        case_id=case_id,
                        arm=arm,
                        elapsed_seconds=rng.uniform(600, 2400),
                        interventions=interventions,
                    )
                )
            records.append(TrialRecord(profile=profile, reviews=tuple(reviews)))
    return records


def _intervention_for(template: InterventionTemplate) -> Intervention:
    action = template.action
    if action is InterventionAction.LAB_TEST:
        return Intervention(action, lab_loinc=template.lab_loinc)
    dose = Dose(1, "mg/day")
    if action is InterventionAction.DEPRESCRIBE:
        return Intervention(action, target_atc=template.target_atc)
    if action is InterventionAction.PRESCRIBE:
        return Intervention(action, target_atc=template.target_atc, new_daily_dose=dose)
    if action is InterventionAction.REPLACE:
        return Intervention(
            action,
            target_atc=template.target_atc,
            new_atc=template.replacement_atc,
            new_daily_dose=dose,
        )
    return Intervention(action, target_atc=template.target_atc, new_daily_dose=dose)


class TestSummarize:
    def test_perfect_separation(self, gold_cases):
        records = _perfect_submissions(gold_cases)
        summary = summarize_trial(records, gold_cases)
        assert summary.overall["without"].mean_pct == 0.0
        assert summary.overall["with"].mean_pct == 1.0
        stat = summary.comparisons["pct_identified"]
        assert stat.p is not None and stat.p < 0.001

    def test_single_pharmacist_graceful(self, gold_cases):
        records = _perfect_submissions(gold_cases)[:1]
        summary = summarize_trial(records, gold_cases)
        # constant pct within each arm for a single pharmacist: degenerate, not a crash
        stat = summary.comparisons["pct_identified"]
        assert stat.method in ("degenerate", "welch", "insufficient_data")
        assert summary.overall["with"].n == 2

    def test_validate_trial_record(self, gold_cases):
        record = _perfect_submissions(gold_cases)[0]
        assert validate_trial_record(record) == []
        wrong_case = TrialRecord(
            profile=record.profile,
            reviews=tuple(
                ReviewSubmission(
                    r.pharmacist_id, r.group, r.passage, "A", r.arm, r.elapsed_seconds, r.interventions
                )
                for r in record.reviews
            ),
        )
        assert validate_trial_record(wrong_case) != []

    def test_per_case_table_covers_both_arms(self, gold_cases):
        records = _perfect_submissions(gold_cases)
        summary = summarize_trial(records, gold_cases)
        assert sorted(summary.per_case) == ["A", "B", "C", "D"]
        for arms in summary.per_case.values():
            assert set(arms) == {"without", "with"}

    def test_carryover_slots_present(self, gold_cases):
        summary = summarize_trial(_perfect_submissions(gold_cases), gold_cases)
        assert set(summary.carryover) == {"passage_1_vs_2", "passage_3_vs_4"}
        for stats in summary.carryover.values():
            assert set(stats) == {"pct_identified", "cleo_ratio", "log_time"}

    def test_csv_round_trip_preserves_summary(self, gold_cases):
        from medreview.jsonio import rows_from_csv, rows_to_csv, summary_to_dict

        rows = score_records(_perfect_submissions(gold_cases), gold_cases)
        parsed = rows_from_csv(rows_to_csv(rows))
        original = summary_to_dict(summarize_rows(rows))
        round_tripped = summary_to_dict(summarize_rows(parsed))
        assert _approx_structure(original, round_tripped)


def _approx_structure(a, b, tol=1e-6):
    if isinstance(a, dict):
        return set(a) == set(b) and all(_approx_structure(a[k], b[k], tol) for k in a)
    if isinstance(a, (int, float)) and isinstance(b, (int, float)) and a is not None:
        return abs(a - b) <= tol * max(1.0, abs(a))
    return a == b
