"""Acceptance suite: one test per release criterion, each printing a
PASS/FAIL line (run with ``pytest tests/test_acceptance.py -v -s``).

Deliberately not reproduced here: human-subject trial outcomes (the
percentages, p-values and usability scores measured on recruited
pharmacists). The criteria below check the computation pipeline and the
engine's behavioral contracts instead.
"""

import json
import random
import time

import pytest
from click.testing import CliRunner

from medreview import data_path
from medreview.analysis import analyze
from medreview.cli import main as cli_main
from medreview.jsonio import (
    canonical_json,
    patient_from_dict,
    intervention_from_dict,
    report_to_dict,
    rows_from_csv,
    rows_to_csv,
    submission_to_dict,
    summary_to_dict,
)
from medreview.review import (
    Intervention,
    add_intervention,
    compare,
    create_session,
)
from medreview.rules import (
    InterventionAction,
    RuleSet,
    atoms_of,
    evaluate_rules,
    parse_rules,
    render_rule,
    render_rules,
)
from medreview.stats import sus_score, welch_t_test
from medreview.terminology import AtcCode
from medreview.trial import (
    Arm,
    Group,
    PharmacistProfile,
    ReviewSubmission,
    TrialRecord,
    case_order,
    cleo_ratio,
    match_interventions,
    problems_identified_pct,
    score_records,
    summarize_rows,
)
from medreview.units import Dose
from oracles import oracle_tree_fires, random_patient, random_rule


def _report(label: str) -> None:
    print(f"PASS {label}")


def test_worked_example_reproduction(gold_cases):
    """Scoring a review that finds 2 of case A's 6 problems with awarded
    scores 1 and 2 gives 33.3% problems identified and a 30.0% score ratio."""
    started = time.perf_counter()
    gold = gold_cases["A"]
    assert len(gold.problems) == 6
    assert gold.gold_total == 10
    submitted = [
        Intervention(InterventionAction.DEPRESCRIBE, target_atc=AtcCode("N05BA01")),  # awarded 2
        Intervention(
            InterventionAction.CHANGE_DOSE,
            target_atc=AtcCode("C03CA01"),
            new_daily_dose=Dose(20, "mg/day"),
        ),  # alternative tier, awarded 1
    ]
    result = match_interventions(submitted, gold)
    assert sorted(o.awarded for o in result.outcomes) == [1, 2]
    assert len(result.identified_problem_ids) == 2
    pct = problems_identified_pct(result, gold)
    ratio = cleo_ratio(result, gold)
    assert round(pct, 3) == 0.333
    assert round(ratio, 3) == 0.300
    elapsed = time.perf_counter() - started
    assert elapsed < 1.0
    _report(f"worked-example reproduction: pct=33.3% ratio=30.0% ({elapsed * 1000:.0f} ms)")


def test_randomization_table_reproduction():
    """The four group orders match the crossover design cell for cell and
    form a Latin square over passage positions."""
    started = time.perf_counter()
    expected = {
        Group.G1: [("A", Arm.WITHOUT), ("B", Arm.WITHOUT), ("C", Arm.WITH), ("D", Arm.WITH)],
        Group.G2: [("C", Arm.WITHOUT), ("D", Arm.WITHOUT), ("A", Arm.WITH), ("B", Arm.WITH)],
        Group.G3: [("B", Arm.WITHOUT), ("A", Arm.WITHOUT), ("D", Arm.WITH), ("C", Arm.WITH)],
        Group.G4: [("D", Arm.WITHOUT), ("C", Arm.WITHOUT), ("B", Arm.WITH), ("A", Arm.WITH)],
    }
    for group, order in expected.items():
        assert case_order(group) == order
    for position in range(4):
        assert {case_order(g)[position][0] for g in Group} == {"A", "B", "C", "D"}
    elapsed = time.perf_counter() - started
    assert elapsed < 1.0
    _report(f"randomization table cell-for-cell + Latin square ({elapsed * 1000:.2f} ms)")


def test_rule_engine_oracle_equivalence():
    """Engine evaluation agrees with a brute-force truth-table interpreter
    on 250 random (rule, patient) pairs at desk scale."""
    started = time.perf_counter()
    rng = random.Random(424242)
    pairs = 0
    for i in range(250):
        rule = random_rule(rng, i)
        assert len(atoms_of(rule.when)) <= 6
        patient = random_patient(rng, i)
        assert len(patient.medications) <= 10
        engine_fired = bool(evaluate_rules(RuleSet((rule,)), patient))
        oracle_fired = oracle_tree_fires(rule.when, patient)
        assert engine_fired == oracle_fired, render_rule(rule)
        pairs += 1
    elapsed = time.perf_counter() - started
    assert pairs >= 200
    assert elapsed < 10.0
    _report(f"oracle equivalence on {pairs} random rule/patient pairs ({elapsed:.2f} s)")


def test_parser_round_trip(ruleset):
    """render-then-parse is structurally idempotent on the shipped corpus
    (every atomic predicate type covered) and on 100 generated rules."""
    started = time.perf_counter()
    assert len(ruleset) >= 12
    atom_types = {type(a).__name__ for r in ruleset for a in atoms_of(r.when)}
    assert len(atom_types) == 6
    assert parse_rules(render_rules(ruleset)) == ruleset
    rng = random.Random(777)
    for i in range(100):
        rule = random_rule(rng, i)
        assert parse_rules(render_rule(rule)).rules == (rule,)
    elapsed = time.perf_counter() - started
    _report(f"parser round-trip: corpus of {len(ruleset)} + 100 generated ({elapsed:.2f} s)")


def test_comparative_mode_soundness(kb, ruleset, comparative_fixtures):
    """On the three authored fixtures the resolving interventions clear all
    baseline problems without creating any; the deliberately harmful
    replacement creates exactly the expected new problem."""
    assert len(comparative_fixtures) == 3
    harmful_checked = False
    for fixture in comparative_fixtures:
        patient = patient_from_dict(fixture["patient"])
        session = create_session(patient)
        for raw in fixture["resolving_interventions"]:
            session = add_intervention(session, intervention_from_dict(raw))
        report = compare(session, kb, ruleset)
        assert {p.rule_id for p in report.before.problems} == set(
            fixture["expected_baseline_rule_ids"]
        )
        assert {p.rule_id for p in report.problems_resolved} == set(
            fixture["expected_baseline_rule_ids"]
        )
        assert report.problems_new == ()
        assert report.problems_persisting == ()
        if "harmful_interventions" in fixture:
            bad_session = create_session(patient)
            for raw in fixture["harmful_interventions"]:
                bad_session = add_intervention(bad_session, intervention_from_dict(raw))
            bad = compare(bad_session, kb, ruleset)
            assert [p.rule_id for p in bad.problems_new] == fixture[
                "expected_new_rule_ids_after_harmful"
            ]
            harmful_checked = True
    assert harmful_checked
    _report("comparative mode: gold interventions resolve all, harmful adds exactly one")


def test_welch_t_test_criterion(welch_oracle_cases):
    """t=0/p=1 on identical samples, antisymmetry under swap, and agreement
    with the frozen independent oracle within 1e-9 on every pair."""
    identical = welch_t_test([3.0, 4.0, 5.0], [3.0, 4.0, 5.0])
    assert identical.t == 0.0 and identical.p == 1.0
    rng = random.Random(5150)
    for _ in range(25):
        a = [rng.gauss(0, 2) for _ in range(rng.randint(3, 15))]
        b = [rng.gauss(1, 1) for _ in range(rng.randint(3, 15))]
        fwd, rev = welch_t_test(a, b), welch_t_test(b, a)
        assert fwd.t == pytest.approx(-rev.t, abs=1e-12)
        assert fwd.p == pytest.approx(rev.p, abs=1e-12)
    random_pairs = [c for c in welch_oracle_cases if len(c["a"]) != 5 or c["a"] != [1, 2, 3, 4, 5]]
    assert len(random_pairs) >= 20
    worst = 0.0
    for case in welch_oracle_cases:
        result = welch_t_test(case["a"], case["b"])
        worst = max(worst, abs(result.p - case["p"]))
        assert abs(result.p - case["p"]) <= 1e-9
    _report(f"welch t-test vs frozen oracle on {len(welch_oracle_cases)} pairs, |dp|max={worst:.2e}")


def test_sus_criterion():
    """Best/worst/midpoint vectors score 100/0/50; monotone under 100
    random single-answer perturbations."""
    assert sus_score([5, 1, 5, 1, 5, 1, 5, 1, 5, 1]) == 100.0
    assert sus_score([1, 5, 1, 5, 1, 5, 1, 5, 1, 5]) == 0.0
    assert sus_score([3] * 10) == 50.0
    rng = random.Random(31337)
    for _ in range(100):
        answers = [rng.randint(1, 5) for _ in range(10)]
        index = rng.randrange(10)
        if answers[index] == 5:
            continue
        bumped = list(answers)
        bumped[index] += 1
        delta = sus_score(bumped) - sus_score(answers)
        assert delta >= 0 if index % 2 == 0 else delta <= 0
    _report("SUS: 100/0/50 exact + monotonicity over 100 perturbations")


def _perfect_separation_records(gold_cases):
    """8 pharmacists (2 per group): with-arm submits every optimal
    intervention, without-arm submits nothing."""

    def realize(template):
        action = template.action
        dose = Dose(1, "mg/day")
        if action is InterventionAction.LAB_TEST:
            return Intervention(action, lab_loinc=template.lab_loinc)
        if action is InterventionAction.REPLACE:
            return Intervention(
                action, target_atc=template.target_atc,
                new_atc=template.replacement_atc, new_daily_dose=dose,
            )
        if action is InterventionAction.DEPRESCRIBE:
            return Intervention(action, target_atc=template.target_atc)
        return Intervention(action, target_atc=template.target_atc, new_daily_dose=dose)

    optimal = {
        cid: [realize(p.optimal.template) for p in case.problems]
        for cid, case in gold_cases.items()
    }
    rng = random.Random(2024)
    records = []
    for group in Group:
        for copy in range(2):
            pid = f"ph-{group.value}-{copy}"
            reviews = tuple(
                ReviewSubmission(
                    pharmacist_id=pid,
                    group=group,
                    passage=passage,
                    case_id=case_id,
                    arm=arm,
                    elapsed_seconds=rng.uniform(480, 2400),
                    interventions=tuple(optimal[case_id]) if arm is Arm.WITH else (),
                )
                for passage, (case_id, arm) in enumerate(case_order(group), start=1)
            )
            records.append(
                TrialRecord(
                    profile=PharmacistProfile(pid, "30-39", "other", True, 2, group),
                    reviews=reviews,
                )
            )
    return records


def test_pipeline_end_to_end(gold_cases, tmp_path):
    """Perfect-separation synthetic trial: 0% vs 100%, p < 0.001, and the
    CSV export reproduces the same summary through `trial summary`."""
    started = time.perf_counter()
    records = _perfect_separation_records(gold_cases)
    assert len(records) == 8
    rows = score_records(records, gold_cases)
    assert len(rows) == 32
    summary = summarize_rows(rows)
    assert summary.overall["without"].mean_pct == 0.0
    assert summary.overall["with"].mean_pct == 1.0
    stat = summary.comparisons["pct_identified"]
    assert stat.p is not None and stat.p < 0.001

    # round-trip: score via CLI-compatible CSV, summarize via the CLI
    csv_path = tmp_path / "rows.csv"
    csv_path.write_text(rows_to_csv(rows), encoding="utf-8")
    assert summarize_rows(rows_from_csv(csv_path.read_text(encoding="utf-8"))) == summary

    runner = CliRunner()
    result = runner.invoke(
        cli_main, ["trial", "summary", "--records", str(csv_path), "--json"]
    )
    assert result.exit_code == 0, result.output
    assert json.loads(result.output) == summary_to_dict(summary)

    # and the submissions themselves survive the score CLI
    subs_path = tmp_path / "subs.json"
    subs_path.write_text(
        json.dumps([submission_to_dict(s) for r in records for s in r.reviews]),
        encoding="utf-8",
    )
    out_csv = tmp_path / "scored.csv"
    score_result = runner.invoke(
        cli_main,
        [
            "trial", "score",
            "--gold", str(data_path("gold_cases.json")),
            "--submissions", str(subs_path),
            "--out", str(out_csv),
        ],
    )
    assert score_result.exit_code == 0, score_result.output
    assert summarize_rows(rows_from_csv(out_csv.read_text(encoding="utf-8"))) == summary

    elapsed = time.perf_counter() - started
    assert elapsed < 5.0
    _report(f"pipeline end-to-end: 0% vs 100%, p={stat.p:.3g} < 0.001 ({elapsed:.2f} s)")


def test_determinism_criterion(kb, ruleset, case_patients):
    """Ten analyses of the fixture triple serialize to identical bytes."""
    blobs = {
        canonical_json(report_to_dict(analyze(case_patients["A"], kb, ruleset)))
        for _ in range(10)
    }
    assert len(blobs) == 1
    _report(f"determinism: 10 runs, 1 distinct serialization ({len(next(iter(blobs)))} bytes)")
