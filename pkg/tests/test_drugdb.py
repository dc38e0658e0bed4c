import json

import pytest

from medreview.drugdb import (
    Applicability,
    DosageRule,
    DrugNotInKb,
    Interaction,
    KbLoadError,
    applicable_dosage_rules,
    interactions_for,
    load_knowledge_base,
    serialize_knowledge_base,
)
from medreview.patient import PatientContext, Sex
from medreview.terminology import AtcCode


def kb_doc(drugs=None, interactions=None, version="t1"):
    return json.dumps(
        {"version": version, "drugs": drugs or [], "interactions": interactions or []}
    )


def context(**overrides) -> PatientContext:
    base = dict(
        age=80,
        sex=Sex.MALE,
        creatinine_clearance=None,
        hepatic_impairment=False,
        conditions=(),
        co_prescribed=frozenset(),
    )
    base.update(overrides)
    return PatientContext(**base)


MONO = {"atc": "N02BE01", "name": "paracetamol"}


class TestLoad:
    def test_counts_preserved(self):
        kb = load_knowledge_base(
            kb_doc(
                drugs=[MONO, {"atc": "C03CA01", "name": "furosemide"}],
                interactions=[
                    {"atc_a": "C03", "atc_b": "N02", "severity_level": 1, "mechanism": "x"}
                ],
            )
        )
        assert len(kb.drugs) == 2
        assert len(kb.interactions) == 1

    def test_duplicate_atc_rejected(self):
        with pytest.raises(KbLoadError) as err:
            load_knowledge_base(kb_doc(drugs=[MONO, dict(MONO)]))
        assert any(f.code == "DuplicateAtc" for f in err.value.findings)

    def test_frequency_out_of_range(self):
        bad = dict(MONO, adverse_effects=[{"effect": "nausea", "frequency": 1.3, "severity": 1}])
        with pytest.raises(KbLoadError) as err:
            load_knowledge_base(kb_doc(drugs=[bad]))
        assert any(f.code == "InvalidRange" for f in err.value.findings)

    def test_invalid_code_located(self):
        with pytest.raises(KbLoadError) as err:
            load_knowledge_base(kb_doc(drugs=[{"atc": "NOPE", "name": "x"}]))
        finding = err.value.findings[0]
        assert finding.code == "InvalidCode"
        assert finding.location == "drugs[0].atc"

    def test_all_or_nothing_collects_every_error(self):
        with pytest.raises(KbLoadError) as err:
            load_knowledge_base(
                kb_doc(
                    drugs=[{"atc": "NOPE", "name": "x"}, dict(MONO, name="")],
                    interactions=[{"atc_a": "C03", "atc_b": "N02", "severity_level": 9, "mechanism": ""}],
                )
            )
        assert len(err.value.findings) == 3

    def test_min_above_max_rejected(self):
        bad = dict(
            MONO,
            dosage_rules=[
                {
                    "min_daily_dose": {"value": 4, "unit": "g/day"},
                    "max_daily_dose": {"value": 2, "unit": "g/day"},
                }
            ],
        )
        with pytest.raises(KbLoadError):
            load_knowledge_base(kb_doc(drugs=[bad]))

    def test_not_json(self):
        with pytest.raises(KbLoadError):
            load_knowledge_base(b"{nope")


def test_round_trip(kb):
    assert load_knowledge_base(serialize_knowledge_base(kb)) == kb


class TestInteractionsFor:
    KB = load_knowledge_base(
        kb_doc(
            drugs=[
                {"atc": "C03CA01", "name": "a"},
                {"atc": "C09AA02", "name": "b"},
                {"atc": "B01AA03", "name": "c"},
                {"atc": "B01AC06", "name": "d"},
                {"atc": "M01AE01", "name": "e"},
            ],
            interactions=[
                {"atc_a": "C03", "atc_b": "C09", "severity_level": 2, "mechanism": "m1"},
                {"atc_a": "B01AA", "atc_b": "M01AE", "severity_level": 3, "mechanism": "m2"},
                {"atc_a": "B01AC", "atc_b": "M01AE", "severity_level": 2, "mechanism": "m3"},
            ],
        )
    )

    def test_class_prefix_resolution(self):
        found = interactions_for(self.KB, {AtcCode("C03CA01"), AtcCode("C09AA02")})
        assert [(r.drug_a.code, r.drug_b.code, r.severity_level) for r in found] == [
            ("C03CA01", "C09AA02", 2)
        ]

    def test_needs_two_distinct_drugs(self):
        assert interactions_for(self.KB, {AtcCode("C03CA01")}) == []

    def test_hand_enumerated_pairs(self):
        found = interactions_for(
            self.KB, {AtcCode("B01AA03"), AtcCode("B01AC06"), AtcCode("M01AE01")}
        )
        pairs = {(r.drug_a.code, r.drug_b.code, r.severity_level) for r in found}
        assert pairs == {("B01AA03", "M01AE01", 3), ("B01AC06", "M01AE01", 2)}

    def test_self_pair_excluded(self):
        kb = load_knowledge_base(
            kb_doc(
                drugs=[{"atc": "C03CA01", "name": "a"}],
                interactions=[
                    {"atc_a": "C03", "atc_b": "C03CA", "severity_level": 1, "mechanism": "self"}
                ],
            )
        )
        assert interactions_for(kb, {AtcCode("C03CA01")}) == []

    def test_symmetry_under_pair_swap(self):
        swapped = load_knowledge_base(
            kb_doc(
                drugs=[{"atc": "C03CA01", "name": "a"}, {"atc": "C09AA02", "name": "b"}],
                interactions=[
                    {"atc_a": "C09", "atc_b": "C03", "severity_level": 2, "mechanism": "m1"}
                ],
            )
        )
        prescribed = {AtcCode("C03CA01"), AtcCode("C09AA02")}
        original = interactions_for(self.KB, prescribed)
        mirrored = interactions_for(swapped, prescribed)
        assert [(r.drug_a, r.drug_b, r.severity_level) for r in original] == [
            (r.drug_a, r.drug_b, r.severity_level) for r in mirrored
        ]

    def test_monotone_in_prescribed_set(self):
        small = interactions_for(self.KB, {AtcCode("B01AA03"), AtcCode("M01AE01")})
        big = interactions_for(
            self.KB, {AtcCode("B01AA03"), AtcCode("M01AE01"), AtcCode("B01AC06"), AtcCode("C03CA01")}
        )
        small_keys = {(r.drug_a.code, r.drug_b.code) for r in small}
        big_keys = {(r.drug_a.code, r.drug_b.code) for r in big}
        assert small_keys <= big_keys


class TestDosageRules:
    KB = load_knowledge_base(
        kb_doc(
            drugs=[
                {
                    "atc": "C03CA01",
                    "name": "furosemide",
                    "dosage_rules": [
                        {"max_daily_dose": {"value": 80, "unit": "mg/day"}},
                        {
                            "applicability": {"max_crcl": 30},
                            "max_daily_dose": {"value": 40, "unit": "mg/day"},
                        },
                    ],
                }
            ]
        )
    )

    def test_unconditional_rule_always_applies(self):
        rules = applicable_dosage_rules(self.KB, AtcCode("C03CA01"), context())
        assert len(rules) == 1
        assert rules[0].specificity_rank == 0

    def test_specific_rule_first_when_predicate_holds(self):
        rules = applicable_dosage_rules(
            self.KB, AtcCode("C03CA01"), context(creatinine_clearance=25.0)
        )
        assert [r.max_daily_dose.value for r in rules] == [40, 80]
        assert rules[0].specificity_rank == 1

    def test_predicate_fails_above_threshold(self):
        rules = applicable_dosage_rules(
            self.KB, AtcCode("C03CA01"), context(creatinine_clearance=58.3)
        )
        assert [r.max_daily_dose.value for r in rules] == [80]

    def test_unknown_drug_raises(self):
        with pytest.raises(DrugNotInKb):
            applicable_dosage_rules(self.KB, AtcCode("A02BC01"), context())

    def test_returned_rules_reevaluate_true(self, kb):
        ctx = context(creatinine_clearance=25.0, co_prescribed=frozenset({AtcCode("C01BD01")}))
        for mono in kb.drugs:
            for rule in applicable_dosage_rules(kb, mono.atc, ctx):
                assert rule.applicability.holds(ctx)


class TestApplicability:
    def test_rank_counts_only_present_predicates(self):
        assert Applicability().rank() == 0
        assert Applicability(min_age=65, hepatic_impairment=True).rank() == 2

    def test_bounds_inclusive_min_exclusive_max(self):
        app = Applicability(min_age=65, max_age=80)
        assert app.holds(context(age=65))
        assert app.holds(context(age=79))
        assert not app.holds(context(age=80))
        assert not app.holds(context(age=64))

    def test_crcl_absent_fails_predicate(self):
        assert not Applicability(max_crcl=30).holds(context())

    def test_co_prescribed_prefix(self):
        app = Applicability(co_prescribed=AtcCode("C01BD"))
        assert app.holds(context(co_prescribed=frozenset({AtcCode("C01BD01")})))
        assert not app.holds(context(co_prescribed=frozenset({AtcCode("C03CA01")})))
