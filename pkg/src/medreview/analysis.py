"""Patient-level analysis: dosage assessment, aggregated adverse-effect
profile, interaction graph and detected problems, bundled in one report.

Everything here is a pure function of (patient, KB, rules). Canonical
ordering is applied throughout (problems by kind then rule id, dosages by
ATC, effect categories lexicographic, edges by canonical pair) so a
serialized report is byte-stable across runs.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

from .drugdb import DosageRule, DrugKB, DrugNotInKb, ResolvedInteraction, applicable_dosage_rules, interactions_for
from .patient import PatientRecord, derive_context
from .rules import DetectedProblem, RuleSet, evaluate_rules
from .terminology import AtcCode


class DosageStatus(enum.Enum):
    UNDER = "under"
    WITHIN = "within"
    OVER = "over"
    NO_RULE = "no_rule"
    UNIT_MISMATCH = "unit_mismatch"


@dataclass(frozen=True)
class DosageAssessment:
    atc: AtcCode
    drug_name: str | None
    current_daily_dose: str
    recommended_min: str | None
    recommended_max: str | None
    status: DosageStatus


@dataclass(frozen=True)
class EffectContribution:
    atc: AtcCode
    frequency: float
    severity: int


@dataclass(frozen=True)
class CategoryProfile:
    category: str
    combined_probability: float
    max_severity: int
    contributors: tuple[EffectContribution, ...]


@dataclass(frozen=True)
class EffectProfile:
    categories: tuple[CategoryProfile, ...]  # lexicographic by category

    def get(self, category: str) -> CategoryProfile | None:
        return next((c for c in self.categories if c.category == category), None)


@dataclass(frozen=True)
class GraphNode:
    atc: AtcCode
    name: str | None


@dataclass(frozen=True)
class InteractionGraph:
    nodes: tuple[GraphNode, ...]
    edges: tuple[ResolvedInteraction, ...]


@dataclass(frozen=True)
class AnalysisReport:
    kb_version: str
    patient_id: str
    problems: tuple[DetectedProblem, ...]
    dosages: tuple[DosageAssessment, ...]
    effects: EffectProfile
    interactions: InteractionGraph


def assess_dosages(record: PatientRecord, kb: DrugKB) -> list[DosageAssessment]:
    """One assessment per medication line; the most specific applicable
    dosage rule decides the recommended range."""
    context = derive_context(record)
    out = []
    for line in sorted(record.medications, key=lambda m: m.atc.code):
        mono = kb.monograph(line.atc)
        name = mono.name if mono else None
        try:
            rules = applicable_dosage_rules(kb, line.atc, context)
        except DrugNotInKb:
            rules = []
        if not rules:
            out.append(
                DosageAssessment(line.atc, name, str(line.daily_dose), None, None, DosageStatus.NO_RULE)
            )
            continue
        rule = rules[0]
        out.append(
            DosageAssessment(
                atc=line.atc,
                drug_name=name,
                current_daily_dose=str(line.daily_dose),
                recommended_min=str(rule.min_daily_dose) if rule.min_daily_dose else None,
                recommended_max=str(rule.max_daily_dose) if rule.max_daily_dose else None,
                status=_dose_status(line.daily_dose.value, line.daily_dose.unit, rule),
            )
        )
    return out


def _dose_status(value: float, unit, rule: DosageRule) -> DosageStatus:
    bound = rule.min_daily_dose or rule.max_daily_dose
    if bound.unit != unit:
        return DosageStatus.UNIT_MISMATCH
    if rule.min_daily_dose is not None and value < rule.min_daily_dose.value:
        return DosageStatus.UNDER
    if rule.max_daily_dose is not None and value > rule.max_daily_dose.value:
        return DosageStatus.OVER
    return DosageStatus.WITHIN


def aggregate_effects(record: PatientRecord, kb: DrugKB) -> EffectProfile:
    """Adverse-effect profile over the whole drug order.

    Per category, the combined probability under independence is
    1 - prod(1 - f_i) over contributing drugs; severity aggregates by max.
    """
    by_category: dict[str, list[EffectContribution]] = {}
    for line in record.medications:
        mono = kb.monograph(line.atc)
        if mono is None:
            continue
        for eff in mono.adverse_effects:
            by_category.setdefault(eff.effect_category, []).append(
                EffectContribution(line.atc, eff.frequency, eff.severity)
            )
    categories = []
    for category in sorted(by_category):
        contributors = sorted(by_category[category], key=lambda c: c.atc.code)
        survival = 1.0
        for c in contributors:
            survival *= 1.0 - c.frequency
        categories.append(
            CategoryProfile(
                category=category,
                combined_probability=1.0 - survival,
                max_severity=max(c.severity for c in contributors),
                contributors=tuple(contributors),
            )
        )
    return EffectProfile(tuple(categories))


def build_interaction_graph(record: PatientRecord, kb: DrugKB) -> InteractionGraph:
    """Nodes for every medication (interaction-free ones included); edges
    from resolving KB interactions against the prescribed set."""
    nodes = []
    for line in sorted(record.medications, key=lambda m: m.atc.code):
        mono = kb.monograph(line.atc)
        nodes.append(GraphNode(line.atc, mono.name if mono else None))
    prescribed = {line.atc for line in record.medications}
    edges = tuple(interactions_for(kb, prescribed))
    return InteractionGraph(tuple(nodes), edges)


def analyze(record: PatientRecord, kb: DrugKB, rules: RuleSet) -> AnalysisReport:
    """Bundle the four decision-support views for one patient."""
    return AnalysisReport(
        kb_version=kb.version,
        patient_id=record.id,
        problems=tuple(evaluate_rules(rules, record, kb)),
        dosages=tuple(assess_dosages(record, kb)),
        effects=aggregate_effects(record, kb),
        interactions=build_interaction_graph(record, kb),
    )
