"""Rule evaluation over a patient record.

Atomic predicates over missing data evaluate false, never error: a lab
predicate without a result, a crcl predicate without a derivable clearance
and a duration qualifier on a line without a recorded duration are all
false. NOT therefore turns missing data into true, which is what START
omission rules rely on.
"""

from __future__ import annotations

from dataclasses import dataclass

from ..drugdb import DrugKB
from ..patient import PatientContext, PatientRecord, derive_context
from ..terminology import atc_matches, icd10_matches
from .model import (
    AgePredicate,
    And,
    AtomicPredicate,
    ConditionPredicate,
    CrclPredicate,
    DrugPredicate,
    IndicationPredicate,
    InterventionTemplate,
    LabPredicate,
    Not,
    Or,
    PredicateTree,
    Rule,
    RuleKind,
    RuleSet,
)
from .parser import render_atom


@dataclass(frozen=True)
class Binding:
    """One matched item behind a true atomic predicate."""

    predicate: str  # rendered atom, e.g. "drug(C03C)"
    kind: str  # drug | condition | lab | age | crcl | indication
    matched: str  # display form of the matched item
    atc: str | None = None  # set for drug/indication bindings


@dataclass(frozen=True)
class DetectedProblem:
    rule_id: str
    kind: RuleKind
    problem_text: str
    trigger_bindings: tuple[Binding, ...]
    suggestion: InterventionTemplate
    severity_hint: int

    def signature(self) -> tuple[str, tuple[str, ...]]:
        """Identity of this problem across re-analyses: rule id plus the
        sorted ATC codes it bound."""
        codes = sorted({b.atc for b in self.trigger_bindings if b.atc is not None})
        return (self.rule_id, tuple(codes))


def evaluate_predicate(
    pred: AtomicPredicate, record: PatientRecord, context: PatientContext
) -> tuple[bool, list[Binding]]:
    """Evaluate one atomic predicate; bindings list every matched item."""
    rendered = render_atom(pred)

    if isinstance(pred, DrugPredicate):
        bindings = []
        for line in record.medications:
            if not atc_matches(line.atc, pred.prefix):
                continue
            if pred.dose is not None:
                q = pred.dose
                if line.daily_dose.unit != q.dose.unit:
                    continue
                if not q.op.apply(line.daily_dose.value, q.dose.value):
                    continue
            if pred.duration is not None:
                q = pred.duration
                if line.duration_days is None or not q.op.apply(line.duration_days, q.days):
                    continue
            bindings.append(
                Binding(rendered, "drug", f"{line.atc} {line.daily_dose}", atc=line.atc.code)
            )
        return bool(bindings), bindings

    if isinstance(pred, ConditionPredicate):
        bindings = [
            Binding(rendered, "condition", cond.code)
            for cond in record.conditions
            if any(icd10_matches(cond, p) for p in pred.prefixes)
        ]
        return bool(bindings), bindings

    if isinstance(pred, LabPredicate):
        lab = record.current_lab(pred.loinc)
        if lab is None or not pred.op.apply(lab.value, pred.value):
            return False, []
        return True, [Binding(rendered, "lab", f"{lab.loinc} = {lab.value} {lab.unit}")]

    if isinstance(pred, AgePredicate):
        if not pred.op.apply(context.age, pred.years):
            return False, []
        return True, [Binding(rendered, "age", f"age {context.age}")]

    if isinstance(pred, CrclPredicate):
        crcl = context.creatinine_clearance
        if crcl is None or not pred.op.apply(crcl, pred.value):
            return False, []
        return True, [Binding(rendered, "crcl", f"CrCl {crcl:.1f} mL/min")]

    if isinstance(pred, IndicationPredicate):
        bindings = [
            Binding(rendered, "indication", f"{line.atc} for {line.indication}", atc=line.atc.code)
            for line in record.medications
            if atc_matches(line.atc, pred.atc_prefix)
            and line.indication is not None
            and icd10_matches(line.indication, pred.icd10_prefix)
        ]
        return bool(bindings), bindings

    raise TypeError(f"not an atomic predicate: {pred!r}")


def evaluate_tree(
    tree: PredicateTree, record: PatientRecord, context: PatientContext
) -> tuple[bool, list[Binding]]:
    if isinstance(tree, And):
        bindings: list[Binding] = []
        for child in tree.children:
            ok, got = evaluate_tree(child, record, context)
            if not ok:
                return False, []
            bindings.extend(got)
        return True, bindings
    if isinstance(tree, Or):
        bindings = []
        any_true = False
        for child in tree.children:
            ok, got = evaluate_tree(child, record, context)
            if ok:
                any_true = True
                bindings.extend(got)
        return any_true, bindings if any_true else []
    if isinstance(tree, Not):
        ok, _ = evaluate_tree(tree.child, record, context)
        # a satisfied negation binds nothing: there is no matched item
        return (not ok), []
    return evaluate_predicate(tree, record, context)


def evaluate_rule(rule: Rule, record: PatientRecord, context: PatientContext) -> DetectedProblem | None:
    ok, bindings = evaluate_tree(rule.when, record, context)
    if not ok:
        return None
    return DetectedProblem(
        rule_id=rule.id,
        kind=rule.kind,
        problem_text=rule.problem_text,
        trigger_bindings=tuple(bindings),
        suggestion=rule.suggestion,
        severity_hint=rule.severity_hint,
    )


def evaluate_rules(
    rules: RuleSet, record: PatientRecord, kb: DrugKB | None = None
) -> list[DetectedProblem]:
    """One DetectedProblem per firing rule, STOPP problems first, then by
    rule id. A rule fires at most once per patient; bindings list every
    match.

    The kb parameter is part of the call contract but unused: predicate
    semantics are defined entirely over the record and derived context.
    """
    del kb
    context = derive_context(record)
    problems = []
    for rule in rules:
        detected = evaluate_rule(rule, record, context)
        if detected is not None:
            problems.append(detected)
    problems.sort(key=lambda p: (0 if p.kind is RuleKind.STOPP else 1, p.rule_id))
    return problems
