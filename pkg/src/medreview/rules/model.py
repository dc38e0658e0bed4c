"""AST for the screening-rule language.

A rule is a boolean predicate tree (NOT > AND > OR, parentheses allowed)
over six atomic predicate kinds: drug, condition, lab, age, crcl and
indication. All nodes are immutable; structural equality is dataclass
equality, which is what the parse/render round-trip tests rely on.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

from ..terminology import AtcCode, Icd10Code, LoincCode
from ..units import Dose


class Comparator(enum.Enum):
    LT = "<"
    LE = "<="
    GT = ">"
    GE = ">="
    EQ = "="

    def apply(self, left: float, right: float) -> bool:
        if self is Comparator.LT:
            return left < right
        if self is Comparator.LE:
            return left <= right
        if self is Comparator.GT:
            return left > right
        if self is Comparator.GE:
            return left >= right
        return left == right


@dataclass(frozen=True)
class DoseQualifier:
    op: Comparator  # GE or LE only
    dose: Dose


@dataclass(frozen=True)
class DurationQualifier:
    op: Comparator  # GE or LE only
    days: int


@dataclass(frozen=True)
class DrugPredicate:
    """Some medication line matches the ATC prefix and all qualifiers hold
    against that same line."""

    prefix: AtcCode
    dose: DoseQualifier | None = None
    duration: DurationQualifier | None = None


@dataclass(frozen=True)
class ConditionPredicate:
    """Any patient condition matches any of the listed ICD-10 prefixes."""

    prefixes: tuple[Icd10Code, ...]


@dataclass(frozen=True)
class LabPredicate:
    """The current (most recent) result for the LOINC code compares true.
    No result means false."""

    loinc: LoincCode
    op: Comparator
    value: float


@dataclass(frozen=True)
class AgePredicate:
    op: Comparator
    years: float


@dataclass(frozen=True)
class CrclPredicate:
    """Compares derived creatinine clearance; absent clearance means false."""

    op: Comparator
    value: float


@dataclass(frozen=True)
class IndicationPredicate:
    """Some medication matches the ATC prefix and that line's indication
    field matches the ICD-10 prefix."""

    atc_prefix: AtcCode
    icd10_prefix: Icd10Code


AtomicPredicate = (
    DrugPredicate
    | ConditionPredicate
    | LabPredicate
    | AgePredicate
    | CrclPredicate
    | IndicationPredicate
)


@dataclass(frozen=True)
class And:
    children: tuple["PredicateTree", ...]


@dataclass(frozen=True)
class Or:
    children: tuple["PredicateTree", ...]


@dataclass(frozen=True)
class Not:
    child: "PredicateTree"


PredicateTree = And | Or | Not | AtomicPredicate


class InterventionAction(enum.Enum):
    DEPRESCRIBE = "deprescribe"
    PRESCRIBE = "prescribe"
    REPLACE = "replace"
    CHANGE_DOSE = "change_dose"
    LAB_TEST = "lab_test"


class DoseDirection(enum.Enum):
    INCREASE = "increase"
    DECREASE = "decrease"


class InvalidTemplate(ValueError):
    pass


@dataclass(frozen=True)
class InterventionTemplate:
    action: InterventionAction
    target_atc: AtcCode | None = None
    replacement_atc: AtcCode | None = None
    dose_direction: DoseDirection | None = None
    lab_loinc: LoincCode | None = None

    def __post_init__(self):
        a = self.action
        if a in (
            InterventionAction.DEPRESCRIBE,
            InterventionAction.REPLACE,
            InterventionAction.CHANGE_DOSE,
            InterventionAction.PRESCRIBE,
        ):
            if self.target_atc is None:
                raise InvalidTemplate(f"{a.value} needs target_atc")
        if a is InterventionAction.REPLACE and self.replacement_atc is None:
            raise InvalidTemplate("replace needs replacement_atc")
        if a is InterventionAction.CHANGE_DOSE and self.dose_direction is None:
            raise InvalidTemplate("change_dose needs dose_direction")
        if a is InterventionAction.LAB_TEST and self.lab_loinc is None:
            raise InvalidTemplate("lab_test needs lab_loinc")


class RuleKind(enum.Enum):
    STOPP = "STOPP"
    START = "START"


@dataclass(frozen=True)
class Rule:
    id: str
    kind: RuleKind
    when: PredicateTree
    problem_text: str
    suggestion: InterventionTemplate
    severity_hint: int  # 1..4, UI sorting metadata only


@dataclass(frozen=True)
class RuleSet:
    rules: tuple[Rule, ...]

    def __post_init__(self):
        object.__setattr__(self, "_by_id", {r.id: r for r in self.rules})

    def __len__(self) -> int:
        return len(self.rules)

    def __iter__(self):
        return iter(self.rules)

    def get(self, rule_id: str) -> Rule | None:
        return self._by_id.get(rule_id)


def atoms_of(tree: PredicateTree) -> list[AtomicPredicate]:
    """All atomic predicates in the tree, left-to-right."""
    if isinstance(tree, (And, Or)):
        out: list[AtomicPredicate] = []
        for child in tree.children:
            out.extend(atoms_of(child))
        return out
    if isinstance(tree, Not):
        return atoms_of(tree.child)
    return [tree]


def positive_drug_atoms(tree: PredicateTree, negated: bool = False) -> list[DrugPredicate]:
    """Drug predicates not under a NOT (the ones a STOPP target can bind to)."""
    if isinstance(tree, (And, Or)):
        out: list[DrugPredicate] = []
        for child in tree.children:
            out.extend(positive_drug_atoms(child, negated))
        return out
    if isinstance(tree, Not):
        return positive_drug_atoms(tree.child, not negated)
    if isinstance(tree, DrugPredicate) and not negated:
        return [tree]
    return []
