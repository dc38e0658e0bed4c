"""Screening-rule language: AST, parser, renderer and evaluator."""

from .evaluator import (
    Binding,
    DetectedProblem,
    evaluate_predicate,
    evaluate_rule,
    evaluate_rules,
    evaluate_tree,
)
from .model import (
    AgePredicate,
    And,
    AtomicPredicate,
    Comparator,
    ConditionPredicate,
    CrclPredicate,
    DoseDirection,
    DoseQualifier,
    DrugPredicate,
    DurationQualifier,
    IndicationPredicate,
    InterventionAction,
    InterventionTemplate,
    InvalidTemplate,
    LabPredicate,
    Not,
    Or,
    PredicateTree,
    Rule,
    RuleKind,
    RuleSet,
    atoms_of,
    positive_drug_atoms,
)
from .parser import (
    DuplicateRuleId,
    InvalidRuleCode,
    LintWarning,
    RuleParseError,
    RuleSyntaxError,
    lint_rules,
    parse_rules,
    render_atom,
    render_expr,
    render_rule,
    render_rules,
)

__all__ = [
    "AgePredicate",
    "And",
    "AtomicPredicate",
    "Binding",
    "Comparator",
    "ConditionPredicate",
    "CrclPredicate",
    "DetectedProblem",
    "DoseDirection",
    "DoseQualifier",
    "DrugPredicate",
    "DuplicateRuleId",
    "DurationQualifier",
    "IndicationPredicate",
    "InterventionAction",
    "InterventionTemplate",
    "InvalidRuleCode",
    "InvalidTemplate",
    "LabPredicate",
    "LintWarning",
    "Not",
    "Or",
    "PredicateTree",
    "Rule",
    "RuleKind",
    "RuleParseError",
    "RuleSet",
    "RuleSyntaxError",
    "atoms_of",
    "positive_drug_atoms",
    "evaluate_predicate",
    "evaluate_rule",
    "evaluate_rules",
    "evaluate_tree",
    "lint_rules",
    "parse_rules",
    "render_atom",
    "render_expr",
    "render_rule",
    "render_rules",
]
