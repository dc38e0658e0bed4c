"""Recursive-descent parser and canonical renderer for the rule language.

Grammar (keywords case-insensitive, ``#`` starts a line comment):

    ruleset   : rule*
    rule      : "rule" ID "kind" kind "when" expr
                "problem" STRING "suggest" action "severity" INT
    kind      : "STOPP" | "START"
    expr      : and_expr ("or" and_expr)*
    and_expr  : not_expr ("and" not_expr)*
    not_expr  : "not" not_expr | "(" expr ")" | atom
    atom      : "drug" "(" ATC ("," qualifier)* ")"
              | "condition" "(" ICD10 ("," ICD10)* ")"
              | "lab" "(" LOINC "," cmp "," NUMBER ")"
              | "age" "(" cmp "," NUMBER ")"
              | "crcl" "(" cmp "," NUMBER ")"
              | "indication" "(" ATC "," ICD10 ")"
    qualifier : "dose" (">="|"<=") NUMBER UNIT
              | "duration" (">="|"<=") NUMBER
    action    : "deprescribe" "(" ATC ")"
              | "prescribe" "(" ATC ")"
              | "replace" "(" ATC "," ATC ")"
              | "change_dose" "(" ATC "," ("increase"|"decrease") ")"
              | "lab_test" "(" LOINC ")"
    cmp       : "<" | "<=" | ">" | ">=" | "="

Codes are validated while parsing. render_rules() emits canonical text that
reparses to a structurally identical RuleSet.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

from ..terminology import AtcCode, Icd10Code, LoincCode, MalformedCode
from ..units import Dose, UnknownUnit, parse_unit
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
    LabPredicate,
    Not,
    Or,
    PredicateTree,
    Rule,
    RuleKind,
    RuleSet,
    positive_drug_atoms,
)


class RuleParseError(ValueError):
    """Base class for everything parse_rules can raise."""


class RuleSyntaxError(RuleParseError):
    def __init__(self, line: int, col: int, expected: str, found: str = ""):
        self.line = line
        self.col = col
        self.expected = expected
        self.found = found
        detail = f", found {found!r}" if found else ""
        super().__init__(f"line {line}, col {col}: expected {expected}{detail}")


class InvalidRuleCode(RuleParseError):
    def __init__(self, line: int, col: int, detail: str):
        self.line = line
        self.col = col
        super().__init__(f"line {line}, col {col}: {detail}")


class DuplicateRuleId(RuleParseError):
    def __init__(self, rule_id: str, line: int):
        self.rule_id = rule_id
        self.line = line
        super().__init__(f"line {line}: duplicate rule id {rule_id!r}")


@dataclass(frozen=True)
class Token:
    kind: str  # WORD | STRING | OP | LPAREN | RPAREN | COMMA | EOF
    text: str
    line: int
    col: int


_WORD = re.compile(r"[A-Za-z0-9_.µ/-]+")
_OPS = ("<=", ">=", "<", ">", "=")

_STOPP_ACTIONS = frozenset(
    {
        InterventionAction.DEPRESCRIBE,
        InterventionAction.REPLACE,
        InterventionAction.CHANGE_DOSE,
        InterventionAction.LAB_TEST,
    }
)
_START_ACTIONS = frozenset({InterventionAction.PRESCRIBE, InterventionAction.LAB_TEST})


def tokenize(source: str) -> list[Token]:
    tokens: list[Token] = []
    line, col = 1, 1
    i = 0
    n = len(source)
    while i < n:
        ch = source[i]
        if ch == "\n":
            i += 1
            line += 1
            col = 1
            continue
        if ch in " \t\r":
            i += 1
            col += 1
            continue
        if ch == "#":
            while i < n and source[i] != "\n":
                i += 1
            continue
        if ch == '"':
            end = source.find('"', i + 1)
            if end == -1 or "\n" in source[i + 1 : end]:
                raise RuleSyntaxError(line, col, "closing quote on the same line")
            text = source[i + 1 : end]
            tokens.append(Token("STRING", text, line, col))
            col += end - i + 1
            i = end + 1
            continue
        if ch == "(":
            tokens.append(Token("LPAREN", ch, line, col))
            i += 1
            col += 1
            continue
        if ch == ")":
            tokens.append(Token("RPAREN", ch, line, col))
            i += 1
            col += 1
            continue
        if ch == ",":
            tokens.append(Token("COMMA", ch, line, col))
            i += 1
            col += 1
            continue
        op = next((o for o in _OPS if source.startswith(o, i)), None)
        if op is not None:
            tokens.append(Token("OP", op, line, col))
            i += len(op)
            col += len(op)
            continue
        m = _WORD.match(source, i)
        if m:
            tokens.append(Token("WORD", m.group(), line, col))
            col += len(m.group())
            i = m.end()
            continue
        raise RuleSyntaxError(line, col, "a token", ch)
    tokens.append(Token("EOF", "", line, col))
    return tokens


class _Parser:
    def __init__(self, tokens: list[Token]):
        self.tokens = tokens
        self.pos = 0

    @property
    def cur(self) -> Token:
        return self.tokens[self.pos]

    def advance(self) -> Token:
        tok = self.cur
        self.pos += 1
        return tok

    def fail(self, expected: str) -> RuleSyntaxError:
        tok = self.cur
        found = tok.text if tok.kind != "EOF" else "end of input"
        return RuleSyntaxError(tok.line, tok.col, expected, found)

    def expect(self, kind: str, expected: str) -> Token:
        if self.cur.kind != kind:
            raise self.fail(expected)
        return self.advance()

    def keyword(self, *words: str) -> str:
        tok = self.cur
        if tok.kind == "WORD" and tok.text.lower() in words:
            self.advance()
            return tok.text.lower()
        raise self.fail(" or ".join(f"'{w}'" for w in words))

    def at_keyword(self, *words: str) -> bool:
        tok = self.cur
        return tok.kind == "WORD" and tok.text.lower() in words

    # --- rules ---------------------------------------------------------

    def parse_ruleset(self) -> RuleSet:
        rules: list[Rule] = []
        seen: dict[str, int] = {}
        while self.cur.kind != "EOF":
            line = self.cur.line
            rule = self.parse_rule()
            if rule.id in seen:
                raise DuplicateRuleId(rule.id, line)
            seen[rule.id] = line
            rules.append(rule)
        return RuleSet(tuple(rules))

    def parse_rule(self) -> Rule:
        self.keyword("rule")
        id_tok = self.expect("WORD", "a rule id")
        self.keyword("kind")
        kind_word = self.keyword("stopp", "start")
        kind = RuleKind.STOPP if kind_word == "stopp" else RuleKind.START
        self.keyword("when")
        when = self.parse_expr()
        self.keyword("problem")
        problem_tok = self.expect("STRING", "a quoted problem description")
        suggest_tok = self.cur
        self.keyword("suggest")
        suggestion = self.parse_action()
        self.keyword("severity")
        severity = self.parse_int("a severity 1..4")
        if severity not in (1, 2, 3, 4):
            raise RuleSyntaxError(
                self.tokens[self.pos - 1].line,
                self.tokens[self.pos - 1].col,
                "a severity 1..4",
                str(severity),
            )
        self._check_suggestion(kind, when, suggestion, suggest_tok)
        return Rule(
            id=id_tok.text,
            kind=kind,
            when=when,
            problem_text=problem_tok.text,
            suggestion=suggestion,
            severity_hint=severity,
        )

    def _check_suggestion(
        self, kind: RuleKind, when: PredicateTree, suggestion: InterventionTemplate, tok: Token
    ) -> None:
        if kind is RuleKind.STOPP:
            if suggestion.action not in _STOPP_ACTIONS:
                raise RuleSyntaxError(
                    tok.line, tok.col, "a STOPP action (deprescribe/replace/change_dose/lab_test)",
                    suggestion.action.value,
                )
            positives = positive_drug_atoms(when)
            if not positives:
                raise RuleSyntaxError(
                    tok.line, tok.col, "a STOPP rule to reference a drug predicate in its when clause"
                )
            target = suggestion.target_atc
            if target is not None and not any(
                _atc_overlap(atom.prefix, target) for atom in positives
            ):
                raise RuleSyntaxError(
                    tok.line,
                    tok.col,
                    f"suggestion target {target} to overlap a drug predicate in the when clause",
                )
        else:
            if suggestion.action not in _START_ACTIONS:
                raise RuleSyntaxError(
                    tok.line, tok.col, "a START action (prescribe/lab_test)", suggestion.action.value
                )

    # --- expressions ---------------------------------------------------

    def parse_expr(self) -> PredicateTree:
        children = [self.parse_and()]
        while self.at_keyword("or"):
            self.advance()
            children.append(self.parse_and())
        return children[0] if len(children) == 1 else Or(tuple(children))

    def parse_and(self) -> PredicateTree:
        children = [self.parse_not()]
        while self.at_keyword("and"):
            self.advance()
            children.append(self.parse_not())
        return children[0] if len(children) == 1 else And(tuple(children))

    def parse_not(self) -> PredicateTree:
        if self.at_keyword("not"):
            self.advance()
            return Not(self.parse_not())
        if self.cur.kind == "LPAREN":
            self.advance()
            inner = self.parse_expr()
            self.expect("RPAREN", "')'")
            return inner
        return self.parse_atom()

    def parse_atom(self) -> AtomicPredicate:
        name = self.keyword("drug", "condition", "lab", "age", "crcl", "indication")
        self.expect("LPAREN", "'('")
        if name == "drug":
            atom = self.parse_drug()
        elif name == "condition":
            atom = self.parse_condition()
        elif name == "lab":
            loinc = self.parse_loinc()
            self.expect("COMMA", "','")
            op = self.parse_cmp()
            self.expect("COMMA", "','")
            atom = LabPredicate(loinc, op, self.parse_number("a lab value"))
        elif name == "age":
            op = self.parse_cmp()
            self.expect("COMMA", "','")
            atom = AgePredicate(op, self.parse_number("an age in years"))
        elif name == "crcl":
            op = self.parse_cmp()
            self.expect("COMMA", "','")
            atom = CrclPredicate(op, self.parse_number("a clearance in mL/min"))
        else:
            atc = self.parse_atc()
            self.expect("COMMA", "','")
            icd = self.parse_icd10()
            atom = IndicationPredicate(atc, icd)
        self.expect("RPAREN", "')'")
        return atom

    def parse_drug(self) -> DrugPredicate:
        prefix = self.parse_atc()
        dose: DoseQualifier | None = None
        duration: DurationQualifier | None = None
        while self.cur.kind == "COMMA":
            self.advance()
            which = self.keyword("dose", "duration")
            op = self.parse_cmp()
            if op not in (Comparator.GE, Comparator.LE):
                raise RuleSyntaxError(
                    self.tokens[self.pos - 1].line,
                    self.tokens[self.pos - 1].col,
                    "'>=' or '<=' in a qualifier",
                    op.value,
                )
            if which == "dose":
                if dose is not None:
                    raise self.fail("at most one dose qualifier")
                value = self.parse_number("a dose value")
                unit_tok = self.expect("WORD", "a dose unit")
                try:
                    unit = parse_unit(unit_tok.text)
                except UnknownUnit as exc:
                    raise RuleSyntaxError(unit_tok.line, unit_tok.col, "a dose unit", unit_tok.text) from exc
                dose = DoseQualifier(op, Dose(value, unit))
            else:
                if duration is not None:
                    raise self.fail("at most one duration qualifier")
                duration = DurationQualifier(op, self.parse_int("a duration in days"))
        return DrugPredicate(prefix, dose, duration)

    def parse_condition(self) -> ConditionPredicate:
        prefixes = [self.parse_icd10()]
        while self.cur.kind == "COMMA":
            self.advance()
            prefixes.append(self.parse_icd10())
        return ConditionPredicate(tuple(prefixes))

    def parse_cmp(self) -> Comparator:
        tok = self.expect("OP", "a comparator (<, <=, >, >=, =)")
        return Comparator(tok.text)

    def parse_number(self, expected: str) -> float:
        tok = self.expect("WORD", expected)
        try:
            return float(tok.text)
        except ValueError:
            raise RuleSyntaxError(tok.line, tok.col, expected, tok.text) from None

    def parse_int(self, expected: str) -> int:
        tok = self.expect("WORD", expected)
        try:
            return int(tok.text)
        except ValueError:
            raise RuleSyntaxError(tok.line, tok.col, expected, tok.text) from None

    def parse_atc(self) -> AtcCode:
        tok = self.expect("WORD", "an ATC code or class prefix")
        try:
            return AtcCode(tok.text)
        except MalformedCode as exc:
            raise InvalidRuleCode(tok.line, tok.col, str(exc)) from exc

    def parse_icd10(self) -> Icd10Code:
        tok = self.expect("WORD", "an ICD-10 code or prefix")
        try:
            return Icd10Code(tok.text)
        except MalformedCode as exc:
            raise InvalidRuleCode(tok.line, tok.col, str(exc)) from exc

    def parse_loinc(self) -> LoincCode:
        tok = self.expect("WORD", "a LOINC code")
        try:
            return LoincCode(tok.text)
        except MalformedCode as exc:
            raise InvalidRuleCode(tok.line, tok.col, str(exc)) from exc

    def parse_action(self) -> InterventionTemplate:
        tok = self.cur
        name = self.keyword("deprescribe", "prescribe", "replace", "change_dose", "lab_test")
        self.expect("LPAREN", "'('")
        if name == "deprescribe" or name == "prescribe":
            target = self.parse_atc()
            template = InterventionTemplate(InterventionAction(name), target_atc=target)
        elif name == "replace":
            target = self.parse_atc()
            self.expect("COMMA", "','")
            replacement = self.parse_atc()
            template = InterventionTemplate(
                InterventionAction.REPLACE, target_atc=target, replacement_atc=replacement
            )
        elif name == "change_dose":
            target = self.parse_atc()
            self.expect("COMMA", "','")
            direction = self.keyword("increase", "decrease")
            template = InterventionTemplate(
                InterventionAction.CHANGE_DOSE,
                target_atc=target,
                dose_direction=DoseDirection(direction),
            )
        else:
            loinc = self.parse_loinc()
            template = InterventionTemplate(InterventionAction.LAB_TEST, lab_loinc=loinc)
        self.expect("RPAREN", "')'")
        del tok
        return template


def _atc_overlap(a: AtcCode, b: AtcCode) -> bool:
    return a.code.startswith(b.code) or b.code.startswith(a.code)


def parse_rules(source: str) -> RuleSet:
    """Parse rule text into a RuleSet, validating codes and rule structure."""
    return _Parser(tokenize(source)).parse_ruleset()


# --- rendering ---------------------------------------------------------


def _fmt_num(value: float) -> str:
    if value == int(value):
        return str(int(value))
    return repr(value)


def render_atom(atom: AtomicPredicate) -> str:
    if isinstance(atom, DrugPredicate):
        parts = [atom.prefix.code]
        if atom.dose is not None:
            parts.append(
                f"dose {atom.dose.op.value} {_fmt_num(atom.dose.dose.value)} {atom.dose.dose.unit.value}"
            )
        if atom.duration is not None:
            parts.append(f"duration {atom.duration.op.value} {atom.duration.days}")
        return f"drug({', '.join(parts)})"
    if isinstance(atom, ConditionPredicate):
        return f"condition({', '.join(p.code for p in atom.prefixes)})"
    if isinstance(atom, LabPredicate):
        return f"lab({atom.loinc.code}, {atom.op.value}, {_fmt_num(atom.value)})"
    if isinstance(atom, AgePredicate):
        return f"age({atom.op.value}, {_fmt_num(atom.years)})"
    if isinstance(atom, CrclPredicate):
        return f"crcl({atom.op.value}, {_fmt_num(atom.value)})"
    return f"indication({atom.atc_prefix.code}, {atom.icd10_prefix.code})"


def render_expr(tree: PredicateTree) -> str:
    if isinstance(tree, Not):
        child = tree.child
        if isinstance(child, (And, Or)):
            return f"not ({render_expr(child)})"
        return f"not {render_expr(child)}"
    if isinstance(tree, And):
        parts = [
            f"({render_expr(c)})" if isinstance(c, (And, Or)) else render_expr(c)
            for c in tree.children
        ]
        return " and ".join(parts)
    if isinstance(tree, Or):
        parts = [
            f"({render_expr(c)})" if isinstance(c, Or) else render_expr(c)
            for c in tree.children
        ]
        return " or ".join(parts)
    return render_atom(tree)


def render_action(template: InterventionTemplate) -> str:
    action = template.action
    if action is InterventionAction.REPLACE:
        return f"replace({template.target_atc.code}, {template.replacement_atc.code})"
    if action is InterventionAction.CHANGE_DOSE:
        return f"change_dose({template.target_atc.code}, {template.dose_direction.value})"
    if action is InterventionAction.LAB_TEST:
        return f"lab_test({template.lab_loinc.code})"
    return f"{action.value}({template.target_atc.code})"


def render_rule(rule: Rule) -> str:
    return (
        f"rule {rule.id} kind {rule.kind.value}\n"
        f"when {render_expr(rule.when)}\n"
        f'problem "{rule.problem_text}"\n'
        f"suggest {render_action(rule.suggestion)}\n"
        f"severity {rule.severity_hint}\n"
    )


def render_rules(ruleset: RuleSet) -> str:
    return "\n".join(render_rule(r) for r in ruleset.rules)


# --- lint --------------------------------------------------------------


@dataclass(frozen=True)
class LintWarning:
    rule_id: str
    message: str


def lint_rules(ruleset: RuleSet) -> list[LintWarning]:
    """Non-fatal checks beyond the grammar; parse_rules already enforces the
    hard invariants."""
    from .model import atoms_of

    warnings: list[LintWarning] = []
    for rule in ruleset.rules:
        atoms = atoms_of(rule.when)
        seen = set()
        for atom in atoms:
            if atom in seen:
                warnings.append(
                    LintWarning(rule.id, f"predicate {render_atom(atom)} appears more than once")
                )
            seen.add(atom)
        if rule.kind is RuleKind.START and rule.suggestion.action is InterventionAction.PRESCRIBE:
            target = rule.suggestion.target_atc
            negated = _negated_drug_prefixes(rule.when)
            if target is not None and not any(_atc_overlap(p, target) for p in negated):
                warnings.append(
                    LintWarning(
                        rule.id,
                        f"prescribing {target} would not clear this rule: the when clause "
                        f"never requires its absence",
                    )
                )
    return warnings


def _negated_drug_prefixes(tree: PredicateTree, negated: bool = False) -> list[AtcCode]:
    if isinstance(tree, (And, Or)):
        out: list[AtcCode] = []
        for child in tree.children:
            out.extend(_negated_drug_prefixes(child, negated))
        return out
    if isinstance(tree, Not):
        return _negated_drug_prefixes(tree.child, not negated)
    if isinstance(tree, DrugPredicate) and negated:
        return [tree.prefix]
    return []
