"""File-backed drug knowledge base: monographs, interactions, dosage rules.

The KB is a single JSON document (top-level keys ``version``, ``drugs``,
``interactions``) loaded all-or-nothing and immutable afterwards. Interactions
are declared between ATC class prefixes and resolved against the concrete
prescribed drugs at query time. Dosage rules carry applicability predicates
(age, renal function, hepatic status, indication, co-prescription) and are
ranked by specificity.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

from .patient import PatientContext
from .terminology import (
    AtcCode,
    Icd10Code,
    MalformedCode,
    atc_matches,
    icd10_matches,
)
from .units import Dose, UnknownUnit


@dataclass(frozen=True)
class EffectFrequency:
    effect_category: str
    frequency: float  # probability in [0, 1]
    severity: int  # 1..4


@dataclass(frozen=True)
class Interaction:
    """An unordered pair of interacting ATC class prefixes.

    severity_level: 1 = to take into account, 2 = precaution,
    3 = not recommended, 4 = contraindicated.
    """

    atc_a: AtcCode
    atc_b: AtcCode
    severity_level: int
    mechanism: str

    def __post_init__(self):
        # canonical orientation: lexicographically sorted pair
        if self.atc_b.code < self.atc_a.code:
            a, b = self.atc_b, self.atc_a
            object.__setattr__(self, "atc_a", a)
            object.__setattr__(self, "atc_b", b)


@dataclass(frozen=True)
class Applicability:
    """Conditions under which a dosage rule applies. Absent fields always hold.

    min_* bounds are inclusive, max_* bounds exclusive, so "CrCl < 30" is
    max_crcl=30 and "age >= 65" is min_age=65. Absent context data (no
    creatinine clearance) fails any crcl predicate.
    """

    min_age: int | None = None
    max_age: int | None = None
    min_crcl: float | None = None
    max_crcl: float | None = None
    hepatic_impairment: bool | None = None
    indication: Icd10Code | None = None
    co_prescribed: AtcCode | None = None

    def rank(self) -> int:
        """Number of non-empty predicates (specificity)."""
        return sum(
            v is not None
            for v in (
                self.min_age,
                self.max_age,
                self.min_crcl,
                self.max_crcl,
                self.hepatic_impairment,
                self.indication,
                self.co_prescribed,
            )
        )

    def holds(self, context: PatientContext) -> bool:
        if self.min_age is not None and context.age < self.min_age:
            return False
        if self.max_age is not None and context.age >= self.max_age:
            return False
        if self.min_crcl is not None or self.max_crcl is not None:
            crcl = context.creatinine_clearance
            if crcl is None:
                return False
            if self.min_crcl is not None and crcl < self.min_crcl:
                return False
            if self.max_crcl is not None and crcl >= self.max_crcl:
                return False
        if self.hepatic_impairment is not None:
            if context.hepatic_impairment != self.hepatic_impairment:
                return False
        if self.indication is not None:
            if not any(icd10_matches(c, self.indication) for c in context.conditions):
                return False
        if self.co_prescribed is not None:
            if not any(atc_matches(drug, self.co_prescribed) for drug in context.co_prescribed):
                return False
        return True


@dataclass(frozen=True)
class DosageRule:
    atc: AtcCode
    applicability: Applicability = field(default_factory=Applicability)
    min_daily_dose: Dose | None = None
    max_daily_dose: Dose | None = None

    @property
    def specificity_rank(self) -> int:
        return self.applicability.rank()


@dataclass(frozen=True)
class DrugMonograph:
    atc: AtcCode
    name: str
    adverse_effects: tuple[EffectFrequency, ...] = ()
    dosage_rules: tuple[DosageRule, ...] = ()


@dataclass(frozen=True)
class ResolvedInteraction:
    """A KB interaction resolved to a concrete prescribed drug pair."""

    drug_a: AtcCode
    drug_b: AtcCode
    severity_level: int
    mechanism: str
    source: Interaction

    def __post_init__(self):
        if self.drug_b.code < self.drug_a.code:
            a, b = self.drug_b, self.drug_a
            object.__setattr__(self, "drug_a", a)
            object.__setattr__(self, "drug_b", b)


@dataclass(frozen=True)
class DrugKB:
    version: str
    drugs: tuple[DrugMonograph, ...]
    interactions: tuple[Interaction, ...]

    def monograph(self, atc: AtcCode) -> DrugMonograph | None:
        return {m.atc: m for m in self.drugs}.get(atc)


@dataclass(frozen=True)
class KbFinding:
    location: str
    code: str  # SchemaError | DuplicateAtc | InvalidCode | InvalidRange
    message: str


class KbLoadError(ValueError):
    """Raised when a KB file fails validation; loading is all-or-nothing."""

    def __init__(self, findings: list[KbFinding]):
        self.findings = findings
        lines = "; ".join(f"{f.location}: {f.message}" for f in findings[:5])
        more = "" if len(findings) <= 5 else f" (+{len(findings) - 5} more)"
        super().__init__(f"knowledge base rejected: {lines}{more}")


class DrugNotInKb(KeyError):
    def __init__(self, atc: AtcCode):
        self.atc = atc
        super().__init__(f"no monograph for {atc}")


def load_knowledge_base(source: bytes | str) -> DrugKB:
    """Parse and validate a KB document. Raises KbLoadError listing every
    validation failure with its record location; nothing partial is returned.
    """
    findings: list[KbFinding] = []
    try:
        doc = json.loads(source)
    except json.JSONDecodeError as exc:
        raise KbLoadError([KbFinding("$", "SchemaError", f"not valid JSON: {exc}")]) from exc
    if not isinstance(doc, dict):
        raise KbLoadError([KbFinding("$", "SchemaError", "top level must be an object")])

    version = doc.get("version")
    if not isinstance(version, str) or not version:
        findings.append(KbFinding("version", "SchemaError", "version must be a non-empty string"))
        version = ""

    drugs: list[DrugMonograph] = []
    seen_atc: set[str] = set()
    for i, raw in enumerate(_expect_list(doc, "drugs", findings)):
        loc = f"drugs[{i}]"
        mono = _parse_monograph(raw, loc, findings)
        if mono is None:
            continue
        if mono.atc.code in seen_atc:
            findings.append(KbFinding(loc, "DuplicateAtc", f"duplicate monograph for {mono.atc}"))
            continue
        seen_atc.add(mono.atc.code)
        drugs.append(mono)

    interactions: list[Interaction] = []
    for i, raw in enumerate(_expect_list(doc, "interactions", findings)):
        loc = f"interactions[{i}]"
        inter = _parse_interaction(raw, loc, findings)
        if inter is not None:
            interactions.append(inter)

    if findings:
        raise KbLoadError(findings)
    return DrugKB(version=version, drugs=tuple(drugs), interactions=tuple(interactions))


def serialize_knowledge_base(kb: DrugKB) -> str:
    """Inverse of load_knowledge_base; load(serialize(kb)) == kb."""
    doc = {
        "version": kb.version,
        "drugs": [_monograph_to_json(m) for m in kb.drugs],
        "interactions": [
            {
                "atc_a": i.atc_a.code,
                "atc_b": i.atc_b.code,
                "severity_level": i.severity_level,
                "mechanism": i.mechanism,
            }
            for i in kb.interactions
        ],
    }
    return json.dumps(doc, indent=2, ensure_ascii=False, sort_keys=True) + "\n"


def interactions_for(kb: DrugKB, prescribed: set[AtcCode]) -> list[ResolvedInteraction]:
    """Resolve KB class-level interactions against concrete prescribed drugs.

    Each result names a distinct pair of prescribed drugs matching the two
    class prefixes; an interaction whose prefixes only match one and the
    same drug is dropped. Output is canonically ordered and de-duplicated.
    """
    resolved: dict[tuple[str, str, int, str], ResolvedInteraction] = {}
    for inter in kb.interactions:
        side_a = [d for d in prescribed if atc_matches(d, inter.atc_a)]
        side_b = [d for d in prescribed if atc_matches(d, inter.atc_b)]
        for da in side_a:
            for db in side_b:
                if da == db:
                    continue
                item = ResolvedInteraction(da, db, inter.severity_level, inter.mechanism, inter)
                key = (item.drug_a.code, item.drug_b.code, item.severity_level, item.mechanism)
                resolved.setdefault(key, item)
    return sorted(
        resolved.values(),
        key=lambda r: (r.drug_a.code, r.drug_b.code, -r.severity_level, r.mechanism),
    )


def applicable_dosage_rules(
    kb: DrugKB, atc: AtcCode, context: PatientContext
) -> list[DosageRule]:
    """Dosage rules for a drug whose every predicate holds, most specific
    first; ties keep KB file order.
    """
    mono = kb.monograph(atc)
    if mono is None:
        raise DrugNotInKb(atc)
    applicable = [
        (rule, idx)
        for idx, rule in enumerate(mono.dosage_rules)
        if rule.applicability.holds(context)
    ]
    applicable.sort(key=lambda pair: (-pair[0].specificity_rank, pair[1]))
    return [rule for rule, _ in applicable]


# --- JSON parsing helpers ---------------------------------------------------


def _expect_list(doc: dict, key: str, findings: list[KbFinding]) -> list:
    value = doc.get(key, [])
    if not isinstance(value, list):
        findings.append(KbFinding(key, "SchemaError", f"{key} must be an array"))
        return []
    return value


def _parse_monograph(raw, loc: str, findings: list[KbFinding]) -> DrugMonograph | None:
    if not isinstance(raw, dict):
        findings.append(KbFinding(loc, "SchemaError", "monograph must be an object"))
        return None
    ok = True
    atc = _parse_code(raw.get("atc"), AtcCode, f"{loc}.atc", findings)
    if atc is None:
        ok = False
    name = raw.get("name")
    if not isinstance(name, str) or not name:
        findings.append(KbFinding(f"{loc}.name", "SchemaError", "name must be a non-empty string"))
        ok = False

    effects: list[EffectFrequency] = []
    seen_categories: set[str] = set()
    raw_effects = raw.get("adverse_effects", [])
    if not isinstance(raw_effects, list):
        findings.append(KbFinding(f"{loc}.adverse_effects", "SchemaError", "must be an array"))
        raw_effects, ok = [], False
    for j, raw_eff in enumerate(raw_effects):
        eloc = f"{loc}.adverse_effects[{j}]"
        eff = _parse_effect(raw_eff, eloc, findings)
        if eff is None:
            ok = False
            continue
        if eff.effect_category in seen_categories:
            findings.append(
                KbFinding(eloc, "SchemaError", f"duplicate effect category {eff.effect_category!r}")
            )
            ok = False
            continue
        seen_categories.add(eff.effect_category)
        effects.append(eff)

    rules: list[DosageRule] = []
    raw_rules = raw.get("dosage_rules", [])
    if not isinstance(raw_rules, list):
        findings.append(KbFinding(f"{loc}.dosage_rules", "SchemaError", "must be an array"))
        raw_rules, ok = [], False
    for j, raw_rule in enumerate(raw_rules):
        rule = _parse_dosage_rule(raw_rule, atc, f"{loc}.dosage_rules[{j}]", findings)
        if rule is None:
            ok = False
        else:
            rules.append(rule)

    if not ok or atc is None:
        return None
    return DrugMonograph(atc=atc, name=name, adverse_effects=tuple(effects), dosage_rules=tuple(rules))


def _parse_effect(raw, loc: str, findings: list[KbFinding]) -> EffectFrequency | None:
    if not isinstance(raw, dict):
        findings.append(KbFinding(loc, "SchemaError", "adverse effect must be an object"))
        return None
    category = raw.get("effect")
    if not isinstance(category, str) or not category:
        findings.append(KbFinding(f"{loc}.effect", "SchemaError", "effect must be a non-empty string"))
        return None
    frequency = raw.get("frequency")
    if not isinstance(frequency, (int, float)) or isinstance(frequency, bool) or not 0 <= frequency <= 1:
        findings.append(
            KbFinding(f"{loc}.frequency", "InvalidRange", f"frequency must be in [0,1], got {frequency!r}")
        )
        return None
    severity = raw.get("severity")
    if severity not in (1, 2, 3, 4):
        findings.append(
            KbFinding(f"{loc}.severity", "InvalidRange", f"severity must be 1..4, got {severity!r}")
        )
        return None
    return EffectFrequency(category, float(frequency), severity)


def _parse_dosage_rule(raw, atc: AtcCode | None, loc: str, findings: list[KbFinding]) -> DosageRule | None:
    if not isinstance(raw, dict):
        findings.append(KbFinding(loc, "SchemaError", "dosage rule must be an object"))
        return None
    if atc is None:
        return None
    raw_app = raw.get("applicability", {})
    if not isinstance(raw_app, dict):
        findings.append(KbFinding(f"{loc}.applicability", "SchemaError", "must be an object"))
        return None
    app = _parse_applicability(raw_app, f"{loc}.applicability", findings)
    min_dose = _parse_dose(raw.get("min_daily_dose"), f"{loc}.min_daily_dose", findings)
    max_dose = _parse_dose(raw.get("max_daily_dose"), f"{loc}.max_daily_dose", findings)
    if app is None or min_dose is _INVALID or max_dose is _INVALID:
        return None
    if min_dose is None and max_dose is None:
        findings.append(
            KbFinding(loc, "SchemaError", "dosage rule needs min_daily_dose or max_daily_dose")
        )
        return None
    if min_dose is not None and max_dose is not None:
        if min_dose.unit != max_dose.unit:
            findings.append(KbFinding(loc, "SchemaError", "min and max dose units differ"))
            return None
        if min_dose.value > max_dose.value:
            findings.append(
                KbFinding(loc, "InvalidRange", f"min {min_dose} exceeds max {max_dose}")
            )
            return None
    return DosageRule(atc=atc, applicability=app, min_daily_dose=min_dose, max_daily_dose=max_dose)


def _parse_applicability(raw: dict, loc: str, findings: list[KbFinding]) -> Applicability | None:
    ok = True
    numeric = {}
    for key in ("min_age", "max_age", "min_crcl", "max_crcl"):
        value = raw.get(key)
        if value is not None and (isinstance(value, bool) or not isinstance(value, (int, float))):
            findings.append(KbFinding(f"{loc}.{key}", "SchemaError", f"{key} must be a number"))
            ok = False
            value = None
        numeric[key] = value
    hepatic = raw.get("hepatic_impairment")
    if hepatic is not None and not isinstance(hepatic, bool):
        findings.append(KbFinding(f"{loc}.hepatic_impairment", "SchemaError", "must be a boolean"))
        ok = False
        hepatic = None
    indication = None
    if raw.get("indication") is not None:
        indication = _parse_code(raw["indication"], Icd10Code, f"{loc}.indication", findings)
        ok = ok and indication is not None
    co_prescribed = None
    if raw.get("co_prescribed") is not None:
        co_prescribed = _parse_code(raw["co_prescribed"], AtcCode, f"{loc}.co_prescribed", findings)
        ok = ok and co_prescribed is not None
    if not ok:
        return None
    return Applicability(
        min_age=numeric["min_age"],
        max_age=numeric["max_age"],
        min_crcl=numeric["min_crcl"],
        max_crcl=numeric["max_crcl"],
        hepatic_impairment=hepatic,
        indication=indication,
        co_prescribed=co_prescribed,
    )


_INVALID = object()


def _parse_dose(raw, loc: str, findings: list[KbFinding]):
    if raw is None:
        return None
    if not isinstance(raw, dict):
        findings.append(KbFinding(loc, "SchemaError", "dose must be {value, unit}"))
        return _INVALID
    value = raw.get("value")
    if isinstance(value, bool) or not isinstance(value, (int, float)) or value < 0:
        findings.append(KbFinding(f"{loc}.value", "InvalidRange", f"dose value must be >= 0, got {value!r}"))
        return _INVALID
    try:
        return Dose(float(value), raw.get("unit", ""))
    except UnknownUnit as exc:
        findings.append(KbFinding(f"{loc}.unit", "SchemaError", str(exc)))
        return _INVALID


def _parse_code(raw, cls, loc: str, findings: list[KbFinding]):
    if not isinstance(raw, str):
        findings.append(KbFinding(loc, "SchemaError", f"expected a {cls.__name__} string"))
        return None
    try:
        return cls(raw)
    except MalformedCode as exc:
        findings.append(KbFinding(loc, "InvalidCode", str(exc)))
        return None


def _parse_interaction(raw, loc: str, findings: list[KbFinding]) -> Interaction | None:
    if not isinstance(raw, dict):
        findings.append(KbFinding(loc, "SchemaError", "interaction must be an object"))
        return None
    atc_a = _parse_code(raw.get("atc_a"), AtcCode, f"{loc}.atc_a", findings)
    atc_b = _parse_code(raw.get("atc_b"), AtcCode, f"{loc}.atc_b", findings)
    severity = raw.get("severity_level")
    if severity not in (1, 2, 3, 4):
        findings.append(
            KbFinding(f"{loc}.severity_level", "InvalidRange", f"severity_level must be 1..4, got {severity!r}")
        )
        return None
    mechanism = raw.get("mechanism", "")
    if not isinstance(mechanism, str):
        findings.append(KbFinding(f"{loc}.mechanism", "SchemaError", "mechanism must be a string"))
        return None
    if atc_a is None or atc_b is None:
        return None
    return Interaction(atc_a=atc_a, atc_b=atc_b, severity_level=severity, mechanism=mechanism)


def _monograph_to_json(m: DrugMonograph) -> dict:
    doc: dict = {"atc": m.atc.code, "name": m.name}
    if m.adverse_effects:
        doc["adverse_effects"] = [
            {"effect": e.effect_category, "frequency": e.frequency, "severity": e.severity}
            for e in m.adverse_effects
        ]
    if m.dosage_rules:
        doc["dosage_rules"] = [_dosage_rule_to_json(r) for r in m.dosage_rules]
    return doc


def _dosage_rule_to_json(rule: DosageRule) -> dict:
    doc: dict = {}
    app = rule.applicability
    raw_app = {}
    for key in ("min_age", "max_age", "min_crcl", "max_crcl", "hepatic_impairment"):
        value = getattr(app, key)
        if value is not None:
            raw_app[key] = value
    if app.indication is not None:
        raw_app["indication"] = app.indication.code
    if app.co_prescribed is not None:
        raw_app["co_prescribed"] = app.co_prescribed.code
    if raw_app:
        doc["applicability"] = raw_app
    if rule.min_daily_dose is not None:
        doc["min_daily_dose"] = {"value": rule.min_daily_dose.value, "unit": rule.min_daily_dose.unit.value}
    if rule.max_daily_dose is not None:
        doc["max_daily_dose"] = {"value": rule.max_daily_dose.value, "unit": rule.max_daily_dose.unit.value}
    return doc
