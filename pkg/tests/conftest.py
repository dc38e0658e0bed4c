import json
from pathlib import Path

import pytest

from medreview import data_path
from medreview.drugdb import load_knowledge_base
from medreview.jsonio import load_gold_cases, load_patient
from medreview.rules import parse_rules

FIXTURES = Path(__file__).parent / "fixtures"


@pytest.fixture(scope="session")
def kb():
    return load_knowledge_base(data_path("kb.json").read_bytes())


@pytest.fixture(scope="session")
def ruleset():
    return parse_rules(data_path("screening.rules").read_text(encoding="utf-8"))


@pytest.fixture(scope="session")
def gold_cases():
    return load_gold_cases(data_path("gold_cases.json").read_text(encoding="utf-8"))


@pytest.fixture(scope="session")
def case_patients():
    return {
        cid: load_patient(data_path("patients", f"case_{cid.lower()}.json").read_text(encoding="utf-8"))
        for cid in "ABCD"
    }


@pytest.fixture(scope="session")
def comparative_fixtures():
    out = []
    for path in sorted((FIXTURES / "comparative").glob("*.json")):
        out.append(json.loads(path.read_text(encoding="utf-8")))
    return out


@pytest.fixture(scope="session")
def welch_oracle_cases():
    return json.loads((FIXTURES / "welch_oracle.json").read_text())
