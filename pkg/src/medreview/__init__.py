"""medreview: decision support engine and trial harness for pharmacist
medication reviews.

The engine detects drug-related problems through a declarative screening
rule language over coded patient data (ATC / ICD-10 / LOINC), aggregates
drug knowledge (dosages, adverse effects, interactions) into analysis
reports, supports comparative before/after review sessions, and ships a
scoring harness for crossover simulation trials.
"""

from importlib import resources

__version__ = "0.1.0"


def data_path(*parts: str):
    """Path to a shipped data file (knowledge base, rule corpus, cases)."""
    path = resources.files("medreview").joinpath("data", *parts)
    return path
