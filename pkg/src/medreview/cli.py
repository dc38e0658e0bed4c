"""Command-line interface: analysis, review, rule linting, trial scoring
and the HTTP server.

Validation failures exit nonzero with a machine-readable JSON error list on
stderr.
"""

from __future__ import annotations

import json
import sys
from pathlib import Path

import click

from .analysis import analyze
from .drugdb import KbLoadError, load_knowledge_base
from .jsonio import (
    FormatError,
    canonical_json,
    comparison_to_dict,
    intervention_from_dict,
    load_gold_cases,
    load_patient,
    load_submissions,
    load_trial_records,
    pretty_json,
    report_to_dict,
    rows_from_csv,
    rows_to_csv,
    summary_to_dict,
)
from .patient import validate_patient
from .review import InterventionError, create_session, compare
from .rules import RuleParseError, lint_rules, parse_rules
from .trial import (
    TrialSummary,
    score_records,
    score_submission,
    summarize_rows,
    validate_trial_record,
)


def _fail(errors: list[dict], code: int = 1) -> None:
    click.echo(json.dumps({"errors": errors}, ensure_ascii=False), err=True)
    sys.exit(code)


def _load_engine(kb_path: str, rules_path: str):
    try:
        kb = load_knowledge_base(Path(kb_path).read_bytes())
    except KbLoadError as exc:
        _fail([{"location": f.location, "code": f.code, "message": f.message} for f in exc.findings])
    try:
        ruleset = parse_rules(Path(rules_path).read_text(encoding="utf-8"))
    except RuleParseError as exc:
        _fail([_parse_error_dict(exc)])
    return kb, ruleset


def _parse_error_dict(exc: RuleParseError) -> dict:
    out = {"message": str(exc)}
    if hasattr(exc, "line"):
        out["line"] = exc.line
    if hasattr(exc, "col"):
        out["col"] = exc.col
    return out


def _load_valid_patient(path: str):
    try:
        record = load_patient(Path(path).read_text(encoding="utf-8"))
    except FormatError as exc:
        _fail([{"message": str(exc)}])
    findings = validate_patient(record)
    if findings:
        _fail([{"path": f.path, "code": f.code, "message": f.message} for f in findings])
    return record


@click.group()
def main():
    """Medication review decision support engine."""


@main.command()
@click.option("--port", default=8000, show_default=True, type=int)
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--data-dir", required=True, type=click.Path(file_okay=False))
@click.option("--token", default=None, help="Static bearer token; unset disables auth.")
def serve(port: int, host: str, data_dir: str, token: str | None):
    """Run the HTTP service."""
    import uvicorn

    from .service import create_app

    uvicorn.run(create_app(data_dir, token), host=host, port=port, log_level="info")


@main.command(name="analyze")
@click.option("--patient", "patient_path", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--kb", "kb_path", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--rules", "rules_path", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--out", "out_path", default=None, type=click.Path(dir_okay=False))
@click.option("--pretty", is_flag=True, help="Indented output instead of canonical form.")
def analyze_cmd(patient_path, kb_path, rules_path, out_path, pretty):
    """Analyze one patient and print the report."""
    kb, ruleset = _load_engine(kb_path, rules_path)
    record = _load_valid_patient(patient_path)
    report = report_to_dict(analyze(record, kb, ruleset))
    text = pretty_json(report) if pretty else canonical_json(report)
    if out_path:
        Path(out_path).write_text(text, encoding="utf-8")
    else:
        click.echo(text, nl=False)


@main.command(name="review")
@click.option("--patient", "patient_path", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--kb", "kb_path", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--rules", "rules_path", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--interventions", "iv_path", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--pretty", is_flag=True)
def review_cmd(patient_path, kb_path, rules_path, iv_path, pretty):
    """Apply an intervention list and print the before/after comparison."""
    kb, ruleset = _load_engine(kb_path, rules_path)
    record = _load_valid_patient(patient_path)
    try:
        raw = json.loads(Path(iv_path).read_text(encoding="utf-8"))
        interventions = [
            intervention_from_dict(x, f"interventions[{i}]") for i, x in enumerate(raw)
        ]
    except (json.JSONDecodeError, FormatError) as exc:
        _fail([{"message": str(exc)}])
    session = create_session(record)
    for iv in interventions:
        from .review import add_intervention

        session = add_intervention(session, iv)
    try:
        comparison = compare(session, kb, ruleset)
    except InterventionError as exc:
        _fail([{"message": str(exc)}])
    text = pretty_json(comparison_to_dict(comparison)) if pretty else canonical_json(comparison_to_dict(comparison))
    click.echo(text, nl=False)


@main.group(name="rules")
def rules_group():
    """Rule corpus utilities."""


@rules_group.command(name="check")
@click.argument("path", type=click.Path(exists=True, dir_okay=False))
def rules_check(path):
    """Parse and lint a rule file; exits 1 with line/col on errors."""
    try:
        ruleset = parse_rules(Path(path).read_text(encoding="utf-8"))
    except RuleParseError as exc:
        _fail([_parse_error_dict(exc)])
    warnings = lint_rules(ruleset)
    stopp = sum(1 for r in ruleset if r.kind.value == "STOPP")
    click.echo(f"{len(ruleset)} rules parsed ({stopp} STOPP, {len(ruleset) - stopp} START)")
    for warning in warnings:
        click.echo(f"warning: {warning.rule_id}: {warning.message}")


@main.group(name="trial")
def trial_group():
    """Trial scoring and aggregation."""


@trial_group.command(name="score")
@click.option("--gold", "gold_path", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--submissions", "subs_path", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--out", "out_path", default=None, type=click.Path(dir_okay=False))
def trial_score(gold_path, subs_path, out_path):
    """Score submissions against the gold standard, emitting the review CSV."""
    try:
        golds = load_gold_cases(Path(gold_path).read_text(encoding="utf-8"))
        submissions = load_submissions(Path(subs_path).read_text(encoding="utf-8"))
    except FormatError as exc:
        _fail([{"message": str(exc)}])
    rows = []
    for submission in submissions:
        gold = golds.get(submission.case_id)
        if gold is None:
            _fail([{"message": f"no gold standard for case {submission.case_id!r}"}])
        rows.append(score_submission(submission, gold))
    csv_text = rows_to_csv(rows)
    if out_path:
        Path(out_path).write_text(csv_text, encoding="utf-8")
        click.echo(f"{len(rows)} reviews scored -> {out_path}")
    else:
        click.echo(csv_text, nl=False)


@trial_group.command(name="summary")
@click.option(
    "--records",
    "records_path",
    required=True,
    type=click.Path(exists=True, dir_okay=False),
    help="Scored review CSV, or a JSON records file (then --gold is required).",
)
@click.option("--gold", "gold_path", default=None, type=click.Path(exists=True, dir_okay=False))
@click.option("--json", "as_json", is_flag=True, help="Emit the summary as JSON.")
def trial_summary(records_path, gold_path, as_json):
    """Aggregate scored reviews into the per-case / per-arm summary table."""
    path = Path(records_path)
    try:
        if path.suffix.lower() == ".csv":
            rows = rows_from_csv(path.read_text(encoding="utf-8"))
        else:
            if not gold_path:
                _fail([{"message": "--gold is required when --records is a JSON records file"}])
            records = load_trial_records(path.read_text(encoding="utf-8"))
            findings = [f for record in records for f in validate_trial_record(record)]
            if findings:
                _fail([{"message": f} for f in findings])
            golds = load_gold_cases(Path(gold_path).read_text(encoding="utf-8"))
            rows = score_records(records, golds)
    except FormatError as exc:
        _fail([{"message": str(exc)}])
    summary = summarize_rows(rows)
    if as_json:
        click.echo(canonical_json(summary_to_dict(summary)), nl=False)
    else:
        click.echo(_format_summary(summary))


def _format_summary(summary: TrialSummary) -> str:
    def fmt_cell(stats) -> str:
        if stats is None:
            return f"{'-':>7} {'-':>7} {'-':>11}"
        return (
            f"{stats.mean_pct * 100:6.1f}% "
            f"{stats.mean_cleo * 100:6.1f}% "
            f"{stats.mean_minutes:5.1f}/{stats.median_minutes:<5.1f}"
        )

    header = (
        f"{'':10} | {'% problems':>7} {'CLEO':>7} {'min (m/med)':>11} "
        f"| {'% problems':>7} {'CLEO':>7} {'min (m/med)':>11}"
    )
    lines = [
        f"{'':10} | {'----- without support -----':^28} | {'------ with support ------':^28}",
        header,
        "-" * len(header),
    ]
    for case_id in sorted(summary.per_case):
        arms = summary.per_case[case_id]
        lines.append(
            f"Case {case_id:5} | {fmt_cell(arms.get('without'))} | {fmt_cell(arms.get('with'))}"
        )
    lines.append(
        f"{'Overall':10} | {fmt_cell(summary.overall.get('without'))} "
        f"| {fmt_cell(summary.overall.get('with'))}"
    )
    lines.append("")
    for criterion, stat in summary.comparisons.items():
        if stat.p is None:
            lines.append(f"{criterion}: {stat.method} (n={stat.n_a}/{stat.n_b})")
        else:
            lines.append(
                f"{criterion}: p={stat.p:.3g} ({stat.method}, n={stat.n_a}/{stat.n_b})"
            )
    for label, stats in summary.carryover.items():
        parts = ", ".join(
            f"{criterion} p={stat.p:.3g}" if stat.p is not None else f"{criterion} {stat.method}"
            for criterion, stat in stats.items()
        )
        lines.append(f"carryover {label}: {parts}")
    return "\n".join(lines)


if __name__ == "__main__":
    main()
