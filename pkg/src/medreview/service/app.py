"""HTTP service exposing patients, analysis, review sessions and trial
scoring over the file-backed store.

All engine outputs pass through the canonical serializer, so response
bodies are byte-stable for identical inputs. Session mutations are
serialized per session id; replacing the KB or ruleset swaps an immutable
snapshot, so in-flight analyses finish against the old one.
"""

from __future__ import annotations

import threading
from collections import defaultdict
from dataclasses import dataclass

from fastapi import Depends, FastAPI, Request, Response
from fastapi.responses import JSONResponse, PlainTextResponse

from ..analysis import analyze
from ..drugdb import DrugKB, KbLoadError, load_knowledge_base
from ..jsonio import (
    FormatError,
    canonical_json,
    comparison_to_dict,
    gold_case_to_dict,
    intervention_from_dict,
    load_gold_cases,
    patient_from_dict,
    patient_to_dict,
    profile_from_dict,
    profile_to_dict,
    report_to_dict,
    rows_to_csv,
    demographics_to_csv,
    session_from_dict,
    session_to_dict,
    submission_from_dict,
    submission_to_dict,
    summary_to_dict,
)
from ..patient import validate_patient
from ..review import (
    InterventionError,
    SessionFinalized,
    add_elapsed,
    add_intervention,
    compare,
    create_session,
    finalize,
    remove_last,
)
from ..rules import RuleParseError, RuleSet, parse_rules
from ..trial import Arm, UnknownGroup, case_order, score_submission, summarize_rows
from .storage import Store


class ApiError(Exception):
    def __init__(self, status: int, code: str, message: str, details=None):
        self.status = status
        self.code = code
        self.message = message
        self.details = details or []


@dataclass
class EngineSnapshot:
    kb: DrugKB | None = None
    ruleset: RuleSet | None = None
    rules_source: str = ""


class ServiceState:
    def __init__(self, data_dir: str, auth_token: str | None = None):
        self.store = Store(data_dir)
        self.auth_token = auth_token
        self.snapshot = EngineSnapshot()
        self._swap_lock = threading.Lock()
        self._session_locks: dict[str, threading.Lock] = defaultdict(threading.Lock)
        self._restore()

    def _restore(self) -> None:
        stored_kb = self.store.get("kb", "current")
        stored_rules = self.store.get("ruleset", "current")
        snapshot = EngineSnapshot()
        if stored_kb is not None:
            snapshot.kb = load_knowledge_base(canonical_json(stored_kb[0]))
        if stored_rules is not None:
            snapshot.rules_source = stored_rules[0]["source"]
            snapshot.ruleset = parse_rules(snapshot.rules_source)
        self.snapshot = snapshot

    def swap_kb(self, kb: DrugKB, payload: dict) -> int:
        with self._swap_lock:
            version = self.store.put("kb", "current", payload)
            self.snapshot = EngineSnapshot(
                kb=kb, ruleset=self.snapshot.ruleset, rules_source=self.snapshot.rules_source
            )
            return version

    def swap_rules(self, ruleset: RuleSet, source: str) -> int:
        with self._swap_lock:
            version = self.store.put("ruleset", "current", {"source": source})
            self.snapshot = EngineSnapshot(
                kb=self.snapshot.kb, ruleset=ruleset, rules_source=source
            )
            return version

    def engine(self) -> EngineSnapshot:
        snapshot = self.snapshot
        if snapshot.kb is None or snapshot.ruleset is None:
            raise ApiError(409, "EngineNotReady", "no knowledge base or ruleset loaded")
        return snapshot

    def session_lock(self, session_id: str) -> threading.Lock:
        return self._session_locks[session_id]


def _canonical_response(data, status: int = 200) -> Response:
    return Response(content=canonical_json(data), media_type="application/json", status_code=status)


def create_app(data_dir: str, auth_token: str | None = None) -> FastAPI:
    state = ServiceState(data_dir, auth_token)
    app = FastAPI(title="medreview", docs_url=None, redoc_url=None)
    app.state.service = state

    async def require_auth(request: Request) -> None:
        if state.auth_token is None:
            return
        header = request.headers.get("authorization", "")
        if header != f"Bearer {state.auth_token}":
            raise ApiError(401, "Unauthorized", "missing or invalid bearer token")

    guarded = Depends(require_auth)

    @app.exception_handler(ApiError)
    async def on_api_error(_request, exc: ApiError):
        body = {"error": exc.code, "message": exc.message}
        if exc.details:
            body["details"] = exc.details
        return JSONResponse(status_code=exc.status, content=body)

    async def read_json(request: Request):
        try:
            return await request.json()
        except Exception as exc:
            raise ApiError(400, "MalformedBody", f"request body is not valid JSON: {exc}") from exc

    def load_stored_patient(patient_id: str):
        found = state.store.get("patient", patient_id)
        if found is None:
            raise ApiError(404, "UnknownPatient", f"no patient {patient_id!r}")
        return patient_from_dict(found[0])

    # --- patients -------------------------------------------------------

    @app.put("/patients/{patient_id}", dependencies=[guarded])
    async def put_patient(patient_id: str, request: Request):
        raw = await read_json(request)
        try:
            record = patient_from_dict(raw)
        except FormatError as exc:
            raise ApiError(422, "InvalidPatient", str(exc)) from exc
        if record.id != patient_id:
            raise ApiError(422, "IdMismatch", f"body id {record.id!r} != path id {patient_id!r}")
        findings = validate_patient(record)
        if findings:
            raise ApiError(
                422,
                "ValidationFailed",
                "patient record is invalid",
                details=[{"path": f.path, "code": f.code, "message": f.message} for f in findings],
            )
        version = state.store.put("patient", patient_id, patient_to_dict(record))
        return _canonical_response({"id": patient_id, "version": version})

    @app.get("/patients/{patient_id}", dependencies=[guarded])
    async def get_patient(patient_id: str):
        found = state.store.get("patient", patient_id)
        if found is None:
            raise ApiError(404, "UnknownPatient", f"no patient {patient_id!r}")
        payload, version = found
        return _canonical_response({"patient": payload, "version": version})

    @app.get("/patients/{patient_id}/analysis", dependencies=[guarded])
    async def get_analysis(patient_id: str):
        record = load_stored_patient(patient_id)
        engine = state.engine()
        report = analyze(record, engine.kb, engine.ruleset)
        return _canonical_response(report_to_dict(report))

    # --- knowledge base and rules ---------------------------------------

    @app.put("/kb", dependencies=[guarded])
    async def put_kb(request: Request):
        raw = await read_json(request)
        try:
            kb = load_knowledge_base(canonical_json(raw))
        except KbLoadError as exc:
            raise ApiError(
                422,
                "InvalidKb",
                "knowledge base rejected",
                details=[
                    {"location": f.location, "code": f.code, "message": f.message}
                    for f in exc.findings
                ],
            ) from exc
        version = state.swap_kb(kb, raw)
        return _canonical_response({"version": version, "kb_version": kb.version, "drugs": len(kb.drugs)})

    @app.put("/rules", dependencies=[guarded])
    async def put_rules(request: Request):
        raw = await read_json(request)
        if not isinstance(raw, dict) or not isinstance(raw.get("source"), str):
            raise ApiError(422, "InvalidRules", 'body must be {"source": "<rule text>"}')
        try:
            ruleset = parse_rules(raw["source"])
        except RuleParseError as exc:
            detail = {"message": str(exc)}
            if hasattr(exc, "line"):
                detail["line"] = exc.line
            if hasattr(exc, "col"):
                detail["col"] = exc.col
            raise ApiError(422, "InvalidRules", "rule text rejected", details=[detail]) from exc
        version = state.swap_rules(ruleset, raw["source"])
        return _canonical_response({"version": version, "rules": len(ruleset)})

    # --- sessions ---------------------------------------------------------

    def load_session(session_id: str):
        found = state.store.get("session", session_id)
        if found is None:
            raise ApiError(404, "UnknownSession", f"no session {session_id!r}")
        return session_from_dict(found[0])

    def save_session(session) -> None:
        state.store.put("session", session.session_id, session_to_dict(session))

    @app.post("/sessions", dependencies=[guarded])
    async def post_session(request: Request):
        raw = await read_json(request)
        patient_id = raw.get("patient_id") if isinstance(raw, dict) else None
        if not isinstance(patient_id, str):
            raise ApiError(422, "InvalidBody", 'body must be {"patient_id": "..."}')
        record = load_stored_patient(patient_id)
        session = create_session(record)
        save_session(session)
        return _canonical_response(session_to_dict(session), status=201)

    @app.post("/sessions/{session_id}/interventions", dependencies=[guarded])
    async def post_intervention(session_id: str, request: Request):
        raw = await read_json(request)
        try:
            intervention = intervention_from_dict(raw)
        except FormatError as exc:
            raise ApiError(422, "InvalidIntervention", str(exc)) from exc
        with state.session_lock(session_id):
            session = load_session(session_id)
            try:
                session = add_intervention(session, intervention)
            except SessionFinalized as exc:
                raise ApiError(409, "SessionFinalized", str(exc)) from exc
            save_session(session)
        return _canonical_response(session_to_dict(session))

    @app.delete("/sessions/{session_id}/interventions/last", dependencies=[guarded])
    async def delete_last_intervention(session_id: str):
        with state.session_lock(session_id):
            session = load_session(session_id)
            try:
                session = remove_last(session)
            except SessionFinalized as exc:
                raise ApiError(409, "SessionFinalized", str(exc)) from exc
            except InterventionError as exc:
                raise ApiError(409, "NothingToRemove", str(exc)) from exc
            save_session(session)
        return _canonical_response(session_to_dict(session))

    @app.get("/sessions/{session_id}", dependencies=[guarded])
    async def get_session(session_id: str):
        return _canonical_response(session_to_dict(load_session(session_id)))

    @app.get("/sessions/{session_id}/comparison", dependencies=[guarded])
    async def get_comparison(session_id: str):
        session = load_session(session_id)
        engine = state.engine()
        try:
            comparison = compare(session, engine.kb, engine.ruleset)
        except InterventionError as exc:
            raise ApiError(409, "InterventionConflict", str(exc)) from exc
        return _canonical_response(comparison_to_dict(comparison))

    @app.post("/sessions/{session_id}/finalize", dependencies=[guarded])
    async def post_finalize(session_id: str, request: Request):
        raw = {}
        body = await request.body()
        if body:
            raw = await read_json(request)
        with state.session_lock(session_id):
            session = load_session(session_id)
            try:
                extra = raw.get("elapsed_seconds") if isinstance(raw, dict) else None
                if extra is not None:
                    session = add_elapsed(session, float(extra))
                session = finalize(session)
            except SessionFinalized as exc:
                raise ApiError(409, "SessionFinalized", str(exc)) from exc
            save_session(session)
            state.store.append("submission", session_to_dict(session))
        return _canonical_response(session_to_dict(session))

    # --- trial ------------------------------------------------------------

    @app.get("/trial/groups/{group}/order", dependencies=[guarded])
    async def get_case_order(group: str):
        try:
            order = case_order(group)
        except UnknownGroup as exc:
            raise ApiError(404, "UnknownGroup", str(exc)) from exc
        return _canonical_response(
            [
                {"passage": i + 1, "case_id": case_id, "arm": arm.value}
                for i, (case_id, arm) in enumerate(order)
            ]
        )

    @app.put("/trial/gold", dependencies=[guarded])
    async def put_gold(request: Request):
        raw = await read_json(request)
        try:
            cases = load_gold_cases(canonical_json(raw))
        except FormatError as exc:
            raise ApiError(422, "InvalidGold", str(exc)) from exc
        for case in cases.values():
            state.store.put("gold", case.case_id, gold_case_to_dict(case))
        return _canonical_response({"cases": sorted(cases)})

    @app.post("/trial/pharmacists", dependencies=[guarded])
    async def post_pharmacist(request: Request):
        raw = await read_json(request)
        try:
            profile = profile_from_dict(raw)
        except FormatError as exc:
            raise ApiError(422, "InvalidProfile", str(exc)) from exc
        version = state.store.put("trial_record", profile.pharmacist_id, profile_to_dict(profile))
        return _canonical_response({"pharmacist_id": profile.pharmacist_id, "version": version})

    @app.post("/trial/submissions", dependencies=[guarded])
    async def post_submission(request: Request):
        raw = await read_json(request)
        try:
            submission = submission_from_dict(raw)
        except FormatError as exc:
            raise ApiError(422, "InvalidSubmission", str(exc)) from exc
        submission_id = state.store.append("submission", submission_to_dict(submission))
        return _canonical_response({"submission_id": submission_id}, status=201)

    def _gold_cases():
        cases = {}
        for payload in state.store.list_payloads("gold"):
            case = load_gold_cases(canonical_json(payload))
            cases.update(case)
        if not cases:
            raise ApiError(409, "NoGoldStandard", "no gold standard loaded")
        return cases

    def _scored_rows():
        golds = _gold_cases()
        rows = []
        for payload in state.store.list_payloads("submission"):
            if "pharmacist_id" not in payload:
                continue  # finalized review sessions share the submission kind
            submission = submission_from_dict(payload)
            gold = golds.get(submission.case_id)
            if gold is None:
                raise ApiError(
                    409, "MissingGoldCase", f"no gold standard for case {submission.case_id!r}"
                )
            rows.append(score_submission(submission, gold))
        return rows

    @app.get("/trial/summary", dependencies=[guarded])
    async def get_trial_summary():
        rows = _scored_rows()
        return _canonical_response(summary_to_dict(summarize_rows(rows)))

    @app.get("/trial/export.csv", dependencies=[guarded])
    async def get_trial_export():
        rows = _scored_rows()
        return PlainTextResponse(rows_to_csv(rows), media_type="text/csv")

    @app.get("/trial/demographics.csv", dependencies=[guarded])
    async def get_demographics():
        profiles = [profile_from_dict(p) for p in state.store.list_payloads("trial_record")]
        return PlainTextResponse(demographics_to_csv(profiles), media_type="text/csv")

    @app.get("/trial/mode/{arm}", dependencies=[guarded])
    async def get_trial_mode(arm: str, patient_id: str):
        try:
            arm_value = Arm(arm)
        except ValueError as exc:
            raise ApiError(400, "UnknownArm", f"arm must be 'without' or 'with', got {arm!r}") from exc
        record = load_stored_patient(patient_id)
        engine = state.engine()
        report = report_to_dict(analyze(record, engine.kb, engine.ruleset))
        if arm_value is Arm.WITHOUT:
            # control interface: the decision-support views are withheld
            report = {"kb_version": report["kb_version"], "patient_id": report["patient_id"]}
        return _canonical_response(report)

    @app.get("/health")
    async def health():
        snapshot = state.snapshot
        return _canonical_response(
            {
                "status": "ok",
                "kb_loaded": snapshot.kb is not None,
                "rules_loaded": snapshot.ruleset is not None,
            }
        )

    return app
