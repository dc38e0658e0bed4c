// Thin typed client over the service HTTP API. The fetch function is
// injectable so component tests can run against canned responses.

import type {
  AnalysisReport,
  CaseOrderEntry,
  ComparisonReport,
  Intervention,
  PatientRecord,
  ReviewSession,
} from "./types.js";

export type FetchLike = (input: string, init?: RequestInit) => Promise<Response>;

export class ApiError extends Error {
  status: number;
  body: unknown;

  constructor(status: number, body: unknown) {
    const message =
      body && typeof body === "object" && "message" in (body as Record<string, unknown>)
        ? String((body as Record<string, unknown>).message)
        : `request failed with status ${status}`;
    super(message);
    this.status = status;
    this.body = body;
  }
}

export class ApiClient {
  private baseUrl: string;
  private fetchFn: FetchLike;
  private token?: string;

  constructor(baseUrl = "", fetchFn: FetchLike = (...args) => fetch(...args), token?: string) {
    this.baseUrl = baseUrl.replace(/\/$/, "");
    this.fetchFn = fetchFn;
    this.token = token;
  }

  private async request<T>(method: string, path: string, body?: unknown): Promise<T> {
    const headers: Record<string, string> = {};
    if (body !== undefined) headers["Content-Type"] = "application/json";
    if (this.token) headers["Authorization"] = `Bearer ${this.token}`;
    const response = await this.fetchFn(this.baseUrl + path, {
      method,
      headers,
      body: body === undefined ? undefined : JSON.stringify(body),
    });
    const text = await response.text();
    const parsed = text ? JSON.parse(text) : null;
    if (!response.ok) throw new ApiError(response.status, parsed);
    return parsed as T;
  }

  getPatient(id: string): Promise<{ patient: PatientRecord; version: number }> {
    return this.request("GET", `/patients/${encodeURIComponent(id)}`);
  }

  getAnalysis(patientId: string): Promise<AnalysisReport> {
    return this.request("GET", `/patients/${encodeURIComponent(patientId)}/analysis`);
  }

  getTrialModeReport(arm: "with" | "without", patientId: string): Promise<Partial<AnalysisReport>> {
    return this.request(
      "GET",
      `/trial/mode/${arm}?patient_id=${encodeURIComponent(patientId)}`,
    );
  }

  createSession(patientId: string): Promise<ReviewSession> {
    return this.request("POST", "/sessions", { patient_id: patientId });
  }

  addIntervention(sessionId: string, intervention: Intervention): Promise<ReviewSession> {
    return this.request("POST", `/sessions/${sessionId}/interventions`, intervention);
  }

  removeLastIntervention(sessionId: string): Promise<ReviewSession> {
    return this.request("DELETE", `/sessions/${sessionId}/interventions/last`);
  }

  getComparison(sessionId: string): Promise<ComparisonReport> {
    return this.request("GET", `/sessions/${sessionId}/comparison`);
  }

  finalizeSession(sessionId: string, elapsedSeconds: number): Promise<ReviewSession> {
    return this.request("POST", `/sessions/${sessionId}/finalize`, {
      elapsed_seconds: elapsedSeconds,
    });
  }

  getCaseOrder(group: string): Promise<CaseOrderEntry[]> {
    return this.request("GET", `/trial/groups/${encodeURIComponent(group)}/order`);
  }
}
