// Dosage tab: one row per assessment, out-of-range rows flagged.

import { el } from "./dom.js";
import type { DosageAssessment } from "./types.js";

const STATUS_LABELS: Record<string, string> = {
  under: "below recommended range",
  within: "within range",
  over: "above recommended range",
  no_rule: "no dosage rule",
  unit_mismatch: "unit mismatch",
};

export function renderDosageTable(assessments: DosageAssessment[]): HTMLElement {
  const container = el("div", { class: "dosage-table", "data-component": "dosage-table" });
  if (assessments.length === 0) {
    container.append(el("p", { class: "empty-state" }, ["No medications on record."]));
    return container;
  }
  const table = el("table");
  const head = el("tr");
  for (const title of ["Drug", "Current dose", "Recommended min", "Recommended max", "Assessment"]) {
    head.append(el("th", {}, [title]));
  }
  table.append(head);
  for (const a of assessments) {
    const flagged = a.status === "over" || a.status === "under";
    const row = el("tr", {
      class: `dosage-row status-${a.status}${flagged ? " flagged" : ""}`,
      "data-atc": a.atc,
      "data-status": a.status,
    });
    row.append(el("td", {}, [a.drug_name ? `${a.drug_name} (${a.atc})` : a.atc]));
    row.append(el("td", {}, [a.current_daily_dose]));
    row.append(el("td", {}, [a.recommended_min ?? "—"]));
    row.append(el("td", {}, [a.recommended_max ?? "—"]));
    const cell = el("td", {}, [STATUS_LABELS[a.status] ?? a.status]);
    if (a.status === "unit_mismatch") {
      cell.prepend(el("span", { class: "warning-marker", title: "dose unit differs from the rule" }, ["⚠ "]));
    }
    row.append(cell);
    table.append(row);
  }
  container.append(table);
  return container;
}
