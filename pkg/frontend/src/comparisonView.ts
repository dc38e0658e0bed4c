// Before/after comparison: three problem lists, new problems visually
// prominent, plus the interaction and dosage deltas.

import { clear, el } from "./dom.js";
import { renderProblemItem } from "./problemList.js";
import type { ComparisonReport, DetectedProblem } from "./types.js";

function problemGroup(
  label: string,
  role: string,
  problems: DetectedProblem[],
  prominent = false,
): HTMLElement {
  const group = el("section", {
    class: `comparison-group ${role}${prominent ? " prominent" : ""}`,
    "data-role": role,
  });
  group.append(el("h3", {}, [`${label} (${problems.length})`]));
  const list = el("ul");
  for (const problem of problems) list.append(renderProblemItem(problem));
  group.append(list);
  return group;
}

export function renderComparison(report: ComparisonReport): HTMLElement {
  const container = el("div", { class: "comparison-view", "data-component": "comparison-view" });
  container.append(
    problemGroup("New problems", "problems-new", report.problems_new, true),
    problemGroup("Resolved", "problems-resolved", report.problems_resolved),
    problemGroup("Persisting", "problems-persisting", report.problems_persisting),
  );

  const deltas = el("section", { class: "deltas" });
  if (report.interactions_added.length > 0) {
    deltas.append(
      el("p", { class: "delta interactions-added" }, [
        `Interactions added: ${report.interactions_added
          .map((e) => `${e.drug_a}–${e.drug_b} (level ${e.severity_level})`)
          .join(", ")}`,
      ]),
    );
  }
  if (report.interactions_removed.length > 0) {
    deltas.append(
      el("p", { class: "delta interactions-removed" }, [
        `Interactions removed: ${report.interactions_removed
          .map((e) => `${e.drug_a}–${e.drug_b}`)
          .join(", ")}`,
      ]),
    );
  }
  for (const d of report.dosage_deltas) {
    deltas.append(
      el("p", { class: "delta dosage" }, [
        `${d.atc}: ${d.before ?? "not prescribed"} → ${d.after ?? "not prescribed"}`,
      ]),
    );
  }
  if (deltas.childNodes.length > 0) container.append(deltas);
  return container;
}

export function mountComparison(host: HTMLElement, report: ComparisonReport): void {
  clear(host);
  host.append(renderComparison(report));
}
