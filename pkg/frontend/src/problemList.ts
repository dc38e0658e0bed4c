// STOPP/START tab: detected problems with their triggers and suggestions.

import { el } from "./dom.js";
import type { DetectedProblem, InterventionTemplate } from "./types.js";

export function describeSuggestion(s: InterventionTemplate): string {
  switch (s.action) {
    case "deprescribe":
      return `deprescribe ${s.target_atc}`;
    case "prescribe":
      return `prescribe ${s.target_atc}`;
    case "replace":
      return `replace ${s.target_atc} with ${s.replacement_atc}`;
    case "change_dose":
      return `${s.dose_direction} the dose of ${s.target_atc}`;
    case "lab_test":
      return `order lab test ${s.lab_loinc}`;
  }
}

export function renderProblemItem(problem: DetectedProblem): HTMLElement {
  const item = el(
    "li",
    {
      class: `problem kind-${problem.kind.toLowerCase()} severity-${problem.severity_hint}`,
      "data-rule-id": problem.rule_id,
    },
    [
      el("span", { class: "rule-id" }, [`${problem.rule_id} `]),
      el("span", { class: "problem-text" }, [problem.problem_text]),
      el("div", { class: "suggestion" }, [`Suggestion: ${describeSuggestion(problem.suggestion)}`]),
    ],
  );
  if (problem.trigger_bindings.length > 0) {
    item.append(
      el(
        "div",
        { class: "bindings" },
        [`Triggered by: ${problem.trigger_bindings.map((b) => b.matched).join("; ")}`],
      ),
    );
  }
  return item;
}

export function renderProblemList(problems: DetectedProblem[]): HTMLElement {
  const container = el("div", { class: "problem-list", "data-component": "problem-list" });
  if (problems.length === 0) {
    container.append(el("p", { class: "empty-state" }, ["No screening rule fired."]));
    return container;
  }
  const list = el("ul");
  for (const problem of problems) {
    list.append(renderProblemItem(problem));
  }
  container.append(list);
  return container;
}
