// The non-decision-support tabs: case presentation, structured patient
// data, and the interview text.

import { el } from "./dom.js";
import type { PatientRecord } from "./types.js";

export function renderCasePresentation(patient: PatientRecord): HTMLElement {
  const container = el("div", { class: "case-presentation", "data-component": "case-presentation" });
  container.append(el("h2", {}, [`Case ${patient.id}`]));
  const weight = patient.weight_kg ? `, ${patient.weight_kg} kg` : "";
  container.append(
    el("p", {}, [
      `${patient.age}-year-old ${patient.sex} patient${weight}, ` +
        `${patient.medications.length} medications on file, consulting for a medication review.`,
    ]),
  );
  return container;
}

export function renderPatientData(patient: PatientRecord): HTMLElement {
  const container = el("div", { class: "patient-data", "data-component": "patient-data" });

  const meds = el("table", { class: "medications" });
  meds.append(
    el("tr", {}, [el("th", {}, ["ATC"]), el("th", {}, ["Daily dose"]), el("th", {}, ["Duration"]), el("th", {}, ["Indication"])]),
  );
  for (const line of patient.medications) {
    meds.append(
      el("tr", { "data-atc": line.atc }, [
        el("td", {}, [line.atc]),
        el("td", {}, [`${line.daily_dose.value} ${line.daily_dose.unit}`]),
        el("td", {}, [line.duration_days != null ? `${line.duration_days} days` : "—"]),
        el("td", {}, [line.indication ?? "—"]),
      ]),
    );
  }
  container.append(el("h3", {}, ["Medications"]), meds);

  container.append(
    el("h3", {}, ["Conditions"]),
    el("ul", { class: "conditions" }, patient.conditions.map((code) => el("li", {}, [code]))),
  );

  const labs = el("table", { class: "labs" });
  labs.append(
    el("tr", {}, [el("th", {}, ["LOINC"]), el("th", {}, ["Value"]), el("th", {}, ["Observed"])]),
  );
  for (const lab of patient.labs) {
    labs.append(
      el("tr", {}, [
        el("td", {}, [lab.loinc]),
        el("td", {}, [`${lab.value} ${lab.unit}`]),
        el("td", {}, [`${lab.observed_days_ago} days ago`]),
      ]),
    );
  }
  container.append(el("h3", {}, ["Lab results"]), labs);
  return container;
}

export function renderInterview(patient: PatientRecord): HTMLElement {
  const container = el("div", { class: "interview", "data-component": "interview" });
  container.append(
    el("p", {}, [patient.interview ?? "No interview notes recorded."]),
  );
  return container;
}
