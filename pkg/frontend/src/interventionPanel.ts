// Intervention entry plus the live what-if loop: every mutation of the
// intervention list re-fetches the comparison and re-renders it in place,
// so the pharmacist immediately sees problems move between the resolved /
// persisting / new lists.

import type { ApiClient } from "./api.js";
import { mountComparison } from "./comparisonView.js";
import { clear, el } from "./dom.js";
import type { Intervention, ReviewSession } from "./types.js";

const ACTION_FIELDS: Record<Intervention["action"], string[]> = {
  deprescribe: ["target_atc"],
  prescribe: ["target_atc", "new_daily_dose"],
  replace: ["target_atc", "new_atc", "new_daily_dose"],
  change_dose: ["target_atc", "new_daily_dose"],
  lab_test: ["lab_loinc"],
};

export class InterventionPanel {
  readonly root: HTMLElement;
  private api: ApiClient;
  private session: ReviewSession;
  private listHost: HTMLElement;
  private comparisonHost: HTMLElement;
  private errorHost: HTMLElement;
  private form: HTMLFormElement;
  private refreshing: Promise<void> = Promise.resolve();

  constructor(api: ApiClient, session: ReviewSession) {
    this.api = api;
    this.session = session;
    this.root = el("div", { class: "intervention-panel", "data-component": "intervention-panel" });
    this.errorHost = el("div", { class: "api-errors", "data-role": "api-errors" });
    this.form = this.buildForm();
    this.listHost = el("ul", { class: "intervention-list", "data-role": "intervention-list" }) as HTMLUListElement;
    this.comparisonHost = el("div", { class: "comparison-host", "data-role": "comparison-host" });
    const undo = el("button", { type: "button", "data-role": "undo" }, ["Remove last intervention"]);
    undo.addEventListener("click", () => void this.removeLast());
    this.root.append(this.form, this.errorHost, this.listHost, undo, this.comparisonHost);
    this.renderInterventions();
  }

  /** Resolves when the last triggered refresh has completed (for tests). */
  settled(): Promise<void> {
    return this.refreshing;
  }

  private buildForm(): HTMLFormElement {
    const form = el("form", { class: "intervention-form", "data-role": "intervention-form" });
    const action = el("select", { name: "action", "data-role": "action" }) as HTMLSelectElement;
    for (const value of Object.keys(ACTION_FIELDS)) {
      action.append(el("option", { value }, [value.replace("_", " ")]));
    }
    const fields: Record<string, HTMLInputElement> = {
      target_atc: el("input", { name: "target_atc", placeholder: "target ATC" }) as HTMLInputElement,
      new_atc: el("input", { name: "new_atc", placeholder: "replacement ATC" }) as HTMLInputElement,
      new_daily_dose: el("input", { name: "new_daily_dose", placeholder: "dose, e.g. 20 mg/day" }) as HTMLInputElement,
      lab_loinc: el("input", { name: "lab_loinc", placeholder: "LOINC" }) as HTMLInputElement,
      free_comment: el("input", { name: "free_comment", placeholder: "comment" }) as HTMLInputElement,
    };
    const sync = () => {
      const needed = ACTION_FIELDS[action.value as Intervention["action"]];
      for (const [name, input] of Object.entries(fields)) {
        const required = needed.includes(name);
        input.required = required;
        input.toggleAttribute("hidden", !(required || name === "free_comment"));
      }
    };
    action.addEventListener("change", sync);
    form.append(action, ...Object.values(fields));
    form.append(el("button", { type: "submit" }, ["Add intervention"]));
    sync();
    form.addEventListener("submit", (event) => {
      event.preventDefault();
      const intervention = this.readForm(action, fields);
      if (intervention) void this.add(intervention);
    });
    return form;
  }

  private readForm(
    action: HTMLSelectElement,
    fields: Record<string, HTMLInputElement>,
  ): Intervention | null {
    const intervention: Intervention = { action: action.value as Intervention["action"] };
    if (fields.target_atc.value) intervention.target_atc = fields.target_atc.value.trim();
    if (fields.new_atc.value) intervention.new_atc = fields.new_atc.value.trim();
    if (fields.lab_loinc.value) intervention.lab_loinc = fields.lab_loinc.value.trim();
    if (fields.free_comment.value) intervention.free_comment = fields.free_comment.value;
    if (fields.new_daily_dose.value) {
      const match = fields.new_daily_dose.value.trim().match(/^([\d.]+)\s*(.+)$/);
      if (!match) {
        this.showError('dose must look like "20 mg/day"');
        return null;
      }
      intervention.new_daily_dose = { value: Number(match[1]), unit: match[2] };
    }
    return intervention;
  }

  async add(intervention: Intervention): Promise<void> {
    const task = (async () => {
      try {
        this.session = await this.api.addIntervention(this.session.session_id, intervention);
        this.clearError();
        this.renderInterventions();
        await this.refreshComparison();
      } catch (error) {
        this.showError(String((error as Error).message));
      }
    })();
    this.refreshing = task;
    return task;
  }

  async removeLast(): Promise<void> {
    const task = (async () => {
      try {
        this.session = await this.api.removeLastIntervention(this.session.session_id);
        this.clearError();
        this.renderInterventions();
        await this.refreshComparison();
      } catch (error) {
        this.showError(String((error as Error).message));
      }
    })();
    this.refreshing = task;
    return task;
  }

  async refreshComparison(): Promise<void> {
    const report = await this.api.getComparison(this.session.session_id);
    mountComparison(this.comparisonHost, report);
  }

  private renderInterventions(): void {
    clear(this.listHost);
    this.session.interventions.forEach((iv, index) => {
      const parts: string[] = [iv.action];
      if (iv.target_atc) parts.push(iv.target_atc);
      if (iv.new_atc) parts.push(`→ ${iv.new_atc}`);
      if (iv.new_daily_dose) parts.push(`${iv.new_daily_dose.value} ${iv.new_daily_dose.unit}`);
      if (iv.lab_loinc) parts.push(iv.lab_loinc);
      this.listHost.append(
        el("li", { "data-index": String(index) }, [parts.join(" ")]),
      );
    });
  }

  private showError(message: string): void {
    clear(this.errorHost);
    this.errorHost.append(el("p", { class: "error" }, [message]));
  }

  private clearError(): void {
    clear(this.errorHost);
  }
}
