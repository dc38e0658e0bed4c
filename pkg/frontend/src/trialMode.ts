// Trial mode: walks a pharmacist through the four passages of their group
// (two control cases without decision support, then two with), tracking
// active time per case and submitting it with the finalized session.

import type { ApiClient } from "./api.js";
import { clear, el } from "./dom.js";
import { ActiveTimer } from "./timer.js";
import type { AnalysisReport, CaseOrderEntry } from "./types.js";
import { Workbench } from "./workbench.js";

export class TrialMode {
  readonly root: HTMLElement;
  private api: ApiClient;
  private order: CaseOrderEntry[] = [];
  private position = 0;
  private timer: ActiveTimer | null = null;
  private windowRef: Window;
  private currentSessionId: string | null = null;
  workbench: Workbench | null = null;

  constructor(api: ApiClient, windowRef: Window = window) {
    this.api = api;
    this.windowRef = windowRef;
    this.root = el("div", { class: "trial-mode", "data-component": "trial-mode" });
  }

  async start(group: string): Promise<void> {
    this.order = await this.api.getCaseOrder(group);
    this.position = 0;
    await this.loadCurrentCase();
  }

  entry(): CaseOrderEntry {
    return this.order[this.position];
  }

  elapsedSeconds(): number {
    return this.timer ? this.timer.elapsedSeconds() : 0;
  }

  private async loadCurrentCase(): Promise<void> {
    const { case_id, arm, passage } = this.entry();
    const patientId = `case-${case_id}`;
    const { patient } = await this.api.getPatient(patientId);
    // the control interface never receives the decision-support payload
    const report =
      arm === "with" ? ((await this.api.getTrialModeReport("with", patientId)) as AnalysisReport) : null;
    const session = await this.api.createSession(patientId);
    this.currentSessionId = session.session_id;

    this.timer?.stop();
    this.timer = new ActiveTimer();
    this.timer.attach(this.windowRef);
    this.timer.start();

    this.workbench = new Workbench({ arm, patient, report, api: this.api, session });
    clear(this.root);
    const header = el("header", { class: "trial-header" }, [
      el("span", { class: "passage", "data-role": "passage" }, [`Case ${passage} of ${this.order.length}`]),
      el("span", { class: "arm-label", "data-role": "arm" }, [
        arm === "with" ? "with decision support" : "without decision support",
      ]),
    ]);
    const submit = el("button", { type: "button", "data-role": "submit-case" }, [
      "Submit this review",
    ]);
    submit.addEventListener("click", () => void this.submitCurrent());
    this.root.append(header, this.workbench.root, submit);
  }

  async submitCurrent(): Promise<void> {
    if (!this.currentSessionId || !this.timer) return;
    this.timer.stop();
    await this.api.finalizeSession(this.currentSessionId, this.timer.elapsedSeconds());
    this.position += 1;
    if (this.position < this.order.length) {
      await this.loadCurrentCase();
    } else {
      clear(this.root);
      this.root.append(
        el("p", { class: "trial-done", "data-role": "trial-done" }, [
          "All four reviews submitted. Thank you.",
        ]),
      );
    }
  }
}
