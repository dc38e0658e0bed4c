// Entry point. Query parameters pick the mode:
//   ?patient=case-A            free review of one patient (full interface)
//   ?patient=case-A&arm=without   control interface
//   ?group=G2                  trial mode: the group's four passages

import { ApiClient } from "./api.js";
import { el } from "./dom.js";
import { TrialMode } from "./trialMode.js";
import type { AnalysisReport, Arm } from "./types.js";
import { Workbench } from "./workbench.js";

async function boot(): Promise<void> {
  const host = document.getElementById("app");
  if (!host) return;
  const params = new URLSearchParams(window.location.search);
  const api = new ApiClient(params.get("api") ?? "");

  try {
    const group = params.get("group");
    if (group) {
      const trial = new TrialMode(api);
      host.append(trial.root);
      await trial.start(group);
      return;
    }
    const patientId = params.get("patient") ?? "case-A";
    const arm = (params.get("arm") ?? "with") as Arm;
    const { patient } = await api.getPatient(patientId);
    const report = arm === "with" ? await api.getAnalysis(patientId) : null;
    const session = await api.createSession(patientId);
    const workbench = new Workbench({
      arm,
      patient,
      report: report as AnalysisReport | null,
      api,
      session,
    });
    host.append(workbench.root);
  } catch (error) {
    host.append(el("p", { class: "error" }, [`Failed to load: ${(error as Error).message}`]));
  }
}

void boot();
