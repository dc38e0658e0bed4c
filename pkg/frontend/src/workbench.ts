// The review workbench: a tab bar over the case views. Arm gating is
// structural: in the "without" arm the four decision-support tabs (dosage,
// effects, interactions, detected problems) are never created, so their
// components cannot leak into the DOM.

import type { ApiClient } from "./api.js";
import { clear, el } from "./dom.js";
import { renderDosageTable } from "./dosageTable.js";
import { renderFlowerGlyph } from "./flowerGlyph.js";
import { renderInteractionGraph } from "./interactionGraph.js";
import { InterventionPanel } from "./interventionPanel.js";
import { renderCasePresentation, renderInterview, renderPatientData } from "./patientTabs.js";
import { renderProblemList } from "./problemList.js";
import type { AnalysisReport, Arm, PatientRecord, ReviewSession } from "./types.js";

export interface TabSpec {
  id: string;
  label: string;
  decisionSupport: boolean;
  render: () => HTMLElement;
}

export interface WorkbenchOptions {
  arm: Arm;
  patient: PatientRecord;
  report: AnalysisReport | null; // null in the "without" arm
  api: ApiClient;
  session: ReviewSession;
}

export class Workbench {
  readonly root: HTMLElement;
  readonly interventionPanel: InterventionPanel;
  private tabButtons = new Map<string, HTMLButtonElement>();
  private panelHost: HTMLElement;
  private tabs: TabSpec[];
  private active = "";

  constructor(options: WorkbenchOptions) {
    this.interventionPanel = new InterventionPanel(options.api, options.session);
    this.tabs = buildTabs(options, this.interventionPanel);
    this.root = el("div", { class: `workbench arm-${options.arm}`, "data-component": "workbench" });
    const bar = el("nav", { class: "tab-bar", role: "tablist" });
    for (const tab of this.tabs) {
      const button = el(
        "button",
        { class: "tab", role: "tab", "data-tab": tab.id, type: "button" },
        [tab.label],
      ) as HTMLButtonElement;
      button.addEventListener("click", () => this.show(tab.id));
      this.tabButtons.set(tab.id, button);
      bar.append(button);
    }
    this.panelHost = el("main", { class: "tab-panel", role: "tabpanel" });
    this.root.append(bar, this.panelHost);
    this.show(this.tabs[0].id);
  }

  tabIds(): string[] {
    return this.tabs.map((t) => t.id);
  }

  show(tabId: string): void {
    const tab = this.tabs.find((t) => t.id === tabId);
    if (!tab) return;
    this.active = tabId;
    for (const [id, button] of this.tabButtons) {
      button.classList.toggle("active", id === tabId);
    }
    clear(this.panelHost);
    this.panelHost.append(tab.render());
  }

  activeTab(): string {
    return this.active;
  }
}

function buildTabs(options: WorkbenchOptions, panel: InterventionPanel): TabSpec[] {
  const { arm, patient, report } = options;
  const tabs: TabSpec[] = [
    {
      id: "case_presentation",
      label: "Case",
      decisionSupport: false,
      render: () => renderCasePresentation(patient),
    },
    {
      id: "patient_data",
      label: "Patient data",
      decisionSupport: false,
      render: () => renderPatientData(patient),
    },
    {
      id: "interview",
      label: "Interview",
      decisionSupport: false,
      render: () => renderInterview(patient),
    },
  ];
  if (arm === "with" && report) {
    tabs.push(
      {
        id: "dosage",
        label: "Dosages",
        decisionSupport: true,
        render: () => renderDosageTable(report.dosages),
      },
      {
        id: "effects",
        label: "Adverse effects",
        decisionSupport: true,
        render: () => {
          const host = el("div", { class: "effects-tab" });
          host.append(renderFlowerGlyph(report.effects.categories));
          return host;
        },
      },
      {
        id: "interactions",
        label: "Interactions",
        decisionSupport: true,
        render: () => {
          const host = el("div", { class: "interactions-tab" });
          host.append(renderInteractionGraph(report.interactions.nodes, report.interactions.edges));
          return host;
        },
      },
      {
        id: "stoppstart",
        label: "Detected problems",
        decisionSupport: true,
        render: () => renderProblemList(report.problems),
      },
    );
  }
  tabs.push({
    id: "interventions",
    label: "Interventions",
    decisionSupport: false,
    render: () => panel.root,
  });
  return tabs;
}
