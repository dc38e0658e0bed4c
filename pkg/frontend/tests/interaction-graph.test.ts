// Rendering contract: one node per prescribed drug on the circle, chord
// count equal to the report's edge count, contraindicated edges get the
// highest-emphasis styling, mechanisms surface on hover.

import { describe, expect, it } from "vitest";

import { nodePosition, renderInteractionGraph } from "../src/interactionGraph.js";
import type { AnalysisReport } from "../src/types.js";
import { fixture } from "./helpers.js";

const reportD = fixture<AnalysisReport>("report_case_d.json");

describe("interaction graph", () => {
  it("chord count equals the report edge count", () => {
    const svg = renderInteractionGraph(reportD.interactions.nodes, reportD.interactions.edges);
    const chords = svg.querySelectorAll('[data-role="chord"]');
    expect(chords.length).toBe(reportD.interactions.edges.length);
    expect(chords.length).toBe(2);
  });

  it("draws every medication as a node, interaction-free ones included", () => {
    const svg = renderInteractionGraph(reportD.interactions.nodes, reportD.interactions.edges);
    const nodes = svg.querySelectorAll('[data-role="drug-node"]');
    expect(nodes.length).toBe(reportD.interactions.nodes.length);
    expect(nodes.length).toBe(5);
  });

  it("one node, no chords", () => {
    const svg = renderInteractionGraph([{ atc: "N02BE01", name: "paracetamol" }], []);
    expect(svg.querySelectorAll('[data-role="drug-node"]').length).toBe(1);
    expect(svg.querySelectorAll('[data-role="chord"]').length).toBe(0);
  });

  it("contraindicated edges get the highest-emphasis class", () => {
    const svg = renderInteractionGraph(reportD.interactions.nodes, reportD.interactions.edges);
    const level4 = reportD.interactions.edges.filter((e) => e.severity_level === 4);
    expect(level4.length).toBeGreaterThan(0);
    const emphasized = svg.querySelectorAll(".chord.contraindicated");
    expect(emphasized.length).toBe(level4.length);
  });

  it("exposes the mechanism as hover text", () => {
    const svg = renderInteractionGraph(reportD.interactions.nodes, reportD.interactions.edges);
    const titles = [...svg.querySelectorAll('[data-role="chord"] title')].map(
      (t) => t.textContent,
    );
    for (const edge of reportD.interactions.edges) {
      expect(titles).toContain(edge.mechanism);
    }
  });

  it("places nodes in canonical ATC order on the circle", () => {
    const svg = renderInteractionGraph(reportD.interactions.nodes, reportD.interactions.edges);
    const atcs = [...svg.querySelectorAll('[data-role="drug-node"]')].map((n) =>
      n.getAttribute("data-atc"),
    );
    expect(atcs).toEqual([...atcs].sort());
    // first node sits at the top of the circle
    const first = nodePosition(0, atcs.length);
    expect(first.y).toBeLessThan(nodePosition(2, atcs.length).y);
  });
});
