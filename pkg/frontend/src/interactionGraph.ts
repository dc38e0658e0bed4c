// Radial interaction view: prescribed drugs on a circle in canonical ATC
// order, one chord per resolved interaction, chord weight and color by
// severity level; the mechanism text is exposed on hover via <title>.

import { svgEl } from "./dom.js";
import type { GraphEdge, GraphNode } from "./types.js";

const SIZE = 320;
const CENTER = SIZE / 2;
const RADIUS = 120;

const SEVERITY_STYLE: Record<number, { color: string; width: number }> = {
  1: { color: "#9aa5b1", width: 1.5 },
  2: { color: "#e6b85c", width: 2.5 },
  3: { color: "#e07a3f", width: 4 },
  4: { color: "#c03434", width: 6 },
};

export function nodePosition(index: number, count: number): { x: number; y: number } {
  const angle = (2 * Math.PI * index) / Math.max(count, 1) - Math.PI / 2;
  return {
    x: CENTER + RADIUS * Math.cos(angle),
    y: CENTER + RADIUS * Math.sin(angle),
  };
}

export function renderInteractionGraph(nodes: GraphNode[], edges: GraphEdge[]): SVGElement {
  const svg = svgEl("svg", {
    viewBox: `0 0 ${SIZE} ${SIZE}`,
    width: String(SIZE),
    height: String(SIZE),
    "data-component": "interaction-graph",
  });
  const ordered = [...nodes].sort((a, b) => a.atc.localeCompare(b.atc));
  const positions = new Map<string, { x: number; y: number }>();
  ordered.forEach((node, index) => {
    positions.set(node.atc, nodePosition(index, ordered.length));
  });

  for (const edge of edges) {
    const a = positions.get(edge.drug_a);
    const b = positions.get(edge.drug_b);
    if (!a || !b) continue;
    const style = SEVERITY_STYLE[edge.severity_level] ?? SEVERITY_STYLE[1];
    const chord = svgEl("path", {
      d: `M ${a.x.toFixed(2)} ${a.y.toFixed(2)} Q ${CENTER} ${CENTER} ${b.x.toFixed(2)} ${b.y.toFixed(2)}`,
      stroke: style.color,
      "stroke-width": String(style.width),
      fill: "none",
      "data-role": "chord",
      "data-severity": String(edge.severity_level),
      "data-pair": `${edge.drug_a}:${edge.drug_b}`,
      class: edge.severity_level === 4 ? "chord contraindicated" : "chord",
    });
    const title = svgEl("title");
    title.textContent = edge.mechanism;
    chord.append(title);
    svg.append(chord);
  }

  ordered.forEach((node) => {
    const pos = positions.get(node.atc)!;
    const dot = svgEl("circle", {
      cx: pos.x.toFixed(2),
      cy: pos.y.toFixed(2),
      r: "7",
      fill: "#3b6ea5",
      "data-role": "drug-node",
      "data-atc": node.atc,
    });
    const title = svgEl("title");
    title.textContent = node.name ? `${node.name} (${node.atc})` : node.atc;
    dot.append(title);
    svg.append(dot);
    const labelOffset = pos.y < CENTER ? -12 : 18;
    const label = svgEl("text", {
      x: pos.x.toFixed(2),
      y: (pos.y + labelOffset).toFixed(2),
      "text-anchor": "middle",
      "font-size": "10",
    });
    label.textContent = node.name ?? node.atc;
    svg.append(label);
  });
  return svg;
}
