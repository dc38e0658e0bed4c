// Adverse-effect flower glyph: one petal per effect category, petal length
// strictly proportional to the combined probability, color by max severity.
// Zero-probability categories are not drawn. Petal order is the (already
// lexicographic) category order of the report.

import { svgEl } from "./dom.js";
import type { EffectCategory } from "./types.js";

export const MAX_PETAL_LENGTH = 80;
const CENTER = 100;

const SEVERITY_COLORS: Record<number, string> = {
  1: "#7fb069",
  2: "#e6b85c",
  3: "#e07a3f",
  4: "#c03434",
};

export function petalLength(combinedProbability: number): number {
  return combinedProbability * MAX_PETAL_LENGTH;
}

export function renderFlowerGlyph(categories: EffectCategory[]): SVGElement {
  const svg = svgEl("svg", {
    viewBox: "0 0 200 200",
    width: "200",
    height: "200",
    "data-component": "flower-glyph",
  });
  const visible = categories.filter((c) => c.combined_probability > 0);
  const step = (2 * Math.PI) / Math.max(visible.length, 1);
  visible.forEach((category, index) => {
    const angle = index * step - Math.PI / 2;
    const length = petalLength(category.combined_probability);
    const tipX = CENTER + length * Math.cos(angle);
    const tipY = CENTER + length * Math.sin(angle);
    const halfWidth = Math.min(12, (length / 2) * Math.tan(step / 4) + 4);
    const leftX = CENTER + halfWidth * Math.cos(angle + Math.PI / 2);
    const leftY = CENTER + halfWidth * Math.sin(angle + Math.PI / 2);
    const rightX = CENTER + halfWidth * Math.cos(angle - Math.PI / 2);
    const rightY = CENTER + halfWidth * Math.sin(angle - Math.PI / 2);
    const petal = svgEl("path", {
      d: `M ${leftX.toFixed(2)} ${leftY.toFixed(2)} Q ${tipX.toFixed(2)} ${tipY.toFixed(2)} ${rightX.toFixed(2)} ${rightY.toFixed(2)} Z`,
      fill: SEVERITY_COLORS[category.max_severity] ?? SEVERITY_COLORS[1],
      "data-role": "petal",
      "data-category": category.category,
      "data-length": length.toFixed(4),
      "data-severity": String(category.max_severity),
    });
    const title = svgEl("title");
    title.textContent = `${category.category}: ${(category.combined_probability * 100).toFixed(1)}%`;
    petal.append(title);
    svg.append(petal);
  });
  svg.append(svgEl("circle", { cx: String(CENTER), cy: String(CENTER), r: "6", fill: "#444" }));
  return svg;
}
