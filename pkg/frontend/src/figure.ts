/**
 * FigureSpec and the render entry point: read CSVs, validate, dispatch to
 * a kind-specific SVG builder, write the file. Rendering is a pure
 * function of the CSV bytes and the spec, so identical inputs give
 * byte-identical SVGs.
 */

import { readFile, writeFile } from "node:fs/promises";

import type { Aggregation } from "./aggregate.js";
import {
  renderLearningCurve,
  renderMarginals,
  renderSpecializationHist,
} from "./curves.js";
import { renderHeatmap } from "./heatmap.js";
import { FigureError, parseSweepCsv, type SweepRow } from "./schema.js";

export const KINDS = [
  "heatmap",
  "learning_curve",
  "marginals",
  "specialization_hist",
] as const;

export type FigureKind = (typeof KINDS)[number];

export interface FigureSpec {
  csvPaths: string[];
  kind: FigureKind;
  aggregation: Aggregation;
  out: string;
}

export function renderSvg(rows: SweepRow[], kind: FigureKind, how: Aggregation): string {
  switch (kind) {
    case "heatmap":
      return renderHeatmap(rows, how);
    case "learning_curve":
      return renderLearningCurve(rows, how);
    case "marginals":
      return renderMarginals(rows, how);
    case "specialization_hist":
      return renderSpecializationHist(rows, how);
  }
}

export async function loadRows(csvPaths: string[]): Promise<SweepRow[]> {
  if (csvPaths.length === 0) {
    throw new FigureError("at least one --csv path is required");
  }
  const rows: SweepRow[] = [];
  for (const path of csvPaths) {
    let text: string;
    try {
      text = await readFile(path, "utf-8");
    } catch (err) {
      throw new FigureError(`cannot read '${path}': ${(err as Error).message}`);
    }
    rows.push(...parseSweepCsv(text, path));
  }
  if (rows.length === 0) {
    throw new FigureError("the CSVs contain a header but no rows");
  }
  return rows;
}

export async function render(spec: FigureSpec): Promise<void> {
  const rows = await loadRows(spec.csvPaths);
  const svg = renderSvg(rows, spec.kind, spec.aggregation);
  await writeFile(spec.out, svg, "utf-8");
}
