/**
 * Grid assembly: group sweep rows by cell, aggregate over seeds.
 *
 * Only status=ok rows enter an aggregate. A cell whose rows all failed is
 * "diverged" (drawn hatched); a cell with no rows at all is "missing"
 * (also hatched, in a different tone).
 */

import { FigureError, MODELS, type Model, type SweepRow } from "./schema.js";

export type Aggregation = "mean" | "median";
export type ValueKey = "m_S" | "test_mse" | "train_mse";

export function aggregate(values: number[], how: Aggregation): number {
  if (values.length === 0) return NaN;
  if (how === "mean") {
    return values.reduce((s, v) => s + v, 0) / values.length;
  }
  const sorted = [...values].sort((a, b) => a - b);
  const mid = sorted.length >> 1;
  return sorted.length % 2 === 1
    ? sorted[mid]!
    : 0.5 * (sorted[mid - 1]! + sorted[mid]!);
}

export type CellState =
  | { kind: "value"; value: number }
  | { kind: "diverged" }
  | { kind: "missing" };

export interface HeatmapGrid {
  models: Model[];
  Ps: number[];
  kappas: number[];
  /** keyed by `${model}|${P}|${kappa}` */
  cells: Map<string, CellState>;
}

export function cellKey(model: Model, P: number, kappa: number): string {
  return `${model}|${P}|${kappa}`;
}

function sortedUnique(values: number[]): number[] {
  return [...new Set(values)].sort((a, b) => a - b);
}

/** Panel order is fixed so layouts do not depend on row order. */
export function presentModels(rows: SweepRow[]): Model[] {
  const present = new Set(rows.map((r) => r.model));
  return MODELS.filter((m) => present.has(m));
}

export function heatmapGrid(
  rows: SweepRow[],
  value: ValueKey,
  how: Aggregation
): HeatmapGrid {
  const models = presentModels(rows);
  const Ps = sortedUnique(rows.map((r) => r.P));
  const kappas = sortedUnique(rows.map((r) => r.kappa));

  const ok = new Map<string, number[]>();
  const attempted = new Set<string>();
  for (const r of rows) {
    const key = cellKey(r.model, r.P, r.kappa);
    attempted.add(key);
    if (r.status !== "ok" || Number.isNaN(r[value])) continue;
    const bucket = ok.get(key);
    if (bucket) bucket.push(r[value]);
    else ok.set(key, [r[value]]);
  }

  const cells = new Map<string, CellState>();
  let any = false;
  for (const model of models) {
    for (const P of Ps) {
      for (const kappa of kappas) {
        const key = cellKey(model, P, kappa);
        const values = ok.get(key);
        if (values && values.length > 0) {
          cells.set(key, { kind: "value", value: aggregate(values, how) });
          any = true;
        } else if (attempted.has(key)) {
          cells.set(key, { kind: "diverged" });
        } else {
          cells.set(key, { kind: "missing" });
        }
      }
    }
  }
  if (!any) {
    throw new FigureError("no ok rows left after filtering; nothing to plot");
  }
  return { models, Ps, kappas, cells };
}

export interface Series {
  model: Model;
  kappa: number;
  /** x = P ascending; cells without ok rows are simply absent */
  points: { x: number; y: number }[];
}

/** One series per (model, kappa), aggregated over seeds, ordered by P. */
export function seriesOverP(
  rows: SweepRow[],
  value: ValueKey,
  how: Aggregation
): Series[] {
  const grid = heatmapGrid(rows, value, how);
  const out: Series[] = [];
  for (const model of grid.models) {
    for (const kappa of grid.kappas) {
      const points: { x: number; y: number }[] = [];
      for (const P of grid.Ps) {
        const cell = grid.cells.get(cellKey(model, P, kappa))!;
        if (cell.kind === "value") points.push({ x: P, y: cell.value });
      }
      if (points.length > 0) out.push({ model, kappa, points });
    }
  }
  return out;
}

/** Collapse the grid onto one axis: aggregate over seeds and the other axis. */
export function marginalOver(
  rows: SweepRow[],
  axis: "P" | "kappa",
  value: ValueKey,
  how: Aggregation
): Series[] {
  const models = presentModels(rows);
  const xs = sortedUnique(rows.map((r) => (axis === "P" ? r.P : r.kappa)));
  const out: Series[] = [];
  let any = false;
  for (const model of models) {
    const points: { x: number; y: number }[] = [];
    for (const x of xs) {
      const values = rows
        .filter(
          (r) =>
            r.model === model &&
            (axis === "P" ? r.P : r.kappa) === x &&
            r.status === "ok" &&
            !Number.isNaN(r[value])
        )
        .map((r) => r[value]);
      if (values.length > 0) {
        points.push({ x, y: aggregate(values, how) });
        any = true;
      }
    }
    out.push({ model, kappa: NaN, points });
  }
  if (!any) {
    throw new FigureError("no ok rows left after filtering; nothing to plot");
  }
  return out;
}
