/**
 * Phase-diagram heatmap: one panel per model, aggregated test MSE over the
 * (P, kappa) grid on log axes, a color scale shared across panels, and
 * hatched cells where no run finished (red tint) or none was attempted
 * (gray tint).
 */

import {
  cellKey,
  heatmapGrid,
  type Aggregation,
  type CellState,
} from "./aggregate.js";
import type { SweepRow } from "./schema.js";
import {
  esc,
  fmtAxis,
  hatchDefs,
  logBandEdges,
  logColorScale,
  MODEL_LABEL,
  openSvg,
  px,
} from "./svgutil.js";

const PLOT_W = 150;
const PLOT_H = 140;
const ML = 64;
const MT = 46;
const GAP = 26;
const BAR_W = 14;
const MB = 74;

export function renderHeatmap(rows: SweepRow[], how: Aggregation): string {
  const grid = heatmapGrid(rows, "test_mse", how);
  const values = [...grid.cells.values()]
    .filter((c): c is Extract<CellState, { kind: "value" }> => c.kind === "value")
    .map((c) => c.value);
  const scale = logColorScale(values);

  const nPanels = grid.models.length;
  const width = ML + nPanels * (PLOT_W + GAP) + BAR_W + 58;
  const height = MT + PLOT_H + MB;

  const xEdges = logBandEdges(grid.Ps);
  const yEdges = logBandEdges(grid.kappas);
  const lx0 = Math.log10(xEdges[0]!);
  const lx1 = Math.log10(xEdges[xEdges.length - 1]!);
  const ly0 = Math.log10(yEdges[0]!);
  const ly1 = Math.log10(yEdges[yEdges.length - 1]!);
  const xOf = (v: number) => ((Math.log10(v) - lx0) / (lx1 - lx0)) * PLOT_W;
  const yOf = (v: number) => PLOT_H - ((Math.log10(v) - ly0) / (ly1 - ly0)) * PLOT_H;

  let s = openSvg(width, height);
  s += hatchDefs();
  s += `<text x="${ML}" y="18" font-size="12" font-weight="600" fill="#222">` +
    `${esc(`Test MSE over sample size and label noise (${how} over seeds)`)}</text>\n`;

  for (let p = 0; p < nPanels; p++) {
    const model = grid.models[p]!;
    const x0 = ML + p * (PLOT_W + GAP);
    s += `<g class="panel" transform="translate(${x0},${MT})">\n`;
    s += `<text x="${px(PLOT_W / 2)}" y="-8" font-size="10" font-weight="600" ` +
      `text-anchor="middle" fill="#333">${esc(MODEL_LABEL[model] ?? model)}</text>\n`;

    for (let i = 0; i < grid.Ps.length; i++) {
      for (let j = 0; j < grid.kappas.length; j++) {
        const cell = grid.cells.get(cellKey(model, grid.Ps[i]!, grid.kappas[j]!))!;
        const rx = xOf(xEdges[i]!);
        const rw = xOf(xEdges[i + 1]!) - rx;
        const ry = yOf(yEdges[j + 1]!);
        const rh = yOf(yEdges[j]!) - ry;
        const fill =
          cell.kind === "value"
            ? scale.color(cell.value)
            : cell.kind === "diverged"
              ? "url(#hatch-diverged)"
              : "url(#hatch-missing)";
        s += `<rect x="${px(rx)}" y="${px(ry)}" width="${px(rw)}" height="${px(rh)}" ` +
          `fill="${fill}" stroke="#ffffff" stroke-width="0.5"/>\n`;
      }
    }

    s += `<rect x="0" y="0" width="${PLOT_W}" height="${PLOT_H}" fill="none" stroke="#888" stroke-width="0.8"/>\n`;

    for (const P of grid.Ps) {
      const x = xOf(P);
      s += `<line x1="${px(x)}" y1="${PLOT_H}" x2="${px(x)}" y2="${PLOT_H + 4}" stroke="#555" stroke-width="0.8"/>\n`;
      s += `<text x="${px(x)}" y="${PLOT_H + 14}" font-size="8" text-anchor="middle" fill="#333">${esc(fmtAxis(P))}</text>\n`;
    }
    s += `<text x="${px(PLOT_W / 2)}" y="${PLOT_H + 28}" font-size="9" text-anchor="middle" fill="#333">P (samples)</text>\n`;

    if (p === 0) {
      for (const kappa of grid.kappas) {
        const y = yOf(kappa);
        s += `<line x1="-4" y1="${px(y)}" x2="0" y2="${px(y)}" stroke="#555" stroke-width="0.8"/>\n`;
        s += `<text x="-7" y="${px(y + 2.5)}" font-size="8" text-anchor="end" fill="#333">${esc(fmtAxis(kappa))}</text>\n`;
      }
      s += `<text transform="translate(${-ML + 14},${px(PLOT_H / 2)}) rotate(-90)" ` +
        `font-size="9" text-anchor="middle" fill="#333">kappa (label noise)</text>\n`;
    }
    s += "</g>\n";
  }

  s += colorbar(scale, ML + nPanels * (PLOT_W + GAP), MT);
  s += legend(ML, MT + PLOT_H + 44);
  s += "</svg>\n";
  return s;
}

function colorbar(
  scale: ReturnType<typeof logColorScale>,
  x0: number,
  y0: number
): string {
  const steps = 64;
  let s = `<g class="colorbar" transform="translate(${x0},${y0})">\n`;
  for (let i = 0; i < steps; i++) {
    // top = small (bright); mirror the cell mapping
    const t = 1 - (i + 0.5) / steps;
    const v = 10 ** (Math.log10(scale.lo) + t * (Math.log10(scale.hi) - Math.log10(scale.lo)));
    const y = (i / steps) * PLOT_H;
    s += `<rect x="0" y="${px(y)}" width="${BAR_W}" height="${px(PLOT_H / steps + 0.5)}" fill="${scale.color(v)}"/>\n`;
  }
  s += `<rect x="0" y="0" width="${BAR_W}" height="${PLOT_H}" fill="none" stroke="#888" stroke-width="0.8"/>\n`;
  for (const tick of [scale.hi, ...logTicksWithin(scale.lo, scale.hi), scale.lo]) {
    const t = (Math.log10(tick) - Math.log10(scale.lo)) / (Math.log10(scale.hi) - Math.log10(scale.lo));
    const y = (1 - t) * PLOT_H;
    s += `<line x1="${BAR_W}" y1="${px(y)}" x2="${BAR_W + 3}" y2="${px(y)}" stroke="#555" stroke-width="0.8"/>\n`;
    s += `<text x="${BAR_W + 6}" y="${px(y + 2.5)}" font-size="8" fill="#333">${esc(fmtAxis(tick))}</text>\n`;
  }
  s += `<text transform="translate(${BAR_W + 44},${px(PLOT_H / 2)}) rotate(-90)" font-size="9" text-anchor="middle" fill="#333">test MSE</text>\n`;
  s += "</g>\n";
  return s;
}

function logTicksWithin(lo: number, hi: number): number[] {
  const out: number[] = [];
  const start = Math.ceil(Math.log10(lo) + 0.05);
  const end = Math.floor(Math.log10(hi) - 0.05);
  for (let e = start; e <= end; e++) out.push(10 ** e);
  return out;
}

function legend(x0: number, y0: number): string {
  let s = `<g class="legend" transform="translate(${x0},${y0})">\n`;
  const entries: [string, string][] = [
    ["url(#hatch-diverged)", "no run finished (diverged or timed out)"],
    ["url(#hatch-missing)", "not in the sweep"],
  ];
  let x = 0;
  for (const [fill, label] of entries) {
    s += `<rect x="${px(x)}" y="0" width="14" height="10" fill="${fill}" stroke="#888" stroke-width="0.6"/>\n`;
    s += `<text x="${px(x + 18)}" y="8.5" font-size="8" fill="#333">${esc(label)}</text>\n`;
    x += 18 + label.length * 4.2 + 22;
  }
  s += "</g>\n";
  return s;
}
