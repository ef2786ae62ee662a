/**
 * Line-figure renderers sharing one frame helper:
 *
 *  - learning_curve: overlap and test MSE against sample size, one line
 *    per (model, kappa), seeds aggregated.
 *  - marginals: test MSE against each grid axis with the other axis and
 *    the seeds aggregated away, one line per model.
 *  - specialization_hist: per-model histogram of the per-run overlaps,
 *    showing how runs split between the lazy and the specialized branch.
 */

import {
  marginalOver,
  seriesOverP,
  type Aggregation,
  type Series,
} from "./aggregate.js";
import { FigureError, type SweepRow } from "./schema.js";
import {
  DASHES,
  esc,
  fmtAxis,
  logTicks,
  MODEL_COLOR,
  MODEL_LABEL,
  openSvg,
  px,
} from "./svgutil.js";

const PLOT_W = 220;
const PLOT_H = 160;
const ML = 56;
const MT = 40;
const GAP = 54;

interface Frame {
  xs: number[];
  yLo: number;
  yHi: number;
  logY: boolean;
  xLabel: string;
  yLabel: string;
  title: string;
}

function frameAxes(f: Frame): { body: string; xOf: (v: number) => number; yOf: (v: number) => number } {
  const lx0 = Math.log10(f.xs[0]!);
  const lx1 = Math.log10(f.xs[f.xs.length - 1]!);
  const xOf = (v: number) =>
    lx1 === lx0 ? PLOT_W / 2 : ((Math.log10(v) - lx0) / (lx1 - lx0)) * PLOT_W;
  const yOf = f.logY
    ? (v: number) =>
        PLOT_H -
        ((Math.log10(v) - Math.log10(f.yLo)) /
          (Math.log10(f.yHi) - Math.log10(f.yLo))) *
          PLOT_H
    : (v: number) => PLOT_H - ((v - f.yLo) / (f.yHi - f.yLo)) * PLOT_H;

  let s = "";
  s += `<text x="${px(PLOT_W / 2)}" y="-10" font-size="10" font-weight="600" text-anchor="middle" fill="#333">${esc(f.title)}</text>\n`;
  const yTicks = f.logY
    ? logTicks(f.yLo, f.yHi)
    : [0, 0.25, 0.5, 0.75, 1].map((t) => f.yLo + t * (f.yHi - f.yLo));
  for (const t of yTicks) {
    const y = yOf(t);
    s += `<line x1="0" y1="${px(y)}" x2="${PLOT_W}" y2="${px(y)}" stroke="#eee" stroke-width="0.6"/>\n`;
    s += `<text x="-5" y="${px(y + 2.5)}" font-size="8" text-anchor="end" fill="#333">${esc(fmtAxis(t))}</text>\n`;
  }
  for (const t of f.xs) {
    const x = xOf(t);
    s += `<line x1="${px(x)}" y1="${PLOT_H}" x2="${px(x)}" y2="${PLOT_H + 4}" stroke="#555" stroke-width="0.8"/>\n`;
    s += `<text x="${px(x)}" y="${PLOT_H + 14}" font-size="8" text-anchor="middle" fill="#333">${esc(fmtAxis(t))}</text>\n`;
  }
  s += `<rect x="0" y="0" width="${PLOT_W}" height="${PLOT_H}" fill="none" stroke="#888" stroke-width="0.8"/>\n`;
  s += `<text x="${px(PLOT_W / 2)}" y="${PLOT_H + 28}" font-size="9" text-anchor="middle" fill="#333">${esc(f.xLabel)}</text>\n`;
  s += `<text transform="translate(-38,${px(PLOT_H / 2)}) rotate(-90)" font-size="9" text-anchor="middle" fill="#333">${esc(f.yLabel)}</text>\n`;
  return { body: s, xOf, yOf };
}

function polyline(
  series: Series,
  xOf: (v: number) => number,
  yOf: (v: number) => number,
  clampLo: number,
  dash: string
): string {
  const pts = series.points
    .map((p) => `${px(xOf(p.x))},${px(yOf(Math.max(p.y, clampLo))) }`)
    .join(" ");
  const color = MODEL_COLOR[series.model] ?? "#000";
  const dashAttr = dash ? ` stroke-dasharray="${dash}"` : "";
  let s = `<polyline points="${pts}" fill="none" stroke="${color}" stroke-width="1.4"${dashAttr}/>\n`;
  for (const p of series.points) {
    s += `<circle cx="${px(xOf(p.x))}" cy="${px(yOf(Math.max(p.y, clampLo)))}" r="2" fill="${color}"/>\n`;
  }
  return s;
}

function yRangeLog(series: Series[]): [number, number] {
  const ys = series.flatMap((s) => s.points.map((p) => p.y)).filter((y) => y > 0);
  if (ys.length === 0) return [1e-12, 1];
  let lo = Math.min(...ys);
  let hi = Math.max(...ys);
  if (lo === hi) {
    lo /= 10;
    hi *= 10;
  }
  return [lo, hi];
}

function legendFor(
  labels: { label: string; color: string; dash: string }[],
  x0: number,
  y0: number
): string {
  let s = `<g class="legend" transform="translate(${px(x0)},${px(y0)})">\n`;
  labels.forEach((e, i) => {
    const y = i * 12;
    const dashAttr = e.dash ? ` stroke-dasharray="${e.dash}"` : "";
    s += `<line x1="0" y1="${px(y + 4)}" x2="18" y2="${px(y + 4)}" stroke="${e.color}" stroke-width="1.4"${dashAttr}/>\n`;
    s += `<text x="22" y="${px(y + 7)}" font-size="8" fill="#333">${esc(e.label)}</text>\n`;
  });
  s += "</g>\n";
  return s;
}

export function renderLearningCurve(rows: SweepRow[], how: Aggregation): string {
  const mSeries = seriesOverP(rows, "m_S", how);
  const eSeries = seriesOverP(rows, "test_mse", how);
  if (mSeries.length === 0) {
    throw new FigureError("no ok rows left after filtering; nothing to plot");
  }
  const kappas = [...new Set(mSeries.map((s) => s.kappa))].sort((a, b) => a - b);
  const dashOf = (kappa: number) => DASHES[kappas.indexOf(kappa) % DASHES.length]!;
  const xs = [...new Set(mSeries.flatMap((s) => s.points.map((p) => p.x)))].sort(
    (a, b) => a - b
  );

  const width = ML + 2 * PLOT_W + GAP + 150;
  const height = MT + PLOT_H + 50;
  let s = openSvg(width, height);
  s += `<text x="${ML}" y="16" font-size="12" font-weight="600" fill="#222">` +
    `${esc(`Learning curves (${how} over seeds)`)}</text>\n`;

  const left = frameAxes({
    xs, yLo: 0, yHi: 1.05, logY: false,
    xLabel: "P (samples)", yLabel: "overlap m_S", title: "Parity overlap",
  });
  s += `<g transform="translate(${ML},${MT})">\n${left.body}`;
  for (const ser of mSeries) s += polyline(ser, left.xOf, left.yOf, -Infinity, dashOf(ser.kappa));
  s += "</g>\n";

  const [eLo, eHi] = yRangeLog(eSeries);
  const right = frameAxes({
    xs, yLo: eLo, yHi: eHi, logY: true,
    xLabel: "P (samples)", yLabel: "test MSE", title: "Generalization error",
  });
  s += `<g transform="translate(${ML + PLOT_W + GAP},${MT})">\n${right.body}`;
  for (const ser of eSeries) s += polyline(ser, right.xOf, right.yOf, eLo, dashOf(ser.kappa));
  s += "</g>\n";

  const entries = mSeries.map((ser) => ({
    label: `${MODEL_LABEL[ser.model] ?? ser.model}  kappa=${fmtAxis(ser.kappa)}`,
    color: MODEL_COLOR[ser.model] ?? "#000",
    dash: dashOf(ser.kappa),
  }));
  s += legendFor(entries, ML + 2 * PLOT_W + GAP + 12, MT);
  s += "</svg>\n";
  return s;
}

export function renderMarginals(rows: SweepRow[], how: Aggregation): string {
  const overP = marginalOver(rows, "P", "test_mse", how);
  const overKappa = marginalOver(rows, "kappa", "test_mse", how);

  const width = ML + 2 * PLOT_W + GAP + 120;
  const height = MT + PLOT_H + 50;
  let s = openSvg(width, height);
  s += `<text x="${ML}" y="16" font-size="12" font-weight="600" fill="#222">` +
    `${esc(`Test MSE marginals (${how} over seeds and the other axis)`)}</text>\n`;

  const panels: [Series[], string, string][] = [
    [overP, "P (samples)", "vs sample size"],
    [overKappa, "kappa (label noise)", "vs label noise"],
  ];
  panels.forEach(([series, xLabel, title], i) => {
    const xs = [...new Set(series.flatMap((ser) => ser.points.map((p) => p.x)))].sort(
      (a, b) => a - b
    );
    if (xs.length === 0) return;
    const [lo, hi] = yRangeLog(series);
    const frame = frameAxes({
      xs, yLo: lo, yHi: hi, logY: true,
      xLabel, yLabel: "test MSE", title,
    });
    s += `<g transform="translate(${ML + i * (PLOT_W + GAP)},${MT})">\n${frame.body}`;
    for (const ser of series) {
      if (ser.points.length > 0) s += polyline(ser, frame.xOf, frame.yOf, lo, "");
    }
    s += "</g>\n";
  });

  const models = [...new Set(overP.map((ser) => ser.model))];
  const entries = models.map((m) => ({
    label: MODEL_LABEL[m] ?? m,
    color: MODEL_COLOR[m] ?? "#000",
    dash: "",
  }));
  s += legendFor(entries, ML + 2 * PLOT_W + GAP + 12, MT);
  s += "</svg>\n";
  return s;
}

export function renderSpecializationHist(rows: SweepRow[], how: Aggregation): string {
  void how; // histograms bin raw per-run values; nothing to aggregate
  const ok = rows.filter((r) => r.status === "ok" && !Number.isNaN(r.m_S));
  if (ok.length === 0) {
    throw new FigureError("no ok rows left after filtering; nothing to plot");
  }
  const models = [...new Set(ok.map((r) => r.model))].sort();
  const ordered = ["sgld", "mf", "mf_ard", "nngp", "theory"].filter((m) =>
    models.includes(m as (typeof models)[number])
  );

  const BINS = 20;
  const counts = new Map<string, number[]>();
  for (const m of ordered) counts.set(m, new Array(BINS).fill(0));
  for (const r of ok) {
    const bin = Math.min(BINS - 1, Math.max(0, Math.floor(r.m_S * BINS)));
    const c = counts.get(r.model);
    if (c) c[bin] = (c[bin] ?? 0) + 1;
  }
  const maxCount = Math.max(...[...counts.values()].flat(), 1);

  const PW = 140;
  const PH = 110;
  const width = ML + ordered.length * (PW + 30);
  const height = MT + PH + 46;
  let s = openSvg(width, height);
  s += `<text x="${ML}" y="16" font-size="12" font-weight="600" fill="#222">` +
    `Distribution of per-run parity overlaps</text>\n`;

  ordered.forEach((m, p) => {
    const x0 = ML + p * (PW + 30);
    const c = counts.get(m)!;
    s += `<g transform="translate(${x0},${MT})">\n`;
    s += `<text x="${px(PW / 2)}" y="-8" font-size="10" font-weight="600" text-anchor="middle" fill="#333">${esc(MODEL_LABEL[m] ?? m)}</text>\n`;
    for (let b = 0; b < BINS; b++) {
      const h = (c[b]! / maxCount) * PH;
      const bw = PW / BINS;
      s += `<rect x="${px(b * bw)}" y="${px(PH - h)}" width="${px(bw - 0.6)}" height="${px(h)}" fill="${MODEL_COLOR[m] ?? "#000"}" opacity="0.85"/>\n`;
    }
    s += `<rect x="0" y="0" width="${PW}" height="${PH}" fill="none" stroke="#888" stroke-width="0.8"/>\n`;
    for (const t of [0, 0.5, 1]) {
      const x = t * PW;
      s += `<line x1="${px(x)}" y1="${PH}" x2="${px(x)}" y2="${PH + 4}" stroke="#555" stroke-width="0.8"/>\n`;
      s += `<text x="${px(x)}" y="${PH + 14}" font-size="8" text-anchor="middle" fill="#333">${esc(fmtAxis(t))}</text>\n`;
    }
    s += `<text x="${px(PW / 2)}" y="${PH + 27}" font-size="9" text-anchor="middle" fill="#333">overlap m_S</text>\n`;
    s += "</g>\n";
  });
  s += "</svg>\n";
  return s;
}
