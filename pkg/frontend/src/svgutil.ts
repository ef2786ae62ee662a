/**
 * Deterministic SVG building blocks: numeric formatting, log ticks, the
 * shared color scale, and hatch pattern defs. Every helper is a pure
 * function of its arguments so rendered bytes depend only on the inputs.
 */

import { interpolateViridis } from "d3-scale-chromatic";

export function esc(s: string): string {
  return s.replace(/&/g, "&amp;").replace(/</g, "&lt;").replace(/>/g, "&gt;");
}

/** Fixed-precision coordinate: SVG output must not depend on float noise. */
export function px(v: number): string {
  return v.toFixed(2);
}

/** Compact axis label: plain decimal in a sane range, exponent outside it. */
export function fmtAxis(v: number): string {
  if (v === 0) return "0";
  const a = Math.abs(v);
  if (a >= 1e-4 && a < 1e5) {
    return String(Number(v.toPrecision(6)));
  }
  const e = v.toExponential(2);
  return e.replace(/\.?0+e/, "e").replace("e+", "e");
}

/** Powers of ten inside [lo, hi]; falls back to the endpoints if none fit. */
export function logTicks(lo: number, hi: number): number[] {
  const ticks: number[] = [];
  const start = Math.ceil(Math.log10(lo) - 1e-9);
  const end = Math.floor(Math.log10(hi) + 1e-9);
  for (let e = start; e <= end; e++) ticks.push(10 ** e);
  if (ticks.length >= 2) return ticks;
  return [lo, hi];
}

/**
 * Cell edges for a log-positioned band per grid value: interior edges at
 * geometric midpoints, end edges mirrored (a lone value gets a fixed
 * half-decade band so a one-row grid still fills its panel).
 */
export function logBandEdges(values: number[]): number[] {
  const n = values.length;
  if (n === 1) {
    const v = values[0]!;
    return [v / 10 ** 0.25, v * 10 ** 0.25];
  }
  const edges: number[] = new Array(n + 1);
  for (let i = 1; i < n; i++) {
    edges[i] = Math.sqrt(values[i - 1]! * values[i]!);
  }
  edges[0] = (values[0]! * values[0]!) / edges[1]!;
  edges[n] = (values[n - 1]! * values[n - 1]!) / edges[n - 1]!;
  return edges;
}

export interface LogColorScale {
  lo: number;
  hi: number;
  color(v: number): string;
}

/**
 * Shared log color scale: bright for small values, dark for large ones.
 * Non-positive values clamp to the low end (test MSE can hit exact zero).
 */
export function logColorScale(values: number[]): LogColorScale {
  const positive = values.filter((v) => v > 0 && Number.isFinite(v));
  let lo = positive.length ? Math.min(...positive) : 1e-12;
  let hi = positive.length ? Math.max(...positive) : 1;
  if (lo === hi) {
    lo /= 10;
    hi *= 10;
  }
  const span = Math.log10(hi) - Math.log10(lo);
  return {
    lo,
    hi,
    color(v: number): string {
      const clamped = Math.min(Math.max(v, lo), hi);
      const t = (Math.log10(clamped) - Math.log10(lo)) / span;
      return interpolateViridis(1 - t);
    },
  };
}

export const MODEL_LABEL: Record<string, string> = {
  sgld: "SGLD",
  mf: "MF",
  mf_ard: "MF-ARD",
  nngp: "NNGP",
  theory: "Theory",
};

export const MODEL_COLOR: Record<string, string> = {
  sgld: "#d1495b",
  mf: "#3a7ca5",
  mf_ard: "#1b512d",
  nngp: "#8f6b2e",
  theory: "#555555",
};

export const DASHES = ["", "6,3", "2,2", "8,2,2,2", "4,4"] as const;

/** Hatch patterns for cells with nothing to aggregate. */
export function hatchDefs(): string {
  const stripe = (id: string, stroke: string) =>
    `<pattern id="${id}" width="6" height="6" patternUnits="userSpaceOnUse" patternTransform="rotate(45)">` +
    `<rect width="6" height="6" fill="#f4f4f4"/>` +
    `<line x1="0" y1="0" x2="0" y2="6" stroke="${stroke}" stroke-width="1.6"/>` +
    `</pattern>`;
  return (
    "<defs>" +
    stripe("hatch-diverged", "#c0392b") +
    stripe("hatch-missing", "#b0b0b0") +
    "</defs>\n"
  );
}

export function openSvg(width: number, height: number): string {
  return (
    `<svg xmlns="http://www.w3.org/2000/svg" viewBox="0 0 ${width} ${height}" ` +
    `width="${width}" height="${height}" font-family="Helvetica, Arial, sans-serif">\n` +
    `<rect width="${width}" height="${height}" fill="#ffffff"/>\n`
  );
}
