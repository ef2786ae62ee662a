/**
 * Frozen sweep CSV schema (version 1) and its parser.
 *
 * The header's first token is the schema marker; data rows carry the ten
 * remaining columns. Any deviation is reported by column name so a wrong
 * or reordered file fails loudly instead of plotting garbage.
 */

import { z } from "zod";

export const SCHEMA_MARKER = "schema=1";

export const COLUMNS = [
  "model",
  "P",
  "kappa",
  "seed",
  "m_S",
  "test_mse",
  "train_mse",
  "steps_run",
  "wall_seconds",
  "status",
] as const;

export const HEADER = [SCHEMA_MARKER, ...COLUMNS].join(",");

export const MODELS = ["sgld", "mf", "mf_ard", "nngp", "theory"] as const;
export const STATUSES = ["ok", "diverged", "timeout"] as const;

export type Model = (typeof MODELS)[number];
export type Status = (typeof STATUSES)[number];

/** One grid cell result. NaN is legal in the value columns (e.g. train_mse
 * of models that do not train). */
export interface SweepRow {
  model: Model;
  P: number;
  kappa: number;
  seed: number;
  m_S: number;
  test_mse: number;
  train_mse: number;
  steps_run: number;
  wall_seconds: number;
  status: Status;
}

export class FigureError extends Error {}

const finiteOrNan = z.number().or(z.nan());
const positiveInt = z.number().int().positive();

const RowSchema = z.object({
  model: z.enum(MODELS),
  P: positiveInt,
  kappa: z.number().positive(),
  seed: z.number().int().nonnegative(),
  m_S: finiteOrNan,
  test_mse: finiteOrNan,
  train_mse: finiteOrNan,
  steps_run: z.number().int().nonnegative(),
  wall_seconds: finiteOrNan,
  status: z.enum(STATUSES),
});

const NUMERIC: ReadonlySet<string> = new Set([
  "P",
  "kappa",
  "seed",
  "m_S",
  "test_mse",
  "train_mse",
  "steps_run",
  "wall_seconds",
]);

function parseField(column: string, raw: string): string | number {
  if (!NUMERIC.has(column)) return raw;
  if (raw === "nan" || raw === "-nan") return NaN;
  if (raw === "inf") return Infinity;
  if (raw === "-inf") return -Infinity;
  const v = Number(raw);
  if (raw.trim() === "" || Number.isNaN(v)) {
    throw new FigureError(`column '${column}': not a number: '${raw}'`);
  }
  return v;
}

export function checkHeader(line: string, label: string): void {
  const got = line.split(",");
  const want = [SCHEMA_MARKER, ...COLUMNS];
  if (got[0] !== SCHEMA_MARKER) {
    throw new FigureError(
      `${label}: expected leading '${SCHEMA_MARKER}' in the header, got '${got[0] ?? ""}'`
    );
  }
  for (let i = 1; i < want.length; i++) {
    if (got[i] !== want[i]) {
      throw new FigureError(
        `${label}: header column '${want[i]}' is missing or misplaced (got '${got[i] ?? ""}')`
      );
    }
  }
  if (got.length > want.length) {
    throw new FigureError(
      `${label}: unexpected extra header column '${got[want.length]}'`
    );
  }
}

/** Parse one CSV text. `label` names the source in error messages. */
export function parseSweepCsv(text: string, label = "csv"): SweepRow[] {
  const lines = text.split("\n").filter((l) => l.trim() !== "");
  if (lines.length === 0) throw new FigureError(`${label}: empty file`);
  checkHeader(lines[0]!, label);

  const rows: SweepRow[] = [];
  for (let n = 1; n < lines.length; n++) {
    const fields = lines[n]!.split(",");
    const where = `${label}: line ${n + 1}`;
    if (fields.length !== COLUMNS.length) {
      throw new FigureError(
        `${where}: expected ${COLUMNS.length} fields, got ${fields.length}`
      );
    }
    const record: Record<string, string | number> = {};
    for (let i = 0; i < COLUMNS.length; i++) {
      const column = COLUMNS[i]!;
      try {
        record[column] = parseField(column, fields[i]!);
      } catch (err) {
        if (err instanceof FigureError) {
          throw new FigureError(`${where}: ${err.message}`);
        }
        throw err;
      }
    }
    const parsed = RowSchema.safeParse(record);
    if (!parsed.success) {
      const issue = parsed.error.issues[0]!;
      throw new FigureError(
        `${where}: column '${String(issue.path[0])}': ${issue.message}`
      );
    }
    rows.push(parsed.data);
  }
  return rows;
}
