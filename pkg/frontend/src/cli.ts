#!/usr/bin/env node
/**
 * figures --kind heatmap --csv sweep.csv [more.csv ...] --out fig.svg
 *
 * Batch SVG figure generation from sweep CSVs (frozen schema=1).
 */

import { realpathSync } from "node:fs";
import { pathToFileURL } from "node:url";

import yargs from "yargs";
import { hideBin } from "yargs/helpers";

import { KINDS, render, type FigureKind } from "./figure.js";
import { FigureError } from "./schema.js";

export async function runCli(argv: string[]): Promise<number> {
  const args = await yargs(argv)
    .scriptName("figures")
    .option("kind", {
      choices: KINDS,
      demandOption: true,
      describe: "figure kind",
    })
    .option("csv", {
      type: "string",
      array: true,
      demandOption: true,
      describe: "input sweep CSV path(s)",
    })
    .option("out", {
      type: "string",
      demandOption: true,
      describe: "output SVG path",
    })
    .option("agg", {
      choices: ["mean", "median"] as const,
      default: "mean" as const,
      describe: "seed aggregation",
    })
    .strict()
    .fail((msg, err) => {
      throw err ?? new FigureError(msg);
    })
    .parse();

  await render({
    csvPaths: args.csv,
    kind: args.kind as FigureKind,
    aggregation: args.agg,
    out: args.out,
  });
  console.log(`wrote ${args.out}`);
  return 0;
}

const isMain = (() => {
  if (!process.argv[1]) return false;
  try {
    return import.meta.url === pathToFileURL(realpathSync(process.argv[1])).href;
  } catch {
    return false;
  }
})();

if (isMain) {
  runCli(hideBin(process.argv))
    .then((code) => process.exit(code))
    .catch((err) => {
      console.error(`error: ${err instanceof Error ? err.message : err}`);
      process.exit(1);
    });
}
