import { describe, expect, it } from "vitest";

import { FigureError, HEADER, parseSweepCsv } from "../src/schema.js";

const GOOD = `${HEADER}
sgld,8,0.05,0,0.5,0.2,0.1,100,1.5,ok
nngp,32,0.01,1,0.9,0.05,nan,0,0.2,ok
mf,8,0.05,0,0.0,1e6,1e6,40,0.3,diverged
`;

describe("parseSweepCsv", () => {
  it("parses valid rows, including nan train_mse", () => {
    const rows = parseSweepCsv(GOOD);
    expect(rows).toHaveLength(3);
    expect(rows[0]).toMatchObject({ model: "sgld", P: 8, seed: 0, status: "ok" });
    expect(rows[1]!.train_mse).toBeNaN();
    expect(rows[2]!.status).toBe("diverged");
  });

  it("names a misspelled header column", () => {
    const bad = GOOD.replace("kappa", "kapa");
    expect(() => parseSweepCsv(bad, "f.csv")).toThrow(
      /header column 'kappa' is missing or misplaced \(got 'kapa'\)/
    );
  });

  it("rejects a missing schema marker", () => {
    const bad = GOOD.replace("schema=1,", "");
    expect(() => parseSweepCsv(bad)).toThrow(/expected leading 'schema=1'/);
  });

  it("rejects extra header columns", () => {
    const bad = GOOD.replace(",status", ",status,extra");
    expect(() => parseSweepCsv(bad)).toThrow(/extra header column 'extra'/);
  });

  it("names the offending column in a bad row value", () => {
    const bad = GOOD.replace("sgld,8,0.05", "sgld,eight,0.05");
    expect(() => parseSweepCsv(bad, "f.csv")).toThrow(
      /f.csv: line 2: column 'P': not a number: 'eight'/
    );
  });

  it("rejects unknown models and statuses by column name", () => {
    expect(() => parseSweepCsv(GOOD.replace("sgld", "sgd"))).toThrow(/column 'model'/);
    expect(() => parseSweepCsv(GOOD.replace(",ok\n", ",done\n"))).toThrow(
      /column 'status'/
    );
  });

  it("rejects rows with the wrong field count", () => {
    const bad = GOOD.replace(",1.5,ok", ",ok");
    expect(() => parseSweepCsv(bad)).toThrow(/expected 10 fields, got 9/);
  });

  it("rejects an empty file", () => {
    expect(() => parseSweepCsv("", "f.csv")).toThrow(FigureError);
  });
});
