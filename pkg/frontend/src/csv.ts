/** Parsing and validation of the batch CSV produced by the simulator. */

import * as fs from "node:fs";

export const EXPECTED_HEADER = "trial,success,steps,err_w1,err_w2,err_w3,err_w4";

export class SchemaError extends Error {
  constructor(message: string) {
    super(message);
    this.name = "SchemaError";
  }
}

export interface TrialRow {
  trial: number;
  success: boolean;
  steps: number;
  /** Per-wall errors in meters; NaN for failed trials. */
  errors: number[];
}

export function parseBatchCsv(text: string): TrialRow[] {
  const lines = text.split(/\r?\n/).filter((l) => l.length > 0);
  if (lines.length === 0 || lines[0].trim() !== EXPECTED_HEADER) {
    throw new SchemaError(`expected header "${EXPECTED_HEADER}"`);
  }
  if (lines.length === 1) {
    throw new SchemaError("no data rows");
  }
  const rows: TrialRow[] = [];
  for (const [i, line] of lines.slice(1).entries()) {
    const cells = line.split(",");
    if (cells.length !== 7) {
      throw new SchemaError(`row ${i + 1}: expected 7 cells, got ${cells.length}`);
    }
    const trial = Number(cells[0]);
    const success = cells[1].trim();
    const steps = Number(cells[2]);
    if (!Number.isInteger(trial) || !Number.isInteger(steps) || !["0", "1"].includes(success)) {
      throw new SchemaError(`row ${i + 1}: malformed trial/success/steps`);
    }
    const errors = cells.slice(3).map((c) => {
      const v = Number(c);
      if (c.trim() !== "nan" && Number.isNaN(v)) {
        throw new SchemaError(`row ${i + 1}: malformed error value "${c}"`);
      }
      return v;
    });
    rows.push({ trial, success: success === "1", steps, errors });
  }
  return rows;
}

export function readBatchCsv(path: string): TrialRow[] {
  return parseBatchCsv(fs.readFileSync(path, "utf-8"));
}

/** All finite wall errors, in meters. */
export function wallErrors(rows: TrialRow[]): number[] {
  return rows.flatMap((r) => r.errors.filter((e) => Number.isFinite(e)));
}

export function stepCounts(rows: TrialRow[]): number[] {
  return rows.map((r) => r.steps);
}
