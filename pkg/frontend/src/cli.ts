#!/usr/bin/env node
/**
 * figkit <error_hist|step_hist|trajectory> --in <csv|json> --out <svg>
 *        [--bin <width>] [--summary <json>]
 *
 * Exit codes: 0 ok, 1 usage/schema error, 2 I/O failure.
 */

import { parseArgs } from "node:util";

import { SchemaError } from "./csv.js";
import { render, FigureRequest } from "./figures.js";

const KINDS = ["error_hist", "step_hist", "trajectory"] as const;

export function main(argv: string[]): number {
  let parsed;
  try {
    parsed = parseArgs({
      args: argv,
      allowPositionals: true,
      options: {
        in: { type: "string" },
        out: { type: "string" },
        bin: { type: "string" },
        summary: { type: "string" },
      },
    });
  } catch (e) {
    console.error(String(e));
    return 1;
  }
  const kind = parsed.positionals[0] as (typeof KINDS)[number] | undefined;
  const { in: input, out, bin, summary } = parsed.values;
  if (!kind || !KINDS.includes(kind) || !input || !out) {
    console.error("usage: figkit <error_hist|step_hist|trajectory> --in <file> --out <svg> [--bin <w>] [--summary <json>]");
    return 1;
  }
  const request: FigureRequest = {
    kind,
    inputPath: input,
    outputPath: out,
    binWidth: bin !== undefined ? Number(bin) : undefined,
    summaryPath: summary,
  };
  if (request.binWidth !== undefined && !(request.binWidth > 0)) {
    console.error("--bin must be a positive number");
    return 1;
  }
  try {
    render(request);
  } catch (e) {
    if (e instanceof SchemaError) {
      console.error(`schema error: ${e.message}`);
      return 1;
    }
    console.error(`error: ${e}`);
    return 2;
  }
  console.log(`wrote ${out}`);
  return 0;
}

process.exit(main(process.argv.slice(2)));
