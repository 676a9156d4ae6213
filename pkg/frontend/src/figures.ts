/** The three figure kinds: error histogram, step histogram, trajectory. */

import * as fs from "node:fs";

import { readBatchCsv, stepCounts, wallErrors, SchemaError } from "./csv.js";
import { histogram } from "./histogram.js";
import { barChartSvg, sceneSvg } from "./svg.js";

export interface FigureRequest {
  kind: "error_hist" | "step_hist" | "trajectory";
  inputPath: string;
  outputPath: string;
  /** Bin width: cm for error_hist, steps for step_hist. */
  binWidth?: number;
  /** Optional aggregate summary JSON; its config echo becomes the caption. */
  summaryPath?: string;
}

export function captionFromSummary(summaryPath?: string): string | undefined {
  if (!summaryPath) return undefined;
  const summary = JSON.parse(fs.readFileSync(summaryPath, "utf-8"));
  const cfg = summary.config ?? {};
  return `trials=${cfg.trials} seed=${cfg.master_seed} snr=${cfg.snr_db} dB scenario=${cfg.scenario}`;
}

export function render(request: FigureRequest): void {
  let svg: string;
  switch (request.kind) {
    case "error_hist":
      svg = renderErrorHist(request);
      break;
    case "step_hist":
      svg = renderStepHist(request);
      break;
    case "trajectory":
      svg = renderTrajectory(request);
      break;
    default:
      throw new SchemaError(`unknown figure kind "${(request as FigureRequest).kind}"`);
  }
  fs.writeFileSync(request.outputPath, svg);
}

function renderErrorHist(req: FigureRequest): string {
  const rows = readBatchCsv(req.inputPath);
  const binCm = req.binWidth ?? 0.1;
  const errorsCm = wallErrors(rows).map((e) => e * 100);
  const hist = histogram(errorsCm, binCm);
  return barChartSvg(hist, {
    title: "Wall estimation error",
    xLabel: "absolute error (cm)",
    yLabel: "walls",
    binWidth: binCm,
    gridlineAt: 1.0,
    caption: captionFromSummary(req.summaryPath),
  });
}

function renderStepHist(req: FigureRequest): string {
  const rows = readBatchCsv(req.inputPath);
  const bin = req.binWidth ?? 4;
  const hist = histogram(stepCounts(rows), bin);
  return barChartSvg(hist, {
    title: "Robot stops until closure",
    xLabel: "stops",
    yLabel: "trials",
    binWidth: bin,
    caption: captionFromSummary(req.summaryPath),
  });
}

interface TracePayload {
  trial: number;
  success: boolean;
  steps: number;
  start: [number, number];
  true_room: Array<[number, number]>;
  recovered_room: Array<[number, number]> | null;
  stops: Array<{ center: [number, number] }>;
}

function polygonSegments(verts: Array<[number, number]>): Array<[number, number, number, number]> {
  return verts.map((v, i) => {
    const w = verts[(i + 1) % verts.length];
    return [v[0], v[1], w[0], w[1]];
  });
}

function renderTrajectory(req: FigureRequest): string {
  let trace: TracePayload;
  try {
    trace = JSON.parse(fs.readFileSync(req.inputPath, "utf-8"));
  } catch (e) {
    throw new SchemaError(`trace JSON unreadable: ${e}`);
  }
  if (!trace || !Array.isArray(trace.true_room) || !Array.isArray(trace.stops)) {
    throw new SchemaError("trace JSON missing true_room/stops");
  }
  const start = trace.start;
  const path = trace.stops.map((s) => [
    s.center[0] + start[0],
    s.center[1] + start[1],
  ]) as Array<[number, number]>;
  return sceneSvg({
    trueWalls: polygonSegments(trace.true_room),
    estWalls: trace.recovered_room ? polygonSegments(trace.recovered_room) : [],
    path,
    start,
    title: `Trial ${trace.trial}: ${trace.success ? "room recovered" : "failed"} in ${trace.steps} stops`,
    caption: captionFromSummary(req.summaryPath),
  });
}
