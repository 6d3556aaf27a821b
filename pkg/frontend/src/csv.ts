/** Parsing and schema validation for the sweep harness CSV outputs. */

import Papa from "papaparse";

export class SchemaError extends Error {}

export interface SummaryRow {
  axis: string;
  axis_value: number;
  estimator: string;
  trials: number;
  median: number;
  mean: number;
  q25: number;
  q75: number;
}

export interface RecordRow {
  axis: string;
  axis_value: number;
  estimator: string;
  trial: number;
  seed: string;
  rrmse: number;
  lambda: number;
  iters: number;
  wall_ms: number;
  flag: string;
}

const SUMMARY_COLUMNS = [
  "axis",
  "axis_value",
  "estimator",
  "trials",
  "median",
  "mean",
  "q25",
  "q75",
] as const;

const RECORD_COLUMNS = [
  "axis",
  "axis_value",
  "estimator",
  "trial",
  "seed",
  "rrmse",
  "lambda",
  "iters",
  "wall_ms",
  "flag",
] as const;

function parseRows(
  text: string,
  required: readonly string[],
  label: string,
): Record<string, string>[] {
  const parsed = Papa.parse<Record<string, string>>(text.trim(), {
    header: true,
    skipEmptyLines: true,
  });
  if (parsed.errors.length > 0) {
    const first = parsed.errors[0];
    throw new SchemaError(`${label}: ${first.message} (row ${first.row})`);
  }
  const columns = parsed.meta.fields ?? [];
  for (const col of required) {
    if (!columns.includes(col)) {
      throw new SchemaError(`${label}: missing required column '${col}'`);
    }
  }
  return parsed.data;
}

function toNumber(raw: string, column: string, label: string): number {
  const value = Number(raw);
  if (raw === "" || Number.isNaN(value)) {
    throw new SchemaError(`${label}: non-numeric value '${raw}' in column '${column}'`);
  }
  return value;
}

export function parseSummary(text: string): SummaryRow[] {
  return parseRows(text, SUMMARY_COLUMNS, "summary.csv").map((row) => ({
    axis: row.axis,
    axis_value: toNumber(row.axis_value, "axis_value", "summary.csv"),
    estimator: row.estimator,
    trials: toNumber(row.trials, "trials", "summary.csv"),
    median: toNumber(row.median, "median", "summary.csv"),
    mean: toNumber(row.mean, "mean", "summary.csv"),
    q25: toNumber(row.q25, "q25", "summary.csv"),
    q75: toNumber(row.q75, "q75", "summary.csv"),
  }));
}

function maybeNaN(raw: string, column: string): number {
  if (raw === "" || raw === "nan") {
    return NaN;
  }
  return toNumber(raw, column, "records.csv");
}

export function parseRecords(text: string): RecordRow[] {
  return parseRows(text, RECORD_COLUMNS, "records.csv").map((row) => ({
    axis: row.axis,
    axis_value: toNumber(row.axis_value, "axis_value", "records.csv"),
    estimator: row.estimator,
    trial: toNumber(row.trial, "trial", "records.csv"),
    seed: row.seed,
    // failure records carry 'nan' in rrmse/lambda; wall_ms is empty unless
    // the sweep was run with timing enabled
    rrmse: maybeNaN(row.rrmse, "rrmse"),
    lambda: maybeNaN(row.lambda, "lambda"),
    iters: toNumber(row.iters, "iters", "records.csv"),
    wall_ms: maybeNaN(row.wall_ms, "wall_ms"),
    flag: row.flag ?? "",
  }));
}
