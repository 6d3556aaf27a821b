/** Figure data structures built from parsed CSVs; rendering consumes these,
 * and tests can inspect them without touching pixels. */

import { RecordRow, SchemaError, SummaryRow } from "./csv.js";
import { BoxStats, boxStats } from "./stats.js";

export const AXIS_ORDER = [
  "measurements",
  "sparsity",
  "noise",
  "saturation",
] as const;

export const AXIS_LABELS: Record<string, string> = {
  measurements: "MEASUREMENTS M",
  sparsity: "SPARSITY FRACTION",
  noise: "NOISE FRACTION",
  saturation: "SATURATION FRACTION",
};

export interface Curve {
  estimator: string;
  x: number[];
  y: number[];
}

export interface Panel {
  axis: string;
  xLabel: string;
  curves: Curve[];
}

/** One panel per axis present in the summary, one median-RRMSE curve per
 * estimator, points ordered by axis value. */
export function buildSweepPanels(
  rows: SummaryRow[],
  panels?: string[],
): Panel[] {
  const axes = panels ?? AXIS_ORDER.filter((a) => rows.some((r) => r.axis === a));
  if (axes.length === 0) {
    throw new SchemaError("summary.csv: no known sweep axis present");
  }
  const out: Panel[] = [];
  for (const axis of axes) {
    const axisRows = rows.filter((r) => r.axis === axis);
    if (axisRows.length === 0) {
      throw new SchemaError(`summary.csv: no rows for requested axis '${axis}'`);
    }
    const estimators = [...new Set(axisRows.map((r) => r.estimator))].sort();
    const curves = estimators.map((estimator) => {
      const pts = axisRows
        .filter((r) => r.estimator === estimator)
        .sort((a, b) => a.axis_value - b.axis_value);
      return {
        estimator,
        x: pts.map((p) => p.axis_value),
        y: pts.map((p) => p.median),
      };
    });
    out.push({ axis, xLabel: AXIS_LABELS[axis] ?? axis.toUpperCase(), curves });
  }
  return out;
}

/** Side-by-side box statistics for two estimators; flagged failure records
 * never contribute. */
export function buildBoxPair(
  rows: RecordRow[],
  a: string,
  b: string,
): [BoxStats, BoxStats] {
  const values = (estimator: string): number[] => {
    const vals = rows
      .filter((r) => r.estimator === estimator && r.flag === "" && !Number.isNaN(r.rrmse))
      .map((r) => r.rrmse);
    if (vals.length === 0) {
      throw new SchemaError(`records.csv: no usable rows for estimator '${estimator}'`);
    }
    return vals;
  };
  return [boxStats(a, values(a)), boxStats(b, values(b))];
}
