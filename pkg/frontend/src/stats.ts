/** Order statistics used by the figure builders. */

/**
 * Percentile with linear interpolation between order statistics
 * (the same convention the sweep harness uses for its summary columns).
 */
export function percentile(values: number[], p: number): number {
  if (values.length === 0) {
    throw new Error("percentile of an empty sample");
  }
  if (p < 0 || p > 100) {
    throw new Error(`percentile ${p} outside [0, 100]`);
  }
  const sorted = [...values].sort((a, b) => a - b);
  const pos = (p / 100) * (sorted.length - 1);
  const lo = Math.floor(pos);
  const hi = Math.ceil(pos);
  if (lo === hi) {
    return sorted[lo];
  }
  return sorted[lo] + (pos - lo) * (sorted[hi] - sorted[lo]);
}

export function median(values: number[]): number {
  return percentile(values, 50);
}

export interface BoxStats {
  estimator: string;
  count: number;
  q1: number;
  median: number;
  q3: number;
  /** Most extreme data points within 1.5 IQR of the box. */
  whiskerLow: number;
  whiskerHigh: number;
  outliers: number[];
}

export function boxStats(estimator: string, values: number[]): BoxStats {
  if (values.length < 2) {
    throw new Error(
      `need at least 2 trials for a boxplot, got ${values.length} for ${estimator}`,
    );
  }
  const q1 = percentile(values, 25);
  const q3 = percentile(values, 75);
  const iqr = q3 - q1;
  const loFence = q1 - 1.5 * iqr;
  const hiFence = q3 + 1.5 * iqr;
  const inside = values.filter((v) => v >= loFence && v <= hiFence);
  return {
    estimator,
    count: values.length,
    q1,
    median: median(values),
    q3,
    whiskerLow: Math.min(...inside),
    whiskerHigh: Math.max(...inside),
    outliers: values.filter((v) => v < loFence || v > hiFence),
  };
}
