/** Layout and drawing of the sweep figure and the boxplot. */

import { writeFileSync } from "node:fs";

import { Panel } from "./figure.js";
import { BLACK, Color, GREY, Raster, WHITE } from "./raster.js";
import { BoxStats } from "./stats.js";

interface Style {
  color: Color;
  marker: string;
}

const STYLES: Record<string, Style> = {
  LM: { color: [214, 39, 40], marker: "circle" },
  SR: { color: [31, 119, 180], marker: "square" },
  SC: { color: [44, 160, 44], marker: "diamond" },
  SS: { color: [148, 103, 189], marker: "cross" },
  SI: { color: [255, 127, 14], marker: "plus" },
};

const FALLBACK: Style[] = [
  { color: [140, 86, 75], marker: "circle" },
  { color: [23, 190, 207], marker: "square" },
  { color: [188, 189, 34], marker: "diamond" },
];

export function styleFor(estimator: string, index: number): Style {
  return STYLES[estimator] ?? FALLBACK[index % FALLBACK.length];
}

interface Extent {
  lo: number;
  hi: number;
}

function extent(values: number[]): Extent {
  let lo = Math.min(...values);
  let hi = Math.max(...values);
  if (lo === hi) {
    lo -= 0.5;
    hi += 0.5;
  }
  const pad = 0.05 * (hi - lo);
  return { lo: lo - pad, hi: hi + pad };
}

function formatTick(v: number): string {
  if (v === 0) {
    return "0";
  }
  const a = Math.abs(v);
  if (a >= 100) {
    return v.toFixed(0);
  }
  if (a >= 1) {
    return v.toFixed(1);
  }
  return v.toFixed(3);
}

function drawAxes(
  img: Raster,
  box: { x0: number; y0: number; x1: number; y1: number },
  xe: Extent,
  ye: Extent,
  xLabel: string,
  yLabel: string,
): { sx: (v: number) => number; sy: (v: number) => number } {
  const sx = (v: number) =>
    box.x0 + ((v - xe.lo) / (xe.hi - xe.lo)) * (box.x1 - box.x0);
  const sy = (v: number) =>
    box.y1 - ((v - ye.lo) / (ye.hi - ye.lo)) * (box.y1 - box.y0);
  img.rect(box.x0, box.y0, box.x1, box.y1, BLACK);
  for (const t of [0, 0.25, 0.5, 0.75, 1]) {
    const xv = xe.lo + t * (xe.hi - xe.lo);
    const yv = ye.lo + t * (ye.hi - ye.lo);
    const px = sx(xv);
    const py = sy(yv);
    img.line(px, box.y1, px, box.y1 + 4, BLACK);
    img.line(box.x0 - 4, py, box.x0, py, BLACK);
    const xt = formatTick(xv);
    img.text(px - img.textWidth(xt) / 2, box.y1 + 7, xt, BLACK);
    const yt = formatTick(yv);
    img.text(box.x0 - 8 - img.textWidth(yt), py - 3, yt, BLACK);
  }
  img.text(
    (box.x0 + box.x1) / 2 - img.textWidth(xLabel) / 2,
    box.y1 + 20,
    xLabel,
    BLACK,
  );
  img.text(box.x0, box.y0 - 12, yLabel, BLACK);
  return { sx, sy };
}

export function renderSweepFigure(panels: Panel[], outPath: string): void {
  const cols = panels.length > 1 ? 2 : 1;
  const rows = Math.ceil(panels.length / cols);
  const panelW = 420;
  const panelH = 300;
  const img = new Raster(cols * panelW, rows * panelH + 30, WHITE);

  // shared legend along the top
  let lx = 20;
  const estimators = [...new Set(panels.flatMap((p) => p.curves.map((c) => c.estimator)))];
  estimators.forEach((estimator, i) => {
    const style = styleFor(estimator, i);
    img.line(lx, 14, lx + 24, 14, style.color);
    img.marker(lx + 12, 14, style.marker, style.color);
    img.text(lx + 30, 11, estimator, BLACK);
    lx += 40 + img.textWidth(estimator);
  });

  panels.forEach((panel, idx) => {
    const px = (idx % cols) * panelW;
    const py = Math.floor(idx / cols) * panelH + 30;
    const box = { x0: px + 60, y0: py + 30, x1: px + panelW - 20, y1: py + panelH - 45 };
    const xs = panel.curves.flatMap((c) => c.x);
    const ys = panel.curves.flatMap((c) => c.y);
    const { sx, sy } = drawAxes(img, box, extent(xs), extent(ys), panel.xLabel, "MEDIAN RRMSE");
    panel.curves.forEach((curve, i) => {
      const style = styleFor(curve.estimator, i);
      const cx = curve.x.map(sx);
      const cy = curve.y.map(sy);
      img.polyline(cx, cy, style.color);
      for (let k = 0; k < cx.length; k++) {
        img.marker(cx[k], cy[k], style.marker, style.color);
      }
    });
  });
  writeFileSync(outPath, img.toPng());
}

export function renderBoxplot(stats: BoxStats[], outPath: string): void {
  const img = new Raster(360, 320, WHITE);
  const box = { x0: 60, y0: 30, x1: 340, y1: 260 };
  const all = stats.flatMap((s) => [s.whiskerLow, s.whiskerHigh, ...s.outliers]);
  const ye = extent(all);
  const sy = (v: number) =>
    box.y1 - ((v - ye.lo) / (ye.hi - ye.lo)) * (box.y1 - box.y0);
  img.rect(box.x0, box.y0, box.x1, box.y1, BLACK);
  for (const t of [0, 0.25, 0.5, 0.75, 1]) {
    const yv = ye.lo + t * (ye.hi - ye.lo);
    const py = sy(yv);
    img.line(box.x0 - 4, py, box.x0, py, BLACK);
    const yt = formatTick(yv);
    img.text(box.x0 - 8 - img.textWidth(yt), py - 3, yt, BLACK);
  }
  img.text(box.x0, box.y0 - 12, "RRMSE", BLACK);

  const slot = (box.x1 - box.x0) / stats.length;
  stats.forEach((s, i) => {
    const cx = box.x0 + slot * (i + 0.5);
    const half = Math.min(40, slot * 0.3);
    const style = styleFor(s.estimator, i);
    img.rect(cx - half, sy(s.q3), cx + half, sy(s.q1), style.color);
    img.line(cx - half, sy(s.median), cx + half, sy(s.median), style.color);
    img.line(cx, sy(s.q3), cx, sy(s.whiskerHigh), BLACK);
    img.line(cx, sy(s.q1), cx, sy(s.whiskerLow), BLACK);
    img.line(cx - half / 2, sy(s.whiskerHigh), cx + half / 2, sy(s.whiskerHigh), BLACK);
    img.line(cx - half / 2, sy(s.whiskerLow), cx + half / 2, sy(s.whiskerLow), BLACK);
    for (const v of s.outliers) {
      img.marker(cx, sy(v), "cross", GREY, 2);
    }
    img.text(cx - img.textWidth(s.estimator) / 2, box.y1 + 10, s.estimator, BLACK);
  });
  writeFileSync(outPath, img.toPng());
}
