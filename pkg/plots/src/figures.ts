import { readFileSync, writeFileSync } from "node:fs";

import { BerRow, TraceRow, parseBerCsv, parseTraceCsv } from "./csv.js";
import { Scale, formatTick, linearScale, logScale } from "./scale.js";
import { el, polylinePoints, svgDocument } from "./svg.js";

export type FigureKind = "ber-vs-snr" | "ber-vs-users" | "convergence";

export interface FigureSpec {
  kind: FigureKind;
  inputPath: string;
  outputPath: string;
  title?: string;
}

interface SeriesPoint {
  x: number;
  y: number;
  /** zero-error BER plotted at the 1/bits floor */
  floored: boolean;
  ciLow?: number;
  ciHigh?: number;
}

interface Series {
  label: string;
  dashed: boolean;
  points: SeriesPoint[];
}

const WIDTH = 760;
const HEIGHT = 520;
const MARGIN = { left: 70, right: 230, top: 48, bottom: 56 };

const PALETTE = [
  "#1f77b4", "#d62728", "#2ca02c", "#9467bd",
  "#ff7f0e", "#8c564b", "#17becf", "#7f7f7f",
];

const seriesLabel = (row: BerRow): string => `${row.algorithm} (n_r=${row.relays})`;

const berSeries = (rows: BerRow[], xField: "snr_db" | "users"): Series[] => {
  const groups = new Map<string, SeriesPoint[]>();
  for (const row of rows) {
    const label = seriesLabel(row);
    const floor = 1 / row.bits;
    const floored = row.errors === 0;
    const y = floored ? floor : row.ber;
    const point: SeriesPoint = {
      x: row[xField],
      y,
      floored,
      ciLow: Math.max(row.ci_low, floor / 2),
      ciHigh: Math.max(row.ci_high, floor),
    };
    const bucket = groups.get(label) ?? [];
    bucket.push(point);
    groups.set(label, bucket);
  }
  return [...groups.entries()]
    .sort(([a], [b]) => a.localeCompare(b))
    .map(([label, points]) => ({
      label,
      dashed: false,
      points: points.sort((p, q) => p.x - q.x),
    }));
};

const traceSeries = (rows: TraceRow[]): Series[] => {
  const groups = new Map<string, SeriesPoint[]>();
  for (const row of rows) {
    const bucket = groups.get(row.algorithm) ?? [];
    bucket.push({ x: row.symbol_index, y: Math.max(row.mse, 1e-12), floored: false });
    groups.set(row.algorithm, bucket);
  }
  return [...groups.entries()]
    .sort(([a], [b]) => a.localeCompare(b))
    .map(([label, points]) => ({
      label,
      // MMSE reference curves are dotted, adaptive algorithms solid
      dashed: label.endsWith("+mmse"),
      points: points.sort((p, q) => p.x - q.x),
    }));
};

const axes = (x: Scale, y: Scale, xTitle: string, yTitle: string): string[] => {
  const left = MARGIN.left;
  const right = WIDTH - MARGIN.right;
  const top = MARGIN.top;
  const bottom = HEIGHT - MARGIN.bottom;
  const parts: string[] = [];
  parts.push(el("rect", {
    x: left, y: top, width: right - left, height: bottom - top,
    fill: "none", stroke: "#000", "stroke-width": 1,
  }));
  for (const tick of x.ticks) {
    const px = x.map(tick);
    parts.push(el("line", {
      x1: px.toFixed(2), y1: top, x2: px.toFixed(2), y2: bottom,
      stroke: "#ddd", "stroke-width": 0.5,
    }));
    parts.push(el("text", {
      x: px.toFixed(2), y: bottom + 18, "text-anchor": "middle", "font-size": 12,
    }, [], formatTick(tick, x.kind)));
  }
  for (const tick of y.ticks) {
    const py = y.map(tick);
    parts.push(el("line", {
      x1: left, y1: py.toFixed(2), x2: right, y2: py.toFixed(2),
      stroke: "#ddd", "stroke-width": 0.5,
    }));
    parts.push(el("text", {
      x: left - 8, y: (py + 4).toFixed(2), "text-anchor": "end", "font-size": 12,
      "data-log-tick": y.kind === "log" ? "1" : "0",
    }, [], formatTick(tick, y.kind)));
  }
  parts.push(el("text", {
    x: (left + right) / 2, y: HEIGHT - 14, "text-anchor": "middle", "font-size": 14,
  }, [], xTitle));
  parts.push(el("text", {
    x: 18, y: (top + bottom) / 2, "text-anchor": "middle", "font-size": 14,
    transform: `rotate(-90 18 ${(top + bottom) / 2})`,
  }, [], yTitle));
  return parts;
};

const drawSeries = (series: Series[], x: Scale, y: Scale, withBands: boolean): string[] => {
  const parts: string[] = [];
  series.forEach((s, index) => {
    const color = PALETTE[index % PALETTE.length];
    if (withBands) {
      const upper = s.points.map((p) => [x.map(p.x), y.map(p.ciHigh ?? p.y)] as [number, number]);
      const lower = s.points
        .slice()
        .reverse()
        .map((p) => [x.map(p.x), y.map(p.ciLow ?? p.y)] as [number, number]);
      parts.push(el("polygon", {
        points: polylinePoints([...upper, ...lower]),
        fill: color, "fill-opacity": 0.12, stroke: "none",
        "data-role": "confidence-band",
      }));
    }
    parts.push(el("polyline", {
      points: polylinePoints(s.points.map((p) => [x.map(p.x), y.map(p.y)])),
      fill: "none", stroke: color, "stroke-width": 1.6,
      ...(s.dashed ? { "stroke-dasharray": "5 4" } : {}),
      "data-series": s.label,
    }));
    for (const p of s.points) {
      const px = x.map(p.x);
      const py = y.map(p.y);
      if (p.floored) {
        // zero-error point: open triangle at the 1/bits floor
        parts.push(el("path", {
          d: `M ${(px - 5).toFixed(2)} ${(py + 4).toFixed(2)} L ${px.toFixed(2)} ${(py - 5).toFixed(2)} L ${(px + 5).toFixed(2)} ${(py + 4).toFixed(2)} Z`,
          fill: "#fff", stroke: color, "stroke-width": 1.4,
          "data-floor": "1",
        }));
      } else if (withBands) {
        parts.push(el("circle", {
          cx: px.toFixed(2), cy: py.toFixed(2), r: 3.2,
          fill: color, stroke: "none",
        }));
      }
    }
  });
  return parts;
};

const legend = (series: Series[], anyFloor: boolean): string[] => {
  const x0 = WIDTH - MARGIN.right + 16;
  const parts: string[] = [];
  series.forEach((s, index) => {
    const y0 = MARGIN.top + 10 + index * 22;
    const color = PALETTE[index % PALETTE.length];
    parts.push(el("line", {
      x1: x0, y1: y0, x2: x0 + 28, y2: y0, stroke: color, "stroke-width": 2,
      ...(s.dashed ? { "stroke-dasharray": "5 4" } : {}),
    }));
    parts.push(el("text", {
      x: x0 + 34, y: y0 + 4, "font-size": 12,
    }, [], s.label));
  });
  if (anyFloor) {
    const y0 = MARGIN.top + 14 + series.length * 22;
    parts.push(el("text", {
      x: x0, y: y0 + 4, "font-size": 11, fill: "#555",
    }, [], "open triangle: zero errors, floor 1/bits"));
  }
  return parts;
};

const buildFromSeries = (
  series: Series[],
  xTitle: string,
  yTitle: string,
  title: string,
  withBands: boolean,
): string => {
  const xs = series.flatMap((s) => s.points.map((p) => p.x));
  const ys = series.flatMap((s) =>
    s.points.flatMap((p) => [p.y, ...(withBands ? [p.ciLow ?? p.y, p.ciHigh ?? p.y] : [])]));
  const yLo = Math.pow(10, Math.floor(Math.log10(Math.min(...ys))));
  const yHi = Math.pow(10, Math.ceil(Math.log10(Math.max(...ys))));
  const x = linearScale([Math.min(...xs), Math.max(...xs)],
                        [MARGIN.left, WIDTH - MARGIN.right]);
  const y = logScale([yLo, yHi === yLo ? yLo * 10 : yHi],
                     [HEIGHT - MARGIN.bottom, MARGIN.top]);
  const anyFloor = series.some((s) => s.points.some((p) => p.floored));
  const children = [
    el("text", {
      x: (MARGIN.left + WIDTH - MARGIN.right) / 2, y: 26,
      "text-anchor": "middle", "font-size": 16,
    }, [], title),
    ...axes(x, y, xTitle, yTitle),
    ...drawSeries(series, x, y, withBands),
    ...legend(series, anyFloor),
  ];
  return svgDocument(WIDTH, HEIGHT, children);
};

/** Build the SVG text for one figure kind from raw CSV text (pure). */
export const buildFigure = (kind: FigureKind, csvText: string, title?: string): string => {
  if (kind === "convergence") {
    const series = traceSeries(parseTraceCsv(csvText));
    return buildFromSeries(series, "symbol index", "MSE",
                           title ?? "MSE versus number of symbols", false);
  }
  const rows = parseBerCsv(csvText);
  const xField = kind === "ber-vs-snr" ? "snr_db" : "users";
  const xTitle = kind === "ber-vs-snr" ? "SNR (dB)" : "number of users";
  const series = berSeries(rows, xField);
  return buildFromSeries(series, xTitle, "BER",
                         title ?? `BER versus ${xTitle}`, true);
};

/** Read the spec's input CSV, render, and write the SVG; no file on error. */
export const render = (spec: FigureSpec): string => {
  const text = readFileSync(spec.inputPath, "utf8");
  const svg = buildFigure(spec.kind, text, spec.title);
  writeFileSync(spec.outputPath, svg);
  return spec.outputPath;
};
