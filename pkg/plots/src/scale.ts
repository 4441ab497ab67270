/** Axis scales: plain functions plus the tick positions they expose. */

export interface Scale {
  map: (value: number) => number;
  ticks: number[];
  kind: "linear" | "log";
}

const niceStep = (span: number, target: number): number => {
  const raw = span / Math.max(target, 1);
  const magnitude = Math.pow(10, Math.floor(Math.log10(raw)));
  for (const mult of [1, 2, 5, 10]) {
    if (mult * magnitude >= raw) return mult * magnitude;
  }
  return 10 * magnitude;
};

export const linearScale = (
  domain: [number, number],
  range: [number, number],
  tickTarget = 6,
): Scale => {
  const [d0, d1] = domain;
  const [r0, r1] = range;
  const span = d1 - d0 || 1;
  const step = niceStep(span, tickTarget);
  const ticks: number[] = [];
  for (let t = Math.ceil(d0 / step) * step; t <= d1 + 1e-9; t += step) {
    ticks.push(Number(t.toFixed(10)));
  }
  return {
    map: (value) => r0 + ((value - d0) / span) * (r1 - r0),
    ticks,
    kind: "linear",
  };
};

/** Log10 scale with one tick per decade; the domain must be positive. */
export const logScale = (domain: [number, number], range: [number, number]): Scale => {
  const lo = Math.log10(domain[0]);
  const hi = Math.log10(domain[1]);
  const [r0, r1] = range;
  const span = hi - lo || 1;
  const ticks: number[] = [];
  for (let exp = Math.ceil(lo - 1e-9); exp <= hi + 1e-9; exp += 1) {
    ticks.push(Math.pow(10, exp));
  }
  return {
    map: (value) => r0 + ((Math.log10(value) - lo) / span) * (r1 - r0),
    ticks,
    kind: "log",
  };
};

export const formatTick = (value: number, kind: "linear" | "log"): string => {
  if (kind === "log") {
    const exp = Math.round(Math.log10(value));
    return `1e${exp}`;
  }
  return Number.isInteger(value) ? String(value) : String(Number(value.toPrecision(6)));
};
