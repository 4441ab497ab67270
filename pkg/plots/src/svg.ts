/** Minimal deterministic SVG string builder (no DOM, stable attribute order). */

export type Attrs = Record<string, string | number>;

const escapeText = (text: string): string =>
  text.replace(/&/g, "&amp;").replace(/</g, "&lt;").replace(/>/g, "&gt;");

export const el = (tag: string, attrs: Attrs, children: string[] = [], text?: string): string => {
  const rendered = Object.entries(attrs)
    .map(([key, value]) => ` ${key}="${value}"`)
    .join("");
  const body = (text !== undefined ? escapeText(text) : "") + children.join("");
  return body.length > 0 ? `<${tag}${rendered}>${body}</${tag}>` : `<${tag}${rendered}/>`;
};

export const svgDocument = (width: number, height: number, children: string[]): string =>
  [
    '<?xml version="1.0" encoding="UTF-8"?>',
    el(
      "svg",
      {
        xmlns: "http://www.w3.org/2000/svg",
        width,
        height,
        viewBox: `0 0 ${width} ${height}`,
        "font-family": "Helvetica, Arial, sans-serif",
      },
      children,
    ),
  ].join("\n");

export const polylinePoints = (points: [number, number][]): string =>
  points.map(([x, y]) => `${x.toFixed(2)},${y.toFixed(2)}`).join(" ");
