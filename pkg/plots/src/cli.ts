import { FigureKind, render } from "./figures.js";

/** Shared entry point: <input.csv> <output.svg>, exit 2 on usage, 1 on error. */
export const runFigure = (kind: FigureKind, title: string): void => {
  const [input, output] = process.argv.slice(2);
  if (!input || !output) {
    console.error("usage: <script> <input.csv> <output.svg>");
    process.exit(2);
  }
  try {
    const written = render({ kind, inputPath: input, outputPath: output, title });
    console.log(`wrote ${written}`);
  } catch (error) {
    console.error(error instanceof Error ? error.message : String(error));
    process.exit(1);
  }
};
