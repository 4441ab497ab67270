import Papa from "papaparse";

/** One row of the harness BER CSV (schema owned by the simulation CLI). */
export interface BerRow {
  snr_db: number;
  users: number;
  relays: number;
  algorithm: string;
  channel_knowledge: string;
  errors: number;
  bits: number;
  ber: number;
  ci_low: number;
  ci_high: number;
  seed: number;
}

/** One row of the harness convergence-trace CSV. */
export interface TraceRow {
  symbol_index: number;
  mse: number;
  algorithm: string;
  seed: number;
}

export const BER_COLUMNS: (keyof BerRow)[] = [
  "snr_db", "users", "relays", "algorithm", "channel_knowledge",
  "errors", "bits", "ber", "ci_low", "ci_high", "seed",
];

export const TRACE_COLUMNS: (keyof TraceRow)[] = [
  "symbol_index", "mse", "algorithm", "seed",
];

const NUMERIC_BER: (keyof BerRow)[] = [
  "snr_db", "users", "relays", "errors", "bits", "ber", "ci_low", "ci_high", "seed",
];

const parseRows = (text: string, columns: string[]): Record<string, string>[] => {
  const result = Papa.parse<Record<string, string>>(text.trim(), {
    header: true,
    skipEmptyLines: true,
  });
  const fields = result.meta.fields ?? [];
  for (const column of columns) {
    if (!fields.includes(column)) {
      throw new Error(`missing column "${column}"`);
    }
  }
  if (result.data.length === 0) {
    throw new Error("empty CSV: no data rows");
  }
  return result.data;
};

export const parseBerCsv = (text: string): BerRow[] =>
  parseRows(text, BER_COLUMNS).map((raw) => {
    const row: Record<string, number | string> = {
      algorithm: raw.algorithm,
      channel_knowledge: raw.channel_knowledge,
    };
    for (const key of NUMERIC_BER) {
      const value = Number(raw[key]);
      if (!Number.isFinite(value)) {
        throw new Error(`non-numeric value ${JSON.stringify(raw[key])} in column "${key}"`);
      }
      row[key] = value;
    }
    return row as unknown as BerRow;
  });

export const parseTraceCsv = (text: string): TraceRow[] =>
  parseRows(text, TRACE_COLUMNS).map((raw) => {
    const symbolIndex = Number(raw.symbol_index);
    const mse = Number(raw.mse);
    const seed = Number(raw.seed);
    if (!Number.isFinite(symbolIndex) || !Number.isFinite(mse) || !Number.isFinite(seed)) {
      throw new Error("non-numeric value in trace CSV");
    }
    return { symbol_index: symbolIndex, mse, algorithm: raw.algorithm, seed };
  });
