// CSV ingestion and schema validation for the simulator's result files.
// The emitter guarantees plain comma-separated values with no quoting.

export interface ParsedCsv {
    columns: string[];
    rows: string[][];
}

export const SCHEMAS: Record<string, string[]> = {
    fig1: ["authors", "u_width", "c_width", "iau_rate", "n"],
    fig2a: ["authors", "duration_weeks", "mean", "std", "n"],
    fig2b: ["authors", "progress", "mean", "std", "n"],
    fig2c: ["authors", "position", "rate", "n"],
    fig3: ["case", "mean", "std", "n"],
};

export type FigureKind =
    | "heatmap-grid"
    | "line-with-band"
    | "bar-with-error"
    | "position-matrix";

export const FIGURE_KINDS: FigureKind[] = [
    "heatmap-grid",
    "line-with-band",
    "bar-with-error",
    "position-matrix",
];

// Which result schemas each figure kind can draw.
export const KIND_SCHEMAS: Record<FigureKind, string[]> = {
    "heatmap-grid": ["fig1"],
    "line-with-band": ["fig2a", "fig2b"],
    "bar-with-error": ["fig3"],
    "position-matrix": ["fig2c"],
};

export function parseCsv(text: string): ParsedCsv {
    const lines = text.split("\n").filter((line) => line.length > 0);
    if (lines.length === 0) {
        throw new Error("empty CSV document");
    }
    const columns = lines[0].split(",");
    const rows = lines.slice(1).map((line, index) => {
        const cells = line.split(",");
        if (cells.length !== columns.length) {
            throw new Error(`row ${index + 1} has ${cells.length} cells, expected ${columns.length}`);
        }
        return cells;
    });
    return { columns, rows };
}

export function detectSchema(columns: string[]): string | null {
    for (const [id, expected] of Object.entries(SCHEMAS)) {
        if (expected.length === columns.length && expected.every((c, i) => c === columns[i])) {
            return id;
        }
    }
    return null;
}

export function schemaForKind(kind: FigureKind, parsed: ParsedCsv): string {
    const schema = detectSchema(parsed.columns);
    const accepted = KIND_SCHEMAS[kind];
    if (schema === null || !accepted.includes(schema)) {
        throw new Error(
            `input schema ${schema ?? `[${parsed.columns.join(",")}]`} does not match ` +
            `figure kind '${kind}' (expected schema ${accepted.join(" or ")})`,
        );
    }
    return schema;
}

export function numeric(parsed: ParsedCsv, column: string, row: string[]): number {
    const index = parsed.columns.indexOf(column);
    if (index < 0) {
        throw new Error(`column '${column}' missing`);
    }
    const value = Number(row[index]);
    if (!Number.isFinite(value)) {
        throw new Error(`column '${column}' holds non-numeric value '${row[index]}'`);
    }
    return value;
}

export function text(parsed: ParsedCsv, column: string, row: string[]): string {
    const index = parsed.columns.indexOf(column);
    if (index < 0) {
        throw new Error(`column '${column}' missing`);
    }
    return row[index];
}
