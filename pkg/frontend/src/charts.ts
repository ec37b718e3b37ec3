// Figure builders: each consumes a validated result CSV and produces both the
// plotted data arrays (for verification) and the SVG text (for files).

import {
    FigureKind,
    ParsedCsv,
    numeric,
    parseCsv,
    schemaForKind,
    text,
} from "./csv";
import { SERIES_COLORS, el, fmt, linearScale, rampColor, svgDocument } from "./svg";

export interface HeatmapPanel {
    authors: number;
    uValues: number[];
    cValues: number[];
    // rates[i][j] is the cell for uValues[i] x cValues[j].
    rates: number[][];
}

export interface LineSeries {
    authors: number;
    x: number[];
    mean: number[];
    std: number[];
    // Screen coordinates of the mean polyline, for render-level assertions.
    screenPoints: Array<[number, number]>;
}

export interface BarData {
    cases: string[];
    means: number[];
    stds: number[];
}

export interface MatrixData {
    authors: number[];
    maxPosition: number;
    // rates[i][p-1] for author count authors[i]; null where position > count.
    rates: Array<Array<number | null>>;
}

export interface BuildResult {
    kind: FigureKind;
    schema: string;
    data: HeatmapPanel[] | LineSeries[] | BarData | MatrixData;
    svg: string;
}

function groupBy<T>(items: T[], key: (item: T) => number): Map<number, T[]> {
    const groups = new Map<number, T[]>();
    for (const item of items) {
        const k = key(item);
        const bucket = groups.get(k);
        if (bucket === undefined) {
            groups.set(k, [item]);
        } else {
            bucket.push(item);
        }
    }
    return groups;
}

function sortedKeys(map: Map<number, unknown>): number[] {
    return Array.from(map.keys()).sort((a, b) => a - b);
}

// --- heatmap-grid (fig1) ---------------------------------------------------

const CELL = 34;
const PANEL_PAD = 56;

export function buildHeatmapGrid(parsed: ParsedCsv): { data: HeatmapPanel[]; svg: string } {
    const rows = parsed.rows.map((row) => ({
        authors: numeric(parsed, "authors", row),
        u: numeric(parsed, "u_width", row),
        c: numeric(parsed, "c_width", row),
        rate: numeric(parsed, "iau_rate", row),
    }));
    const panels: HeatmapPanel[] = [];
    const byAuthors = groupBy(rows, (r) => r.authors);
    for (const authors of sortedKeys(byAuthors)) {
        const cells = byAuthors.get(authors)!;
        const uValues = Array.from(new Set(cells.map((r) => r.u))).sort((a, b) => a - b);
        const cValues = Array.from(new Set(cells.map((r) => r.c))).sort((a, b) => a - b);
        const rates = uValues.map(() => cValues.map(() => NaN));
        for (const cell of cells) {
            rates[uValues.indexOf(cell.u)][cValues.indexOf(cell.c)] = cell.rate;
        }
        panels.push({ authors, uValues, cValues, rates });
    }

    const body: string[] = [];
    let xOffset = PANEL_PAD;
    const nRows = panels.length > 0 ? panels[0].uValues.length : 0;
    const height = PANEL_PAD + nRows * CELL + 40;
    for (const panel of panels) {
        body.push(el("text", { x: xOffset, y: PANEL_PAD - 28 },
            `${panel.authors} authors`));
        for (let i = 0; i < panel.uValues.length; i++) {
            for (let j = 0; j < panel.cValues.length; j++) {
                // Largest utility spread at the top row.
                const y = PANEL_PAD + (panel.uValues.length - 1 - i) * CELL;
                body.push(el("rect", {
                    class: "cell",
                    x: xOffset + j * CELL,
                    y,
                    width: CELL - 1,
                    height: CELL - 1,
                    fill: rampColor(panel.rates[i][j]),
                }));
            }
        }
        for (let j = 0; j < panel.cValues.length; j++) {
            body.push(el("text", {
                x: xOffset + j * CELL + 6,
                y: PANEL_PAD + panel.uValues.length * CELL + 12,
            }, fmt(panel.cValues[j])));
        }
        for (let i = 0; i < panel.uValues.length; i++) {
            body.push(el("text", {
                x: xOffset - 24,
                y: PANEL_PAD + (panel.uValues.length - 1 - i) * CELL + 20,
            }, fmt(panel.uValues[i])));
        }
        body.push(el("text", {
            x: xOffset,
            y: PANEL_PAD + nRows * CELL + 30,
        }, "contribution spread (x) vs utility spread (y)"));
        xOffset += panel.cValues.length * CELL + PANEL_PAD;
    }
    return { data: panels, svg: svgDocument(xOffset, height, body) };
}

// --- line-with-band (fig2a / fig2b) ----------------------------------------

const LINE_W = 560;
const LINE_H = 360;
const MARGIN = 48;

export function buildLineWithBand(parsed: ParsedCsv, xColumn: string):
    { data: LineSeries[]; svg: string } {
    const rows = parsed.rows.map((row) => ({
        authors: numeric(parsed, "authors", row),
        x: numeric(parsed, xColumn, row),
        mean: numeric(parsed, "mean", row),
        std: numeric(parsed, "std", row),
    }));
    const xLo = Math.min(...rows.map((r) => r.x));
    const xHi = Math.max(...rows.map((r) => r.x));
    const xScale = linearScale(xLo, xHi, MARGIN, LINE_W - MARGIN);
    const yScale = linearScale(0, 1, LINE_H - MARGIN, MARGIN);

    const series: LineSeries[] = [];
    const body: string[] = [];
    body.push(el("line", {
        x1: MARGIN, y1: LINE_H - MARGIN, x2: LINE_W - MARGIN, y2: LINE_H - MARGIN,
        stroke: "#333",
    }));
    body.push(el("line", {
        x1: MARGIN, y1: MARGIN, x2: MARGIN, y2: LINE_H - MARGIN, stroke: "#333",
    }));
    const byAuthors = groupBy(rows, (r) => r.authors);
    sortedKeys(byAuthors).forEach((authors, seriesIndex) => {
        const points = byAuthors.get(authors)!.slice().sort((a, b) => a.x - b.x);
        const color = SERIES_COLORS[seriesIndex % SERIES_COLORS.length];
        const screenPoints = points.map(
            (p) => [xScale(p.x), yScale(p.mean)] as [number, number]);
        const bandTop = points.map((p) => `${xScale(p.x)},${yScale(Math.min(1, p.mean + p.std))}`);
        const bandBottom = points
            .slice()
            .reverse()
            .map((p) => `${xScale(p.x)},${yScale(Math.max(0, p.mean - p.std))}`);
        body.push(el("polygon", {
            class: "band",
            points: [...bandTop, ...bandBottom].join(" "),
            fill: color,
            opacity: 0.15,
        }));
        body.push(el("polyline", {
            class: "mean-line",
            points: screenPoints.map(([x, y]) => `${x},${y}`).join(" "),
            fill: "none",
            stroke: color,
            "stroke-width": 1.5,
        }));
        body.push(el("text", {
            x: LINE_W - MARGIN + 4,
            y: screenPoints[screenPoints.length - 1][1] + 4,
            fill: color,
        }, `${authors}`));
        series.push({
            authors,
            x: points.map((p) => p.x),
            mean: points.map((p) => p.mean),
            std: points.map((p) => p.std),
            screenPoints,
        });
    });
    body.push(el("text", { x: MARGIN, y: LINE_H - 12 }, xColumn));
    body.push(el("text", { x: 8, y: MARGIN - 8 }, "issuance rate (mean ± std)"));
    return { data: series, svg: svgDocument(LINE_W + 32, LINE_H, body) };
}

// --- bar-with-error (fig3) ---------------------------------------------------

const BAR_W = 40;
const BAR_GAP = 14;
const BAR_H = 320;

export function buildBarWithError(parsed: ParsedCsv): { data: BarData; svg: string } {
    const cases = parsed.rows.map((row) => text(parsed, "case", row));
    const means = parsed.rows.map((row) => numeric(parsed, "mean", row));
    const stds = parsed.rows.map((row) => numeric(parsed, "std", row));
    const yScale = linearScale(0, 1, BAR_H - MARGIN, MARGIN);
    const body: string[] = [];
    body.push(el("line", {
        x1: MARGIN, y1: yScale(0), x2: MARGIN + cases.length * (BAR_W + BAR_GAP),
        y2: yScale(0), stroke: "#333",
    }));
    cases.forEach((caseId, i) => {
        const x = MARGIN + BAR_GAP + i * (BAR_W + BAR_GAP);
        const top = yScale(means[i]);
        body.push(el("rect", {
            class: "bar",
            x,
            y: top,
            width: BAR_W,
            height: yScale(0) - top,
            fill: rampColor(means[i]),
        }));
        const hi = yScale(Math.min(1, means[i] + stds[i]));
        const lo = yScale(Math.max(0, means[i] - stds[i]));
        const cx = x + BAR_W / 2;
        body.push(el("line", {
            class: "whisker", x1: cx, y1: hi, x2: cx, y2: lo, stroke: "#333",
        }));
        body.push(el("line", { x1: cx - 6, y1: hi, x2: cx + 6, y2: hi, stroke: "#333" }));
        body.push(el("line", { x1: cx - 6, y1: lo, x2: cx + 6, y2: lo, stroke: "#333" }));
        body.push(el("text", { x, y: yScale(0) + 14 }, caseId));
    });
    const width = MARGIN * 2 + cases.length * (BAR_W + BAR_GAP) + BAR_GAP;
    body.push(el("text", { x: 8, y: MARGIN - 8 }, "issuance rate (mean ± std)"));
    return { data: { cases, means, stds }, svg: svgDocument(width, BAR_H + 16, body) };
}

// --- position-matrix (fig2c) -------------------------------------------------

export function buildPositionMatrix(parsed: ParsedCsv): { data: MatrixData; svg: string } {
    const rows = parsed.rows.map((row) => ({
        authors: numeric(parsed, "authors", row),
        position: numeric(parsed, "position", row),
        rate: numeric(parsed, "rate", row),
    }));
    const byAuthors = groupBy(rows, (r) => r.authors);
    const authors = sortedKeys(byAuthors);
    const maxPosition = Math.max(...rows.map((r) => r.position));
    const rates: Array<Array<number | null>> = authors.map((a) => {
        const line: Array<number | null> = Array.from({ length: maxPosition }, () => null);
        for (const cell of byAuthors.get(a)!) {
            line[cell.position - 1] = cell.rate;
        }
        return line;
    });
    const maxRate = Math.max(...rows.map((r) => r.rate), 1e-12);

    const body: string[] = [];
    authors.forEach((a, i) => {
        body.push(el("text", { x: 10, y: PANEL_PAD + i * CELL + 20 }, `${a}`));
        rates[i].forEach((rate, p) => {
            if (rate === null) {
                return;
            }
            body.push(el("rect", {
                class: "cell",
                x: PANEL_PAD + p * CELL,
                y: PANEL_PAD + i * CELL,
                width: CELL - 1,
                height: CELL - 1,
                fill: rampColor(rate / maxRate),
            }));
        });
    });
    for (let p = 0; p < maxPosition; p++) {
        body.push(el("text", { x: PANEL_PAD + p * CELL + 10, y: PANEL_PAD - 8 }, `${p + 1}`));
    }
    body.push(el("text", { x: 10, y: PANEL_PAD - 28 },
        "issuance rate by author count (rows) and starting position (columns)"));
    const width = PANEL_PAD * 2 + maxPosition * CELL;
    const height = PANEL_PAD + authors.length * CELL + 24;
    return { data: { authors, maxPosition, rates }, svg: svgDocument(width, height, body) };
}

// --- dispatch ----------------------------------------------------------------

export function build(kind: FigureKind, csvText: string): BuildResult {
    const parsed = parseCsv(csvText);
    const schema = schemaForKind(kind, parsed);
    switch (kind) {
        case "heatmap-grid": {
            const { data, svg } = buildHeatmapGrid(parsed);
            return { kind, schema, data, svg };
        }
        case "line-with-band": {
            const xColumn = schema === "fig2a" ? "duration_weeks" : "progress";
            const { data, svg } = buildLineWithBand(parsed, xColumn);
            return { kind, schema, data, svg };
        }
        case "bar-with-error": {
            const { data, svg } = buildBarWithError(parsed);
            return { kind, schema, data, svg };
        }
        case "position-matrix": {
            const { data, svg } = buildPositionMatrix(parsed);
            return { kind, schema, data, svg };
        }
    }
}
