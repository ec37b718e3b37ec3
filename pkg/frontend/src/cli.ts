// Render one result CSV to an SVG file:
//   node dist/cli.js <input.csv> --kind <figure-kind> --out <output.svg>

import { readFileSync, writeFileSync } from "node:fs";
import { FIGURE_KINDS, FigureKind } from "./csv";
import { build } from "./charts";

export function main(argv: string[]): number {
    let input: string | null = null;
    let kind: string | null = null;
    let out: string | null = null;
    for (let i = 0; i < argv.length; i++) {
        const arg = argv[i];
        if (arg === "--kind") {
            kind = argv[++i] ?? null;
        } else if (arg === "--out") {
            out = argv[++i] ?? null;
        } else if (!arg.startsWith("--") && input === null) {
            input = arg;
        } else {
            console.error(`unexpected argument: ${arg}`);
            return 2;
        }
    }
    if (input === null || kind === null || out === null) {
        console.error("usage: cli.js <input.csv> --kind <kind> --out <output.svg>");
        console.error(`kinds: ${FIGURE_KINDS.join(", ")}`);
        return 2;
    }
    if (!FIGURE_KINDS.includes(kind as FigureKind)) {
        console.error(`unknown figure kind '${kind}'; expected one of ${FIGURE_KINDS.join(", ")}`);
        return 2;
    }
    try {
        const result = build(kind as FigureKind, readFileSync(input, "utf-8"));
        writeFileSync(out, result.svg, "utf-8");
        console.log(`wrote ${out} (schema ${result.schema})`);
        return 0;
    } catch (error) {
        console.error(`error: ${error instanceof Error ? error.message : error}`);
        return 1;
    }
}

if (require.main === module) {
    process.exit(main(process.argv.slice(2)));
}
