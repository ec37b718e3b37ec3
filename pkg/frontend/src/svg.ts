// Minimal deterministic SVG building blocks: no DOM, no randomness.

export function linearScale(
    domainLo: number, domainHi: number, rangeLo: number, rangeHi: number,
): (v: number) => number {
    const span = domainHi - domainLo;
    return (v: number) => {
        const t = span === 0 ? 0.5 : (v - domainLo) / span;
        return rangeLo + t * (rangeHi - rangeLo);
    };
}

// Three-anchor approximation of a perceptual dark-to-bright ramp.
const RAMP: Array<[number, number, number]> = [
    [68, 1, 84],
    [33, 145, 140],
    [253, 231, 37],
];

export function rampColor(t: number): string {
    const clamped = Math.max(0, Math.min(1, t));
    const scaled = clamped * (RAMP.length - 1);
    const i = Math.min(RAMP.length - 2, Math.floor(scaled));
    const frac = scaled - i;
    const mix = RAMP[i].map((c, ch) => Math.round(c + frac * (RAMP[i + 1][ch] - c)));
    return `rgb(${mix[0]},${mix[1]},${mix[2]})`;
}

export function fmt(value: number): string {
    return Number.isInteger(value) ? String(value) : value.toFixed(2);
}

export function el(tag: string, attrs: Record<string, string | number>, body = ""): string {
    const rendered = Object.entries(attrs)
        .map(([k, v]) => `${k}="${v}"`)
        .join(" ");
    return body === "" ? `<${tag} ${rendered}/>` : `<${tag} ${rendered}>${body}</${tag}>`;
}

export function svgDocument(width: number, height: number, body: string[]): string {
    return [
        `<svg xmlns="http://www.w3.org/2000/svg" width="${width}" height="${height}" ` +
        `viewBox="0 0 ${width} ${height}" font-family="monospace" font-size="10">`,
        ...body,
        "</svg>",
        "",
    ].join("\n");
}

export const SERIES_COLORS = [
    "#4053d3", "#ddb310", "#b51d14", "#00beff", "#fb49b0", "#00b25d", "#cacaca",
];
