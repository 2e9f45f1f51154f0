/** Minimal deterministic SVG plotting: fixed layout, no timestamps, byte-stable
 * output for identical inputs. */

export const WIDTH = 640;
export const HEIGHT = 420;
export const MARGIN = { left: 64, right: 16, top: 28, bottom: 44 };

export const PALETTE = [
  "#1f77b4", "#ff7f0e", "#2ca02c", "#d62728",
  "#9467bd", "#8c564b", "#e377c2", "#7f7f7f",
];

export type Scale = (value: number) => number;

function fmt(value: number): string {
  return Number(value.toPrecision(6)).toString();
}

export function linearScale(
  lo: number, hi: number, outLo: number, outHi: number,
): Scale {
  const span = hi - lo || 1;
  return (v) => outLo + ((v - lo) / span) * (outHi - outLo);
}

export function logScale(
  lo: number, hi: number, outLo: number, outHi: number,
): Scale {
  if (lo <= 0) {
    throw new Error(`log scale requires positive domain, got [${lo}, ${hi}]`);
  }
  const inner = linearScale(Math.log10(lo), Math.log10(hi), outLo, outHi);
  return (v) => inner(Math.log10(v));
}

export function ticks(lo: number, hi: number, count = 5): number[] {
  const span = hi - lo || 1;
  const step = Math.pow(10, Math.floor(Math.log10(span / count)));
  const mult = [1, 2, 5, 10].find((m) => span / (step * m) <= count) ?? 10;
  const inc = step * mult;
  const start = Math.ceil(lo / inc) * inc;
  const out: number[] = [];
  for (let v = start; v <= hi + inc * 1e-9; v += inc) {
    out.push(Number(v.toPrecision(12)));
  }
  return out;
}

export function logTicks(lo: number, hi: number): number[] {
  const out: number[] = [];
  for (let e = Math.ceil(Math.log10(lo)); Math.pow(10, e) <= hi * (1 + 1e-9); e++) {
    out.push(Math.pow(10, e));
  }
  return out;
}

export class Figure {
  private parts: string[] = [];

  constructor(
    readonly width = WIDTH,
    readonly height = HEIGHT,
  ) {}

  polyline(
    xs: number[], ys: number[], sx: Scale, sy: Scale,
    stroke: string, dash = "",
  ): void {
    const pts: string[] = [];
    for (let i = 0; i < xs.length; i++) {
      if (!Number.isFinite(xs[i]) || !Number.isFinite(ys[i])) continue;
      pts.push(`${fmt(sx(xs[i]))},${fmt(sy(ys[i]))}`);
    }
    const dashAttr = dash ? ` stroke-dasharray="${dash}"` : "";
    this.parts.push(
      `<polyline fill="none" stroke="${stroke}" stroke-width="1.5"` +
      `${dashAttr} points="${pts.join(" ")}"/>`,
    );
  }

  circle(x: number, y: number, r: number, fill: string): void {
    this.parts.push(
      `<circle cx="${fmt(x)}" cy="${fmt(y)}" r="${r}" fill="${fill}"/>`,
    );
  }

  text(x: number, y: number, content: string, anchor = "middle", size = 12): void {
    this.parts.push(
      `<text x="${fmt(x)}" y="${fmt(y)}" text-anchor="${anchor}"` +
      ` font-family="sans-serif" font-size="${size}">${escapeXml(content)}</text>`,
    );
  }

  line(x1: number, y1: number, x2: number, y2: number, stroke: string): void {
    this.parts.push(
      `<line x1="${fmt(x1)}" y1="${fmt(y1)}" x2="${fmt(x2)}" y2="${fmt(y2)}"` +
      ` stroke="${stroke}" stroke-width="1"/>`,
    );
  }

  /** Axis frame plus tick marks and labels. */
  axes(
    sx: Scale, sy: Scale,
    xTicks: number[], yTicks: number[],
    xLabel: string, yLabel: string,
    yFormat: (v: number) => string = fmt,
    area?: Area,
  ): void {
    const a = area ?? plotArea(this.width, this.height);
    const x0 = a.x0, x1 = a.x1;
    const y0 = a.y0, y1 = a.y1;
    this.line(x0, y0, x1, y0, "#333");
    this.line(x0, y0, x0, y1, "#333");
    for (const t of xTicks) {
      const px = sx(t);
      this.line(px, y0, px, y0 + 4, "#333");
      this.text(px, y0 + 18, fmt(t));
    }
    for (const t of yTicks) {
      const py = sy(t);
      this.line(x0 - 4, py, x0, py, "#333");
      this.text(x0 - 8, py + 4, yFormat(t), "end", 11);
    }
    this.text((x0 + x1) / 2, y0 + 36, xLabel);
    this.parts.push(
      `<text x="14" y="${(y0 + y1) / 2}" text-anchor="middle"` +
      ` font-family="sans-serif" font-size="12"` +
      ` transform="rotate(-90 14 ${(y0 + y1) / 2})">${escapeXml(yLabel)}</text>`,
    );
  }

  legend(labels: string[], colors: string[]): void {
    const x = this.width - MARGIN.right - 150;
    labels.forEach((label, i) => {
      const y = MARGIN.top + 14 + i * 16;
      this.line(x, y - 4, x + 18, y - 4, colors[i]);
      this.text(x + 24, y, label, "start", 11);
    });
  }

  title(content: string): void {
    this.text(this.width / 2, 18, content, "middle", 13);
  }

  render(): string {
    return (
      `<svg xmlns="http://www.w3.org/2000/svg" width="${this.width}"` +
      ` height="${this.height}" viewBox="0 0 ${this.width} ${this.height}">\n` +
      `<rect width="${this.width}" height="${this.height}" fill="white"/>\n` +
      this.parts.join("\n") +
      "\n</svg>\n"
    );
  }
}

function escapeXml(text: string): string {
  return text
    .replace(/&/g, "&amp;")
    .replace(/</g, "&lt;")
    .replace(/>/g, "&gt;");
}

export interface Area {
  x0: number;
  x1: number;
  y0: number;
  y1: number;
}

export function plotArea(width = WIDTH, height = HEIGHT): Area {
  return {
    x0: MARGIN.left,
    x1: width - MARGIN.right,
    y0: height - MARGIN.bottom,
    y1: MARGIN.top,
  };
}
