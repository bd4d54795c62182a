/**
 * Minimal deterministic SVG builder: linear scales, tick generation, and
 * the handful of shapes the figures need. No timestamps, no generated ids,
 * so identical inputs produce identical bytes.
 */

export interface Scale {
  (value: number): number;
  domain: [number, number];
  range: [number, number];
}

export function linearScale(domain: [number, number], range: [number, number]): Scale {
  let [d0, d1] = domain;
  if (d0 === d1) {
    // degenerate domain (single-point data): pad so the point sits centered
    d0 -= 1;
    d1 += 1;
  }
  const f = ((value: number) =>
    range[0] + ((value - d0) / (d1 - d0)) * (range[1] - range[0])) as Scale;
  f.domain = [d0, d1];
  f.range = range;
  return f;
}

/** Round ticks covering [min, max], roughly `count` of them. */
export function niceTicks(min: number, max: number, count = 5): number[] {
  if (min === max) {
    return [min];
  }
  const span = max - min;
  const rawStep = span / Math.max(1, count);
  const magnitude = Math.pow(10, Math.floor(Math.log10(rawStep)));
  let step = magnitude;
  for (const mult of [1, 2, 5, 10]) {
    if (magnitude * mult >= rawStep) {
      step = magnitude * mult;
      break;
    }
  }
  const ticks: number[] = [];
  for (let v = Math.ceil(min / step) * step; v <= max + step * 1e-9; v += step) {
    ticks.push(Number(v.toPrecision(12)));
  }
  return ticks;
}

export function formatTick(value: number): string {
  if (Number.isInteger(value)) {
    return String(value);
  }
  return String(Number(value.toPrecision(6)));
}

const XML_ESCAPES: Record<string, string> = {
  "&": "&amp;",
  "<": "&lt;",
  ">": "&gt;",
  '"': "&quot;",
};

export function escapeXml(text: string): string {
  return text.replace(/[&<>"]/g, (c) => XML_ESCAPES[c]);
}

function attrs(pairs: Record<string, string | number>): string {
  return Object.entries(pairs)
    .map(([k, v]) => `${k}="${typeof v === "number" ? round2(v) : escapeXml(v)}"`)
    .join(" ");
}

export function round2(value: number): string {
  return String(Math.round(value * 100) / 100);
}

export class SvgDoc {
  private parts: string[] = [];

  constructor(
    readonly width: number,
    readonly height: number,
  ) {}

  push(element: string): void {
    this.parts.push(element);
  }

  line(x1: number, y1: number, x2: number, y2: number, style: Record<string, string | number>): void {
    this.push(`<line ${attrs({ x1, y1, x2, y2, ...style })}/>`);
  }

  polyline(points: Array<[number, number]>, style: Record<string, string | number>): void {
    const pts = points.map(([x, y]) => `${round2(x)},${round2(y)}`).join(" ");
    this.push(`<polyline points="${pts}" fill="none" ${attrs(style)}/>`);
  }

  polygon(points: Array<[number, number]>, style: Record<string, string | number>): void {
    const pts = points.map(([x, y]) => `${round2(x)},${round2(y)}`).join(" ");
    this.push(`<polygon points="${pts}" ${attrs(style)}/>`);
  }

  circle(cx: number, cy: number, r: number, style: Record<string, string | number>): void {
    this.push(`<circle ${attrs({ cx, cy, r, ...style })}/>`);
  }

  rect(x: number, y: number, w: number, h: number, style: Record<string, string | number>): void {
    this.push(`<rect ${attrs({ x, y, width: w, height: h, ...style })}/>`);
  }

  text(x: number, y: number, content: string, style: Record<string, string | number> = {}): void {
    this.push(`<text ${attrs({ x, y, ...style })}>${escapeXml(content)}</text>`);
  }

  toString(): string {
    return [
      `<svg xmlns="http://www.w3.org/2000/svg" width="${this.width}" height="${this.height}" viewBox="0 0 ${this.width} ${this.height}" font-family="Helvetica, Arial, sans-serif" font-size="11">`,
      `<rect x="0" y="0" width="${this.width}" height="${this.height}" fill="white"/>`,
      ...this.parts,
      "</svg>",
    ].join("\n");
  }
}

export interface Frame {
  x0: number;
  y0: number;
  x1: number;
  y1: number;
}

/** Axes with ticks, tick labels, and axis titles around a plot frame. */
export function drawAxes(
  doc: SvgDoc,
  frame: Frame,
  xScale: Scale,
  yScale: Scale,
  xLabel: string,
  yLabel: string,
  xTicks?: number[],
): void {
  const axisStyle = { stroke: "#333", "stroke-width": 1 };
  doc.line(frame.x0, frame.y1, frame.x1, frame.y1, axisStyle);
  doc.line(frame.x0, frame.y0, frame.x0, frame.y1, axisStyle);
  const xs = xTicks ?? niceTicks(xScale.domain[0], xScale.domain[1], 8);
  for (const t of xs) {
    const x = xScale(t);
    doc.line(x, frame.y1, x, frame.y1 + 4, axisStyle);
    doc.text(x, frame.y1 + 16, formatTick(t), { "text-anchor": "middle" });
  }
  for (const t of niceTicks(yScale.domain[0], yScale.domain[1], 5)) {
    const y = yScale(t);
    doc.line(frame.x0 - 4, y, frame.x0, y, axisStyle);
    doc.line(frame.x0, y, frame.x1, y, {
      stroke: "#ddd",
      "stroke-width": 0.5,
    });
    doc.text(frame.x0 - 7, y + 3.5, formatTick(t), { "text-anchor": "end" });
  }
  doc.text((frame.x0 + frame.x1) / 2, frame.y1 + 32, xLabel, {
    "text-anchor": "middle",
    "font-size": 12,
  });
  doc.push(
    `<text x="${round2(frame.x0 - 38)}" y="${round2((frame.y0 + frame.y1) / 2)}" text-anchor="middle" font-size="12" transform="rotate(-90 ${round2(frame.x0 - 38)} ${round2((frame.y0 + frame.y1) / 2)})">${escapeXml(yLabel)}</text>`,
  );
}
