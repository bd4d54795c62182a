/**
 * The five figure specs rendered from result CSVs.
 *
 * Every plotted point and bar carries data-series / data-x / data-y
 * attributes holding the untouched CSV strings, so the rendered values can
 * be verified against the source file byte for byte.
 */

import {
  ColumnName,
  CsvError,
  ResultRow,
  protocolSeries,
  protocolsIn,
} from "./csv";
import { Frame, SvgDoc, drawAxes, linearScale, round2 } from "./svg";

export const FIGURE_NAMES = [
  "delay-fixed",
  "delay-random",
  "goodput-low",
  "delay-high",
  "goodput-completion-high",
] as const;

export type FigureName = (typeof FIGURE_NAMES)[number];

/** Fixed per-protocol colors so every figure reads the same way. */
const PROTOCOL_COLORS: Record<string, string> = {
  rlnc: "#1f77b4",
  baseline: "#d62728",
};

const FALLBACK_COLOR = "#7f7f7f";

const WIDTH = 720;
const HEIGHT = 460;
const FRAME: Frame = { x0: 64, y0: 40, x1: WIDTH - 16, y1: HEIGHT - 56 };

function color(protocol: string): string {
  return PROTOCOL_COLORS[protocol] ?? FALLBACK_COLOR;
}

function title(doc: SvgDoc, text: string): void {
  doc.text(WIDTH / 2, 20, text, {
    "text-anchor": "middle",
    "font-size": 14,
    "font-weight": "bold",
  });
}

interface LineSeries {
  protocol: string;
  column: ColumnName;
  label: string;
  dashed: boolean;
  band?: ColumnName; // +/- one column value around the line
}

function xDomain(rows: ResultRow[]): [number, number] {
  const xs = rows.map((r) => r.slicingIndex);
  return [Math.min(...xs), Math.max(...xs)];
}

function markPoints(
  doc: SvgDoc,
  rows: ResultRow[],
  series: LineSeries,
  xScale: (v: number) => number,
  yScale: (v: number) => number,
): void {
  for (const row of rows) {
    doc.circle(xScale(row.slicingIndex), yScale(row.num(series.column)), 3, {
      fill: color(series.protocol),
      class: "pt",
      "data-series": `${series.protocol}:${series.column}`,
      "data-x": row.raw["slicing_index"],
      "data-y": row.raw[series.column],
    });
  }
}

function legend(doc: SvgDoc, entries: Array<{ label: string; colorValue: string; dashed: boolean }>): void {
  let y = FRAME.y0 + 8;
  const x = FRAME.x0 + 12;
  for (const entry of entries) {
    doc.line(x, y, x + 22, y, {
      stroke: entry.colorValue,
      "stroke-width": 2,
      ...(entry.dashed ? { "stroke-dasharray": "5,3" } : {}),
    });
    doc.text(x + 28, y + 3.5, entry.label);
    y += 16;
  }
}

function renderLines(
  rows: ResultRow[],
  seriesList: LineSeries[],
  figureTitle: string,
  yLabel: string,
): string {
  const doc = new SvgDoc(WIDTH, HEIGHT);
  title(doc, figureTitle);

  let yMin = Infinity;
  let yMax = -Infinity;
  const perSeries = seriesList.map((s) => {
    const data = protocolSeries(rows, s.protocol);
    for (const row of data) {
      const v = row.num(s.column);
      const half = s.band ? row.num(s.band) : 0;
      yMin = Math.min(yMin, v - half);
      yMax = Math.max(yMax, v + half);
    }
    return { series: s, data };
  });
  const present = perSeries.filter((p) => p.data.length > 0);
  if (present.length === 0) {
    throw new CsvError("no rows match the protocols this figure plots");
  }

  const xScale = linearScale(xDomain(rows), [FRAME.x0, FRAME.x1]);
  const pad = (yMax - yMin || 2) * 0.08;
  const yScale = linearScale([Math.max(0, yMin - pad), yMax + pad], [FRAME.y1, FRAME.y0]);

  const xs = [...new Set(rows.map((r) => r.slicingIndex))].sort((a, b) => a - b);
  drawAxes(doc, FRAME, xScale, yScale, "slicing index (links in slice 1)",
    yLabel, xs.length <= 21 ? xs : undefined);

  for (const { series, data } of present) {
    if (series.band) {
      const upper = data.map((r): [number, number] => [
        xScale(r.slicingIndex),
        yScale(r.num(series.column) + r.num(series.band!)),
      ]);
      const lower = data
        .map((r): [number, number] => [
          xScale(r.slicingIndex),
          yScale(r.num(series.column) - r.num(series.band!)),
        ])
        .reverse();
      doc.polygon([...upper, ...lower], {
        fill: color(series.protocol),
        "fill-opacity": "0.15",
        stroke: "none",
        class: "band",
        "data-series": `${series.protocol}:${series.column}-band`,
      });
    }
  }
  for (const { series, data } of present) {
    doc.polyline(
      data.map((r): [number, number] => [
        xScale(r.slicingIndex),
        yScale(r.num(series.column)),
      ]),
      {
        stroke: color(series.protocol),
        "stroke-width": 2,
        ...(series.dashed ? { "stroke-dasharray": "5,3" } : {}),
      },
    );
    markPoints(doc, data, series, xScale, yScale);
  }
  legend(
    doc,
    present.map(({ series }) => ({
      label: series.label,
      colorValue: color(series.protocol),
      dashed: series.dashed,
    })),
  );
  return doc.toString();
}

function protocolLabel(protocol: string): string {
  return protocol === "rlnc" ? "network coding" : protocol;
}

function delaySeries(rows: ResultRow[]): LineSeries[] {
  return protocolsIn(rows).flatMap((p): LineSeries[] => [
    {
      protocol: p,
      column: "mean_iod",
      label: `${protocolLabel(p)} IOD (±1 std dev)`,
      dashed: false,
      band: "iod_stddev",
    },
    {
      protocol: p,
      column: "mean_ppd",
      label: `${protocolLabel(p)} PPD`,
      dashed: true,
    },
  ]);
}

function renderGroupedBars(
  doc: SvgDoc,
  frame: Frame,
  rows: ResultRow[],
  column: ColumnName,
  yLabel: string,
  panelTitle: string,
): void {
  const protocols = protocolsIn(rows);
  const xs = [...new Set(rows.map((r) => r.slicingIndex))].sort((a, b) => a - b);
  let yMax = -Infinity;
  for (const row of rows) {
    yMax = Math.max(yMax, row.num(column));
  }
  const yScale = linearScale([0, yMax * 1.08 || 1], [frame.y1, frame.y0]);
  const slotWidth = (frame.x1 - frame.x0) / xs.length;
  const barWidth = Math.min(18, (slotWidth * 0.8) / protocols.length);

  const centers: number[] = [];
  xs.forEach((xv, i) => {
    const center = frame.x0 + slotWidth * (i + 0.5);
    centers.push(center);
    const group = rows.filter((r) => r.slicingIndex === xv);
    protocols.forEach((p, j) => {
      const row = group.find((r) => r.protocol === p);
      if (!row) {
        return;
      }
      const v = row.num(column);
      const x = center + (j - (protocols.length - 1) / 2) * barWidth - barWidth / 2;
      doc.rect(x, yScale(v), barWidth, frame.y1 - yScale(v), {
        fill: color(p),
        class: "bar",
        "data-series": `${p}:${column}`,
        "data-x": row.raw["slicing_index"],
        "data-y": row.raw[column],
      });
    });
  });

  const axisStyle = { stroke: "#333", "stroke-width": 1 };
  doc.line(frame.x0, frame.y1, frame.x1, frame.y1, axisStyle);
  doc.line(frame.x0, frame.y0, frame.x0, frame.y1, axisStyle);
  xs.forEach((xv, i) => {
    doc.text(centers[i], frame.y1 + 14, String(xv), { "text-anchor": "middle" });
  });
  for (const t of [0, yMax / 2, yMax]) {
    const y = yScale(t);
    doc.line(frame.x0 - 4, y, frame.x0, y, axisStyle);
    doc.text(frame.x0 - 7, y + 3.5, round2(t), { "text-anchor": "end" });
  }
  doc.text((frame.x0 + frame.x1) / 2, frame.y1 + 30,
    "slicing index (links in slice 1)", { "text-anchor": "middle" });
  doc.push(
    `<text x="${round2(frame.x0 - 40)}" y="${round2((frame.y0 + frame.y1) / 2)}" text-anchor="middle" font-size="12" transform="rotate(-90 ${round2(frame.x0 - 40)} ${round2((frame.y0 + frame.y1) / 2)})">${yLabel}</text>`,
  );
  doc.text((frame.x0 + frame.x1) / 2, frame.y0 - 8, panelTitle, {
    "text-anchor": "middle",
    "font-weight": "bold",
  });
}

function renderGoodputCompletion(rows: ResultRow[]): string {
  const width = 980;
  const doc = new SvgDoc(width, HEIGHT);
  title(doc, "goodput and completion time");
  const left: Frame = { x0: 64, y0: 56, x1: width / 2 - 24, y1: HEIGHT - 56 };
  const right: Frame = { x0: width / 2 + 56, y0: 56, x1: width - 16, y1: HEIGHT - 56 };
  renderGroupedBars(doc, left, rows, "goodput", "goodput (packets/slot)", "goodput");
  renderGroupedBars(doc, right, rows, "completion_time", "completion time (slots)",
    "completion time");
  const protocols = protocolsIn(rows);
  let x = left.x0;
  for (const p of protocols) {
    doc.rect(x, HEIGHT - 20, 12, 12, { fill: color(p) });
    doc.text(x + 16, HEIGHT - 10, protocolLabel(p));
    x += 140;
  }
  return doc.toString();
}

export function render(figure: FigureName, rows: ResultRow[]): string {
  switch (figure) {
    case "delay-fixed":
      return renderLines(rows, delaySeries(rows),
        "in-order and per-packet delivery delay (fixed channel)",
        "delay (slots)");
    case "delay-random":
      return renderLines(rows, delaySeries(rows),
        "in-order and per-packet delivery delay (randomized channel)",
        "delay (slots)");
    case "delay-high":
      return renderLines(rows, delaySeries(rows),
        "in-order and per-packet delivery delay (high RTT)",
        "delay (slots)");
    case "goodput-low":
      return renderLines(
        rows,
        protocolsIn(rows).map((p): LineSeries => ({
          protocol: p,
          column: "goodput",
          label: `${protocolLabel(p)} goodput`,
          dashed: false,
        })),
        "goodput vs slicing index",
        "goodput (packets/slot)",
      );
    case "goodput-completion-high":
      return renderGoodputCompletion(rows);
    default: {
      const exhaustive: never = figure;
      throw new CsvError(`unknown figure ${exhaustive}`);
    }
  }
}
