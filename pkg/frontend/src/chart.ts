import { decimate, type Point } from "./decimate.js";

export interface YDomain {
  min: number;
  max: number;
}

export interface ChartOptions {
  width?: number;
  height?: number;
  color?: string;
  strokeWidth?: number;
  domain?: YDomain;
  pointLimit?: number;
}

const DEFAULTS = { width: 360, height: 120, color: "#2563eb", strokeWidth: 1.5 };

/** Shared y-domain across several series (with a small margin). */
export function sharedDomain(...series: number[][]): YDomain {
  let min = Infinity;
  let max = -Infinity;
  for (const s of series) {
    for (const v of s) {
      if (v < min) min = v;
      if (v > max) max = v;
    }
  }
  if (!isFinite(min) || !isFinite(max)) {
    return { min: 0, max: 1 };
  }
  const pad = (max - min || 1) * 0.05;
  return { min: min - pad, max: max + pad };
}

export function toPolylinePoints(points: Point[], xMax: number, domain: YDomain,
                                 width: number, height: number): string {
  const span = domain.max - domain.min || 1;
  return points
    .map((p) => {
      const px = (p.x / Math.max(1, xMax)) * width;
      const py = height - ((p.y - domain.min) / span) * height;
      return `${px.toFixed(2)},${py.toFixed(2)}`;
    })
    .join(" ");
}

export function polylineFor(values: number[], options: ChartOptions = {}): string {
  const { width, height, color, strokeWidth } = { ...DEFAULTS, ...options };
  const domain = options.domain ?? sharedDomain(values);
  const points = decimate(values, options.pointLimit ?? 2000);
  const attr = toPolylinePoints(points, values.length - 1, domain, width, height);
  return `<polyline fill="none" stroke="${color}" stroke-width="${strokeWidth}" points="${attr}"/>`;
}

/** Standalone SVG line chart for one or more series sharing one y-scale. */
export function lineChart(seriesList: { values: number[]; color?: string; strokeWidth?: number }[],
                          options: ChartOptions = {}): string {
  const { width, height } = { ...DEFAULTS, ...options };
  const domain = options.domain ?? sharedDomain(...seriesList.map((s) => s.values));
  const lines = seriesList
    .map((s) => polylineFor(s.values, {
      ...options, domain, color: s.color ?? options.color ?? DEFAULTS.color,
      strokeWidth: s.strokeWidth ?? options.strokeWidth,
    }))
    .join("");
  return `<svg class="chart" viewBox="0 0 ${width} ${height}" preserveAspectRatio="none" role="img">${lines}</svg>`;
}
