/** Minimal SVG line charts; the only client-side computation the dashboard
 * performs is scaling delivered series to pixels. */

export interface ChartOptions {
  width?: number;
  height?: number;
  stroke?: string;
  label?: string;
}

export function lineChart(values: number[], options: ChartOptions = {}): string {
  const width = options.width ?? 320;
  const height = options.height ?? 90;
  const stroke = options.stroke ?? "#3a86ff";
  if (values.length === 0) {
    return `<svg class="chart" width="${width}" height="${height}"><text x="8" y="20" class="empty">no data</text></svg>`;
  }
  const min = Math.min(...values);
  const max = Math.max(...values);
  const span = max - min || 1;
  const pad = 6;
  const step = values.length > 1 ? (width - 2 * pad) / (values.length - 1) : 0;
  const points = values
    .map((v, i) => {
      const x = pad + i * step;
      const y = height - pad - ((v - min) / span) * (height - 2 * pad);
      return `${x.toFixed(1)},${y.toFixed(1)}`;
    })
    .join(" ");
  const label = options.label
    ? `<text x="8" y="14" class="chart-label">${options.label}</text>`
    : "";
  return (
    `<svg class="chart" width="${width}" height="${height}" viewBox="0 0 ${width} ${height}">` +
    `${label}<polyline fill="none" stroke="${stroke}" stroke-width="1.5" points="${points}"/>` +
    `<text x="${width - 4}" y="14" text-anchor="end" class="chart-max">${fmt(max)}</text>` +
    `<text x="${width - 4}" y="${height - 2}" text-anchor="end" class="chart-min">${fmt(min)}</text>` +
    `</svg>`
  );
}

function fmt(value: number): string {
  return Number.isInteger(value) ? String(value) : value.toFixed(1);
}
