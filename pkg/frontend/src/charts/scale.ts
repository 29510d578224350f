/** Shared chart helpers: the score axis, level colors, SVG assembly. */

export interface Margin {
  top: number;
  right: number;
  bottom: number;
  left: number;
}

export function scoreToX(
  score: number,
  width: number,
  margin: Margin,
): number {
  const inner = width - margin.left - margin.right;
  return margin.left + Math.min(1, Math.max(0, score)) * inner;
}

/** Quantile level color: low levels blue, high levels green. */
export function levelColor(level: number): string {
  const t = Math.min(1, Math.max(0, level));
  const from = [31, 119, 180]; // blue
  const to = [44, 160, 44]; // green
  const rgb = from.map((f, i) => Math.round(f + t * ((to[i] ?? 0) - f)));
  return `rgb(${rgb[0]},${rgb[1]},${rgb[2]})`;
}

export function svgDocument(width: number, height: number, body: string): string {
  return (
    `<svg xmlns="http://www.w3.org/2000/svg" viewBox="0 0 ${width} ${height}" ` +
    `width="${width}" height="${height}" role="img">${body}</svg>`
  );
}

export function escapeXml(text: string): string {
  return text
    .replace(/&/g, "&amp;")
    .replace(/</g, "&lt;")
    .replace(/>/g, "&gt;")
    .replace(/"/g, "&quot;");
}

export function formatScore(value: number): string {
  return value.toFixed(3);
}
