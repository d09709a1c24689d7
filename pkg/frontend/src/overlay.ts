// Geometry and colors for bounding-box overlays. Boxes arrive normalized
// to [0,1]; thumbnails scale, so overlays are expressed in percentages.

export interface CssRect {
  left: string;
  top: string;
  width: string;
  height: string;
}

export function boxToCssRect(box: number[]): CssRect {
  const [x0, y0, x1, y1] = box;
  const pct = (v: number) => `${(v * 100).toFixed(2)}%`;
  return {
    left: pct(x0),
    top: pct(y0),
    width: pct(x1 - x0),
    height: pct(y1 - y0),
  };
}

// Stable concept -> hue mapping so the same concept keeps its color across
// views (and the two panels of a comparison stay distinguishable).
export function conceptColor(label: string): string {
  let hash = 0;
  for (let i = 0; i < label.length; i++) {
    hash = (hash * 31 + label.charCodeAt(i)) >>> 0;
  }
  const hue = hash % 360;
  return `hsl(${hue}, 75%, 45%)`;
}
