export interface Point {
  x: number;
  y: number;
}

/**
 * Min-max decimation: cap a series at `limit` drawn points while keeping
 * every local extreme visible. Short series pass through untouched.
 */
export function decimate(values: number[], limit = 2000): Point[] {
  if (values.length <= limit) {
    return values.map((y, x) => ({ x, y }));
  }
  const buckets = Math.floor(limit / 2);
  const step = values.length / buckets;
  const out: Point[] = [];
  for (let b = 0; b < buckets; b++) {
    const start = Math.floor(b * step);
    const stop = Math.min(values.length, Math.max(start + 1, Math.floor((b + 1) * step)));
    let minX = start;
    let maxX = start;
    for (let i = start + 1; i < stop; i++) {
      if (values[i] < values[minX]) minX = i;
      if (values[i] > values[maxX]) maxX = i;
    }
    const first = Math.min(minX, maxX);
    const second = Math.max(minX, maxX);
    out.push({ x: first, y: values[first] });
    if (second !== first) {
      out.push({ x: second, y: values[second] });
    }
  }
  return out;
}
