import { describe, expect, it } from "vitest";

import { decimate } from "../src/decimate.js";

describe("decimate", () => {
  it("passes short series through unchanged", () => {
    const values = [3, 1, 4, 1, 5];
    const points = decimate(values, 2000);
    expect(points).toHaveLength(5);
    expect(points.map((p) => p.y)).toEqual(values);
    expect(points.map((p) => p.x)).toEqual([0, 1, 2, 3, 4]);
  });

  it("caps long series at the limit", () => {
    const values = Array.from({ length: 10_000 }, (_, i) => Math.sin(i / 7));
    const points = decimate(values, 2000);
    expect(points.length).toBeLessThanOrEqual(2000);
    expect(points.length).toBeGreaterThan(1000);
  });

  it("keeps global extremes visible", () => {
    const values = Array.from({ length: 50_000 }, (_, i) => Math.sin(i / 11));
    values[12_345] = 99;
    values[40_000] = -99;
    const points = decimate(values, 2000);
    const ys = points.map((p) => p.y);
    expect(Math.max(...ys)).toBe(99);
    expect(Math.min(...ys)).toBe(-99);
  });

  it("emits points in increasing x order", () => {
    const values = Array.from({ length: 9_999 }, (_, i) => (i * 37) % 101);
    const points = decimate(values, 500);
    for (let i = 1; i < points.length; i++) {
      expect(points[i].x).toBeGreaterThan(points[i - 1].x);
    }
  });
});
