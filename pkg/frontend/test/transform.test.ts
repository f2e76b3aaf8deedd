import { describe, expect, it } from "vitest";

import { MapTransform, goalFromDrag } from "../src/transform.js";
import { FIXTURE_MAP } from "./fakes.js";

describe("MapTransform", () => {
  const transform = new MapTransform(FIXTURE_MAP, 16);

  it("requires a positive integer cell size", () => {
    expect(() => new MapTransform(FIXTURE_MAP, 0)).toThrow();
    expect(() => new MapTransform(FIXTURE_MAP, 12.5)).toThrow();
  });

  it("sizes the canvas to the grid", () => {
    expect(transform.widthPx).toBe(11 * 16);
    expect(transform.heightPx).toBe(9 * 16);
  });

  it("fit picks the largest integer cell size that fits", () => {
    const fitted = MapTransform.fit(FIXTURE_MAP, 640, 520);
    expect(fitted.pixelsPerCell).toBe(Math.min(Math.floor(640 / 11), Math.floor(520 / 9)));
    const cramped = MapTransform.fit(FIXTURE_MAP, 5, 5);
    expect(cramped.pixelsPerCell).toBe(1);
  });

  it("puts the top-left cell center at (0.25, 4.25)", () => {
    expect(transform.cellCenter(0, 0)).toEqual([0.25, 4.25]);
  });

  it("round-trips every cell center exactly", () => {
    for (let row = 0; row < FIXTURE_MAP.height; row++) {
      for (let col = 0; col < FIXTURE_MAP.width; col++) {
        const [x, y] = transform.cellCenter(row, col);
        const [px, py] = transform.worldToPixel(x, y);
        const [backX, backY] = transform.pixelToWorld(px, py);
        expect(backX).toBe(x);
        expect(backY).toBe(y);
      }
    }
  });

  it("round-trips the world corners exactly", () => {
    for (const [x, y] of [
      [0, 0],
      [5.5, 0],
      [0, 4.5],
      [5.5, 4.5],
    ] as const) {
      const [px, py] = transform.worldToPixel(x, y);
      expect(transform.pixelToWorld(px, py)).toEqual([x, y]);
    }
  });

  it("maps world y up to pixel y down", () => {
    const [, topPy] = transform.worldToPixel(1.0, 4.0);
    const [, bottomPy] = transform.worldToPixel(1.0, 0.5);
    expect(topPy).toBeLessThan(bottomPy);
  });

  it("reads occupancy with row 0 on top", () => {
    expect(transform.occupied(0, 0)).toBe(true);
    expect(transform.occupied(1, 1)).toBe(false);
    // center divider row
    expect(transform.occupied(4, 2)).toBe(true);
    expect(transform.occupied(4, 1)).toBe(false);
  });

  it("bounds pointer hits to the canvas", () => {
    expect(transform.inCanvas(0, 0)).toBe(true);
    expect(transform.inCanvas(transform.widthPx, 10)).toBe(false);
    expect(transform.inCanvas(-1, 10)).toBe(false);
  });
});

describe("goalFromDrag", () => {
  const transform = new MapTransform(FIXTURE_MAP, 16);

  it("anchors the goal at the pointer-down position", () => {
    const anchor: [number, number] = [80, 48];
    const goal = goalFromDrag(transform, anchor, [200, 100]);
    const [x, y] = transform.pixelToWorld(...anchor);
    expect(goal.x).toBe(x);
    expect(goal.y).toBe(y);
  });

  it("a plain click leaves the heading at zero", () => {
    const goal = goalFromDrag(transform, [80, 48], [82, 49]);
    expect(goal.theta).toBe(0);
  });

  it("dragging straight up on the canvas points the goal at +pi/2", () => {
    const goal = goalFromDrag(transform, [80, 48], [80, 8]);
    expect(goal.theta).toBeCloseTo(Math.PI / 2, 12);
  });

  it("dragging right points the goal at zero heading", () => {
    const goal = goalFromDrag(transform, [80, 48], [160, 48]);
    expect(goal.theta).toBeCloseTo(0, 12);
  });
});
