/**
 * Canvas <-> world mapping for the occupancy map.
 *
 * The map payload is row-major with row 0 at the top of the world, so world
 * y grows upward while canvas y grows downward.  The scale is an integer
 * number of pixels per cell, which keeps the two directions of the transform
 * exact inverses for every cell center.
 */

import { MapMsg } from "./protocol.js";

export class MapTransform {
  readonly pixelsPerCell: number;
  readonly widthPx: number;
  readonly heightPx: number;
  private readonly worldHeight: number;
  private readonly pixelsPerMeter: number;

  constructor(readonly map: MapMsg, pixelsPerCell: number) {
    if (!Number.isInteger(pixelsPerCell) || pixelsPerCell < 1) {
      throw new Error("pixelsPerCell must be a positive integer");
    }
    this.pixelsPerCell = pixelsPerCell;
    this.widthPx = map.width * pixelsPerCell;
    this.heightPx = map.height * pixelsPerCell;
    this.worldHeight = map.height * map.resolution;
    this.pixelsPerMeter = pixelsPerCell / map.resolution;
  }

  /** Largest integer cell size that fits the map into the given box. */
  static fit(map: MapMsg, maxWidthPx: number, maxHeightPx: number): MapTransform {
    const perCell = Math.max(
      1,
      Math.min(Math.floor(maxWidthPx / map.width), Math.floor(maxHeightPx / map.height)),
    );
    return new MapTransform(map, perCell);
  }

  worldToPixel(x: number, y: number): [number, number] {
    return [x * this.pixelsPerMeter, (this.worldHeight - y) * this.pixelsPerMeter];
  }

  pixelToWorld(px: number, py: number): [number, number] {
    return [px / this.pixelsPerMeter, this.worldHeight - py / this.pixelsPerMeter];
  }

  /** World coordinates of a cell's center. */
  cellCenter(row: number, col: number): [number, number] {
    const res = this.map.resolution;
    return [(col + 0.5) * res, (this.map.height - 1 - row + 0.5) * res];
  }

  occupied(row: number, col: number): boolean {
    return this.map.cells[row * this.map.width + col] === "1";
  }

  inCanvas(px: number, py: number): boolean {
    // half-open, matching the grid's world-bounds convention
    return px >= 0 && py >= 0 && px < this.widthPx && py < this.heightPx;
  }
}

/**
 * Goal pose from a click-drag gesture in canvas pixels.  The anchor fixes
 * the position; dragging points the goal toward the pointer.  Drags shorter
 * than the tolerance count as plain clicks and default to theta 0.
 */
export function goalFromDrag(
  transform: MapTransform,
  anchorPx: [number, number],
  releasePx: [number, number],
  clickTolerancePx = 4,
): { x: number; y: number; theta: number } {
  const [x, y] = transform.pixelToWorld(anchorPx[0], anchorPx[1]);
  const dx = releasePx[0] - anchorPx[0];
  const dy = releasePx[1] - anchorPx[1];
  if (Math.hypot(dx, dy) < clickTolerancePx) {
    return { x, y, theta: 0 };
  }
  const [tx, ty] = transform.pixelToWorld(releasePx[0], releasePx[1]);
  return { x, y, theta: Math.atan2(ty - y, tx - x) };
}
