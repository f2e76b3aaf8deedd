import { describe, expect, it } from "vitest";

import { GoalDragController } from "../src/mapview.js";
import { GoalMsg } from "../src/protocol.js";
import { MapTransform } from "../src/transform.js";
import { FIXTURE_MAP } from "./fakes.js";

function controller(): { goals: GoalMsg[]; ctl: GoalDragController; transform: MapTransform } {
  const goals: GoalMsg[] = [];
  const ctl = new GoalDragController((goal) => goals.push(goal));
  const transform = new MapTransform(FIXTURE_MAP, 16);
  return { goals, ctl, transform };
}

describe("GoalDragController", () => {
  it("ignores pointers until a map has arrived", () => {
    const { goals, ctl } = controller();
    ctl.pointerDown(50, 50);
    ctl.pointerUp(50, 50);
    expect(goals).toHaveLength(0);
    expect(ctl.goalDraft).toBeNull();
  });

  it("ignores pointer-down outside the canvas", () => {
    const { goals, ctl, transform } = controller();
    ctl.setTransform(transform);
    ctl.pointerDown(-5, 20);
    ctl.pointerUp(-5, 20);
    expect(goals).toHaveLength(0);
  });

  it("tracks the draft while dragging", () => {
    const { ctl, transform } = controller();
    ctl.setTransform(transform);
    ctl.pointerDown(80, 48);
    expect(ctl.goalDraft).toEqual({ anchorPx: [80, 48], currentPx: [80, 48] });
    ctl.pointerMove(120, 30);
    expect(ctl.goalDraft).toEqual({ anchorPx: [80, 48], currentPx: [120, 30] });
  });

  it("a click publishes the goal with zero heading", () => {
    const { goals, ctl, transform } = controller();
    ctl.setTransform(transform);
    ctl.pointerDown(80, 48);
    ctl.pointerUp(80, 48);
    const [x, y] = transform.pixelToWorld(80, 48);
    expect(goals).toEqual([{ x, y, theta: 0 }]);
    expect(ctl.goalDraft).toBeNull();
  });

  it("a drag sets the heading toward the release point", () => {
    const { goals, ctl, transform } = controller();
    ctl.setTransform(transform);
    ctl.pointerDown(80, 48);
    ctl.pointerMove(80, 20);
    ctl.pointerUp(80, 8);
    expect(goals).toHaveLength(1);
    expect(goals[0]?.theta).toBeCloseTo(Math.PI / 2, 12);
    const [x, y] = transform.pixelToWorld(80, 48);
    expect(goals[0]?.x).toBe(x);
    expect(goals[0]?.y).toBe(y);
  });

  it("cancel discards the draft without publishing", () => {
    const { goals, ctl, transform } = controller();
    ctl.setTransform(transform);
    ctl.pointerDown(80, 48);
    ctl.cancel();
    ctl.pointerUp(80, 8);
    expect(goals).toHaveLength(0);
  });

  it("losing the map clears any draft in progress", () => {
    const { ctl, transform } = controller();
    ctl.setTransform(transform);
    ctl.pointerDown(80, 48);
    ctl.setTransform(null);
    expect(ctl.goalDraft).toBeNull();
  });
});
