/**
 * Map pane: occupancy grid, candidate routes, robot pose, and goal entry.
 *
 * Goals are set by click-drag: pointer down anchors the goal position, the
 * drag direction chooses the heading, and a plain click (no meaningful drag)
 * leaves the heading at zero.  Clicks are ignored until a map has arrived,
 * since there is no world frame to anchor against yet.
 */
import { MapTransform, goalFromDrag } from "./transform.js";
/** Pointer-drag goal entry, independent of any canvas or DOM event system. */
export class GoalDragController {
    constructor(sink) {
        this.sink = sink;
        this.transform = null;
        this.draft = null;
    }
    setTransform(transform) {
        this.transform = transform;
        if (transform === null)
            this.draft = null;
    }
    get goalDraft() {
        return this.draft;
    }
    pointerDown(px, py) {
        if (this.transform === null || !this.transform.inCanvas(px, py))
            return;
        this.draft = { anchorPx: [px, py], currentPx: [px, py] };
    }
    pointerMove(px, py) {
        if (this.draft === null)
            return;
        this.draft = { ...this.draft, currentPx: [px, py] };
    }
    pointerUp(px, py) {
        if (this.draft === null || this.transform === null)
            return;
        const goal = goalFromDrag(this.transform, this.draft.anchorPx, [px, py]);
        this.draft = null;
        this.sink(goal);
    }
    cancel() {
        this.draft = null;
    }
}
const COLORS = {
    floor: "#1c1f26",
    wall: "#4a5568",
    grid: "#2a2f3a",
    planChosen: "#4fd1c5",
    planOther: "#3a4556",
    robot: "#f6e05e",
    draft: "#fc8181",
    goal: "#68d391",
};
/** Render one frame of the scene onto a 2D canvas context. */
export function renderScene(ctx, transform, scene, nowMs) {
    const { width, height } = ctx.canvas;
    ctx.fillStyle = COLORS.floor;
    ctx.fillRect(0, 0, width, height);
    if (transform === null || scene.map === null)
        return;
    const cellPx = transform.pixelsPerCell;
    for (let row = 0; row < scene.map.height; row++) {
        for (let col = 0; col < scene.map.width; col++) {
            if (!transform.occupied(row, col))
                continue;
            ctx.fillStyle = COLORS.wall;
            ctx.fillRect(col * cellPx, row * cellPx, cellPx, cellPx);
        }
    }
    if (scene.plan !== null) {
        for (const mode of scene.plan.modes) {
            const chosen = mode.id === scene.plan.chosen_id;
            ctx.strokeStyle = chosen ? COLORS.planChosen : COLORS.planOther;
            ctx.lineWidth = chosen ? 3 : 1.5;
            ctx.beginPath();
            mode.waypoints.forEach(([x, y], i) => {
                const [px, py] = transform.worldToPixel(x, y);
                if (i === 0)
                    ctx.moveTo(px, py);
                else
                    ctx.lineTo(px, py);
            });
            ctx.stroke();
        }
    }
    if (scene.goal !== null) {
        drawArrow(ctx, transform, scene.goal.x, scene.goal.y, scene.goal.theta, COLORS.goal, 1);
    }
    if (scene.draft !== null) {
        const [ax, ay] = transform.pixelToWorld(...scene.draft.anchorPx);
        const [cx, cy] = transform.pixelToWorld(...scene.draft.currentPx);
        const theta = Math.hypot(cx - ax, cy - ay) < 1e-9 ? 0 : Math.atan2(cy - ay, cx - ax);
        drawArrow(ctx, transform, ax, ay, theta, COLORS.draft, 1);
    }
    if (scene.pose !== null) {
        // pulse between 60% and 100% opacity so the robot marker reads as live
        const pulse = 0.8 + 0.2 * Math.sin((nowMs / 1000) * 2 * Math.PI);
        drawArrow(ctx, transform, scene.pose.x, scene.pose.y, scene.pose.theta, COLORS.robot, pulse);
    }
}
function drawArrow(ctx, transform, x, y, theta, color, alpha) {
    const [px, py] = transform.worldToPixel(x, y);
    const r = transform.pixelsPerCell * 0.45;
    // world angles are counterclockwise; canvas y is flipped, so negate
    const a = -theta;
    ctx.save();
    ctx.globalAlpha = alpha;
    ctx.fillStyle = color;
    ctx.beginPath();
    ctx.moveTo(px + r * Math.cos(a), py + r * Math.sin(a));
    ctx.lineTo(px + r * 0.6 * Math.cos(a + 2.5), py + r * 0.6 * Math.sin(a + 2.5));
    ctx.lineTo(px + r * 0.6 * Math.cos(a - 2.5), py + r * 0.6 * Math.sin(a - 2.5));
    ctx.closePath();
    ctx.fill();
    ctx.restore();
}
/** Canvas element wired to a GoalDragController. */
export class MapView {
    constructor(sink, maxWidthPx = 640, maxHeightPx = 520) {
        this.maxWidthPx = maxWidthPx;
        this.maxHeightPx = maxHeightPx;
        this.transform = null;
        this.element = document.createElement("canvas");
        this.element.className = "map-view";
        this.element.width = this.maxWidthPx;
        this.element.height = this.maxHeightPx;
        this.controller = new GoalDragController(sink);
        this.element.addEventListener("pointerdown", (e) => {
            this.element.setPointerCapture(e.pointerId);
            const [px, py] = this.eventPx(e);
            this.controller.pointerDown(px, py);
        });
        this.element.addEventListener("pointermove", (e) => {
            const [px, py] = this.eventPx(e);
            this.controller.pointerMove(px, py);
        });
        this.element.addEventListener("pointerup", (e) => {
            const [px, py] = this.eventPx(e);
            this.controller.pointerUp(px, py);
        });
        this.element.addEventListener("pointercancel", () => this.controller.cancel());
    }
    setMap(map) {
        if (map === null) {
            this.transform = null;
        }
        else {
            this.transform = MapTransform.fit(map, this.maxWidthPx, this.maxHeightPx);
            this.element.width = this.transform.widthPx;
            this.element.height = this.transform.heightPx;
        }
        this.controller.setTransform(this.transform);
    }
    render(scene, nowMs) {
        const ctx = this.element.getContext("2d");
        if (ctx !== null)
            renderScene(ctx, this.transform, scene, nowMs);
    }
    eventPx(e) {
        const rect = this.element.getBoundingClientRect();
        return [e.clientX - rect.left, e.clientY - rect.top];
    }
}
