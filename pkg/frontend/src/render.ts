import { Plan, Scan, Telemetry } from "./protocol.js";

// Matches the server's default waypoint acceptance radius; the plan
// message itself does not carry it.
export const WAYPOINT_TOLERANCE_M = 0.25;

export interface Viewport {
    cx: number;
    cy: number;
    scale: number; // px per metre
}

export interface SceneView {
    telemetry: Telemetry | null;
    scan: Scan | null;
    plan: Plan | null;
    stale: boolean;
}

export function worldToScreen(vp: Viewport, w: number, h: number, x: number, y: number): [number, number] {
    return [w / 2 + (x - vp.cx) * vp.scale, h / 2 - (y - vp.cy) * vp.scale];
}

export function screenToWorld(vp: Viewport, w: number, h: number, sx: number, sy: number): [number, number] {
    return [vp.cx + (sx - w / 2) / vp.scale, vp.cy - (sy - h / 2) / vp.scale];
}

/** Project scan rays into world-frame points using the pose the scan was taken at. */
export function scanPoints(scan: Scan): [number, number][] {
    const pts: [number, number][] = [];
    const { x, y, psi } = scan.pose;
    const c = Math.cos(psi);
    const s = Math.sin(psi);
    for (let i = 0; i < scan.ranges.length; i++) {
        const r = scan.ranges[i];
        if (r === null || !isFinite(r)) continue;
        const a = scan.angle_min + i * scan.angle_increment;
        const bx = r * Math.cos(a);
        const by = r * Math.sin(a);
        pts.push([x + c * bx - s * by, y + s * bx + c * by]);
    }
    return pts;
}

export interface Badge {
    name: string;
    label: string;
    on: boolean;
}

/** Side-panel badge per behavior; lit while the activation is nonzero. */
export function badgeStates(behaviors: Record<string, number>): Badge[] {
    return Object.keys(behaviors)
        .sort()
        .map((name) => {
            const a = behaviors[name];
            return { name, label: `${name} ${a.toFixed(2)}`, on: a > 0.01 };
        });
}

const COLORS = {
    bg: "#10151c",
    grid: "#1d2633",
    axis: "#2c3b52",
    laser: "#4fc3f7",
    planLine: "#8d6e63",
    wpPending: "#ffb74d",
    wpDone: "#5d4a3a",
    home: "#81c784",
    vehicle: "#ffffff",
    vehicleStale: "#78909c",
    heading: "#ef5350",
    text: "#90a4ae",
};

function drawGrid(ctx: CanvasRenderingContext2D, w: number, h: number, vp: Viewport): void {
    const left = vp.cx - w / 2 / vp.scale;
    const right = vp.cx + w / 2 / vp.scale;
    const bottom = vp.cy - h / 2 / vp.scale;
    const top = vp.cy + h / 2 / vp.scale;
    if (right - left > 400) return; // zoomed out too far for a 1 m grid
    ctx.lineWidth = 1;
    for (let gx = Math.ceil(left); gx <= Math.floor(right); gx++) {
        ctx.strokeStyle = gx === 0 ? COLORS.axis : COLORS.grid;
        const [sx] = worldToScreen(vp, w, h, gx, 0);
        ctx.beginPath();
        ctx.moveTo(sx, 0);
        ctx.lineTo(sx, h);
        ctx.stroke();
    }
    for (let gy = Math.ceil(bottom); gy <= Math.floor(top); gy++) {
        ctx.strokeStyle = gy === 0 ? COLORS.axis : COLORS.grid;
        const [, sy] = worldToScreen(vp, w, h, 0, gy);
        ctx.beginPath();
        ctx.moveTo(0, sy);
        ctx.lineTo(w, sy);
        ctx.stroke();
    }
}

function drawScan(ctx: CanvasRenderingContext2D, w: number, h: number, vp: Viewport, scan: Scan): void {
    ctx.fillStyle = COLORS.laser;
    for (const [x, y] of scanPoints(scan)) {
        const [sx, sy] = worldToScreen(vp, w, h, x, y);
        if (sx < -4 || sx > w + 4 || sy < -4 || sy > h + 4) continue;
        ctx.fillRect(sx - 1, sy - 1, 2, 2);
    }
}

function drawPlan(ctx: CanvasRenderingContext2D, w: number, h: number, vp: Viewport, plan: Plan): void {
    if (plan.waypoints.length === 0) return;
    ctx.strokeStyle = COLORS.planLine;
    ctx.lineWidth = 1;
    ctx.setLineDash([6, 4]);
    ctx.beginPath();
    plan.waypoints.forEach((wp, i) => {
        const [sx, sy] = worldToScreen(vp, w, h, wp[0], wp[1]);
        if (i === 0) ctx.moveTo(sx, sy);
        else ctx.lineTo(sx, sy);
    });
    ctx.stroke();
    ctx.setLineDash([]);
    const tolPx = Math.max(3, WAYPOINT_TOLERANCE_M * vp.scale);
    plan.waypoints.forEach((wp, i) => {
        const [sx, sy] = worldToScreen(vp, w, h, wp[0], wp[1]);
        ctx.strokeStyle = i < plan.progress ? COLORS.wpDone : COLORS.wpPending;
        ctx.lineWidth = i === plan.progress ? 2 : 1;
        ctx.beginPath();
        ctx.arc(sx, sy, tolPx, 0, Math.PI * 2);
        ctx.stroke();
        ctx.fillStyle = COLORS.text;
        ctx.font = "10px sans-serif";
        ctx.fillText(`${i}`, sx + tolPx + 2, sy - 2);
    });
}

function drawHome(ctx: CanvasRenderingContext2D, w: number, h: number, vp: Viewport, home: { x: number; y: number }): void {
    const [sx, sy] = worldToScreen(vp, w, h, home.x, home.y);
    ctx.strokeStyle = COLORS.home;
    ctx.lineWidth = 1.5;
    ctx.beginPath();
    ctx.arc(sx, sy, 7, 0, Math.PI * 2);
    ctx.stroke();
    ctx.fillStyle = COLORS.home;
    ctx.font = "bold 9px sans-serif";
    ctx.fillText("H", sx - 3, sy + 3);
}

function drawVehicle(ctx: CanvasRenderingContext2D, w: number, h: number, vp: Viewport, tel: Telemetry, stale: boolean): void {
    const [sx, sy] = worldToScreen(vp, w, h, tel.est.x, tel.est.y);
    const psi = tel.est.psi;
    ctx.save();
    ctx.translate(sx, sy);
    ctx.rotate(-psi); // screen y points down
    ctx.fillStyle = stale ? COLORS.vehicleStale : COLORS.vehicle;
    ctx.beginPath();
    ctx.moveTo(10, 0);
    ctx.lineTo(-7, 6);
    ctx.lineTo(-4, 0);
    ctx.lineTo(-7, -6);
    ctx.closePath();
    ctx.fill();
    ctx.strokeStyle = COLORS.heading;
    ctx.lineWidth = 1.5;
    ctx.beginPath();
    ctx.moveTo(10, 0);
    ctx.lineTo(10 + 0.6 * vp.scale, 0);
    ctx.stroke();
    ctx.restore();
}

/**
 * One top-down frame: grid, laser points, active plan with acceptance
 * circles, home marker, then the vehicle at the estimated pose. Everything
 * drawn here came in over the wire.
 */
export function drawScene(ctx: CanvasRenderingContext2D, w: number, h: number, vp: Viewport, view: SceneView): void {
    ctx.fillStyle = COLORS.bg;
    ctx.fillRect(0, 0, w, h);
    drawGrid(ctx, w, h, vp);
    if (view.scan) drawScan(ctx, w, h, vp, view.scan);
    if (view.plan) drawPlan(ctx, w, h, vp, view.plan);
    if (view.telemetry?.home) drawHome(ctx, w, h, vp, view.telemetry.home);
    if (view.telemetry) {
        drawVehicle(ctx, w, h, vp, view.telemetry, view.stale);
    } else {
        ctx.fillStyle = COLORS.text;
        ctx.font = "14px sans-serif";
        ctx.fillText("no telemetry", w / 2 - 40, h / 2);
    }
}
