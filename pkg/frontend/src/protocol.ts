// Wire protocol spoken by the vehicle's operator socket: one JSON object
// per newline-terminated line, both directions. These shapes mirror the
// server exactly; the station never invents state of its own.

export type Phase = "on-ground" | "taking-off" | "flying" | "landing";

export interface EstState {
    x: number;
    y: number;
    z: number;
    psi: number;
    vx: number;
    vy: number;
    vz: number;
}

export interface MissionInfo {
    kind?: string;
    progress?: number;
    total?: number;
    paused?: boolean;
}

export interface Telemetry {
    type: "telemetry";
    t: number;
    phase: Phase;
    est: EstState;
    truth: { x: number; y: number; z: number; psi: number };
    battery: number;
    verdict: string;
    behaviors: Record<string, number>;
    cmd: { vx: number; vy: number; vz: number; yaw_rate: number };
    mission: MissionInfo;
    min_obstacle_d: number;
    inspection_mode: boolean;
    home: { x: number; y: number; z: number } | null;
}

export interface Scan {
    type: "scan";
    t: number;
    angle_min: number;
    angle_increment: number;
    max_range: number;
    pose: { x: number; y: number; psi: number };
    ranges: (number | null)[];
}

/** Waypoints are [x, y, z, yaw]. */
export interface Plan {
    type: "plan";
    kind: string | null;
    waypoints: [number, number, number, number][];
    progress: number;
}

export interface EventMsg {
    type: "event";
    t: number;
    event: string;
    [extra: string]: unknown;
}

export interface Ack {
    type: "ack";
    ref: string | null;
    status: "ok" | "rejected";
    detail?: string;
}

export interface ErrMsg {
    type: "error";
    detail: string;
}

export type Upstream = Telemetry | Scan | Plan | EventMsg | Ack | ErrMsg;

export class WireError extends Error {}

function isRecord(v: unknown): v is Record<string, unknown> {
    return typeof v === "object" && v !== null && !Array.isArray(v);
}

/**
 * Parse one line from the socket. Throws WireError on anything that is
 * not a recognizable upstream message so a bad line never reaches the
 * render path half-formed.
 */
export function parseUpstream(line: string): Upstream {
    let doc: unknown;
    try {
        doc = JSON.parse(line);
    } catch {
        throw new WireError(`not JSON: ${line.slice(0, 80)}`);
    }
    if (!isRecord(doc) || typeof doc.type !== "string") {
        throw new WireError("message has no type");
    }
    switch (doc.type) {
        case "telemetry":
            if (!isRecord(doc.est) || typeof doc.phase !== "string") {
                throw new WireError("malformed telemetry");
            }
            return doc as unknown as Telemetry;
        case "scan":
            if (!Array.isArray(doc.ranges) || !isRecord(doc.pose)) {
                throw new WireError("malformed scan");
            }
            return doc as unknown as Scan;
        case "plan":
            if (!Array.isArray(doc.waypoints)) {
                throw new WireError("malformed plan");
            }
            return doc as unknown as Plan;
        case "event":
            if (typeof doc.event !== "string") {
                throw new WireError("malformed event");
            }
            return doc as unknown as EventMsg;
        case "ack":
            if (doc.status !== "ok" && doc.status !== "rejected") {
                throw new WireError("malformed ack");
            }
            return doc as unknown as Ack;
        case "error":
            return doc as unknown as ErrMsg;
        default:
            throw new WireError(`unknown message type ${doc.type}`);
    }
}

// -- downstream builders ------------------------------------------------

export interface Command {
    type: string;
    id?: string;
    [param: string]: unknown;
}

export function takeoff(): Command {
    return { type: "takeoff" };
}

export function land(): Command {
    return { type: "land" };
}

export function velocity(vx: number, vy: number, vz: number, yawRate: number): Command {
    return { type: "velocity", vx, vy, vz, yaw_rate: yawRate };
}

export function goHome(): Command {
    return { type: "go_home" };
}

export function abortMission(): Command {
    return { type: "abort_mission" };
}

export function inspectionMode(on: boolean): Command {
    return { type: "inspection_mode", on };
}

export function setHome(x: number, y: number, z: number): Command {
    return { type: "set_home", x, y, z };
}

export function startSweep(width: number, height: number, spacing: number, endToEnd: boolean): Command {
    return { type: "start_sweep", width, height, spacing, end_to_end: endToEnd };
}

export function startVertical(maxHeight: number, offset: number, bearing: number): Command {
    return { type: "start_vertical", max_height: maxHeight, offset, bearing };
}

export function encodeLine(cmd: Command): string {
    return JSON.stringify(cmd);
}
