import { Command, startSweep, startVertical } from "./protocol.js";

// Teleop magnitudes in body frame. The vehicle clamps anyway; these keep
// keyboard flight gentle.
export const TELEOP = { vxy: 0.5, vz: 0.4, yawRate: 0.5, periodMs: 100 };

const KEY_AXES: Record<string, [keyof Vector, number]> = {
    KeyW: ["vx", 1],
    KeyS: ["vx", -1],
    KeyA: ["vy", 1], // body-left positive
    KeyD: ["vy", -1],
    ArrowUp: ["vz", 1],
    ArrowDown: ["vz", -1],
    ArrowLeft: ["yawRate", 1],
    ArrowRight: ["yawRate", -1],
};

export interface Vector {
    vx: number;
    vy: number;
    vz: number;
    yawRate: number;
}

/**
 * Turns held keys and the virtual joystick into a velocity stream. tick()
 * is driven by a 10 Hz interval while input is active; letting go emits a
 * single zero-velocity command so the vehicle is never left chasing the
 * last stick value.
 */
export class KeyPump {
    private held = new Set<string>();
    private stick = { x: 0, y: 0 };
    private wasSending = false;

    constructor(
        private send: (v: Vector) => void,
        private gate: () => boolean,
    ) {}

    press(code: string): boolean {
        if (!(code in KEY_AXES)) return false;
        this.held.add(code);
        return true;
    }

    release(code: string): void {
        this.held.delete(code);
        this.settleIfIdle();
    }

    /** x right, y forward, both -1..1. */
    setStick(x: number, y: number): void {
        this.stick.x = Math.max(-1, Math.min(1, x));
        this.stick.y = Math.max(-1, Math.min(1, y));
    }

    releaseStick(): void {
        this.stick.x = 0;
        this.stick.y = 0;
        this.settleIfIdle();
    }

    active(): boolean {
        return this.vector() !== null;
    }

    vector(): Vector | null {
        const v: Vector = { vx: 0, vy: 0, vz: 0, yawRate: 0 };
        for (const code of this.held) {
            const [axis, sign] = KEY_AXES[code];
            v[axis] += sign;
        }
        v.vx += this.stick.y;
        v.vy -= this.stick.x;
        v.vx = clamp(v.vx) * TELEOP.vxy;
        v.vy = clamp(v.vy) * TELEOP.vxy;
        v.vz = clamp(v.vz) * TELEOP.vz;
        v.yawRate = clamp(v.yawRate) * TELEOP.yawRate;
        if (v.vx === 0 && v.vy === 0 && v.vz === 0 && v.yawRate === 0) return null;
        return v;
    }

    tick(): void {
        const v = this.vector();
        if (!this.gate()) {
            // lost the right to command mid-hold: stop the vehicle once
            this.settle();
            return;
        }
        if (v) {
            this.send(v);
            this.wasSending = true;
        } else {
            this.settle();
        }
    }

    private settleIfIdle(): void {
        if (this.vector() === null) this.settle();
    }

    private settle(): void {
        if (!this.wasSending) return;
        this.wasSending = false;
        if (this.gate()) this.send({ vx: 0, vy: 0, vz: 0, yawRate: 0 });
    }
}

function clamp(v: number): number {
    return Math.max(-1, Math.min(1, v));
}

// -- mission dialogs ------------------------------------------------------

export type Parsed = { ok: Command } | { err: string };

function num(raw: string, name: string): number | string {
    const v = Number(raw);
    if (raw.trim() === "" || !isFinite(v)) return `${name} must be a number`;
    return v;
}

export function sweepFromForm(width: string, height: string, spacing: string, endToEnd: boolean): Parsed {
    const w = num(width, "width");
    if (typeof w === "string") return { err: w };
    const h = num(height, "height");
    if (typeof h === "string") return { err: h };
    const s = num(spacing, "spacing");
    if (typeof s === "string") return { err: s };
    if (h <= 0) return { err: "height must be positive" };
    if (s <= 0) return { err: "spacing must be positive" };
    if (w < 0) return { err: "width must not be negative" };
    return { ok: startSweep(w, h, s, endToEnd) };
}

export function verticalFromForm(maxHeight: string, offset: string, bearing: string): Parsed {
    const mh = num(maxHeight, "max height");
    if (typeof mh === "string") return { err: mh };
    const off = num(offset, "offset");
    if (typeof off === "string") return { err: off };
    const b = num(bearing, "bearing");
    if (typeof b === "string") return { err: b };
    if (mh <= 0) return { err: "max height must be positive" };
    if (off <= 0) return { err: "offset must be positive" };
    return { ok: startVertical(mh, off, b) };
}
