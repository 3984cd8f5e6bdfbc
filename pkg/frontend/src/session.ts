import {
    Ack,
    Command,
    encodeLine,
    EventMsg,
    parseUpstream,
    Phase,
    Plan,
    Scan,
    Telemetry,
    Upstream,
    WireError,
} from "./protocol.js";

/** Outbound half of a connection; the session never touches sockets directly. */
export interface Transport {
    send(line: string): void;
    close(): void;
}

/** Clock and interval scheduling, injectable so tests can drive time by hand. */
export interface TimerHost {
    now(): number;
    setInterval(fn: () => void, ms: number): unknown;
    clearInterval(handle: unknown): void;
}

export const realTimers: TimerHost = {
    now: () => performance.now(),
    setInterval: (fn, ms) => setInterval(fn, ms),
    clearInterval: (h) => clearInterval(h as Parameters<typeof clearInterval>[0]),
};

export const HEARTBEAT_MS = 500;
export const STALE_MS = 1000;
const EVENT_RING = 200;

export interface JournalEntry {
    id: string;
    type: string;
    sentAt: number;
    status: "pending" | "ok" | "rejected";
    detail: string;
}

export interface Toast {
    kind: "reject" | "error" | "info";
    text: string;
    at: number;
}

export type Connection = "idle" | "connected" | "closed";

/**
 * Which commands make sense given the reported flight phase. Airborne-only
 * controls stay off on the ground; takeoff is only offered on the ground.
 * Everything requires a live connection.
 */
export function commandAllowed(type: string, phase: Phase | null, connected: boolean): boolean {
    if (!connected) return false;
    switch (type) {
        case "takeoff":
            return phase === "on-ground";
        case "land":
            return phase === "taking-off" || phase === "flying";
        case "velocity":
        case "go_home":
        case "abort_mission":
        case "inspection_mode":
        case "start_sweep":
        case "start_vertical":
            return phase === "flying";
        case "set_home":
        case "heartbeat":
            return true;
        default:
            return false;
    }
}

/**
 * Client-side vehicle picture. Every field here is a replay of protocol
 * frames; nothing is simulated locally. Commands are journaled on send and
 * each journal entry is settled by exactly one ack.
 */
export class SessionModel {
    connection: Connection = "idle";
    telemetry: Telemetry | null = null;
    telemetryAt = -Infinity;
    telemetryCount = 0;
    scan: Scan | null = null;
    plan: Plan | null = null;
    events: EventMsg[] = [];
    journal: JournalEntry[] = [];
    toasts: Toast[] = [];
    orphanAcks = 0;
    parseErrors = 0;
    /** Fires after a message has been folded into the model. */
    onmessage: ((msg: Upstream) => void) | null = null;

    private transport: Transport | null = null;
    private heartbeatHandle: unknown = null;
    private connectedAt = -Infinity;
    private seq = 0;

    constructor(private timers: TimerHost = realTimers) {}

    attach(transport: Transport): void {
        this.transport = transport;
        this.connection = "connected";
        this.connectedAt = this.timers.now();
        this.startHeartbeat();
    }

    detach(): void {
        this.stopHeartbeat();
        this.transport = null;
        if (this.connection === "connected") this.connection = "closed";
    }

    /** Heartbeat cadence is owned by its own interval, not the render loop. */
    startHeartbeat(): void {
        if (this.heartbeatHandle !== null) return;
        this.heartbeatHandle = this.timers.setInterval(() => {
            if (this.connection === "connected" && this.transport) {
                this.transport.send(encodeLine({ type: "heartbeat" }));
            }
        }, HEARTBEAT_MS);
    }

    stopHeartbeat(): void {
        if (this.heartbeatHandle !== null) {
            this.timers.clearInterval(this.heartbeatHandle);
            this.heartbeatHandle = null;
        }
    }

    /**
     * Send a command, stamped with a fresh id and journaled. Returns the id,
     * or null if there is no connection. Heartbeats bypass the journal since
     * the server never acks them.
     */
    send(cmd: Command): string | null {
        if (this.connection !== "connected" || !this.transport) return null;
        if (cmd.type === "heartbeat") {
            this.transport.send(encodeLine(cmd));
            return null;
        }
        const id = `c${++this.seq}`;
        this.journal.push({
            id,
            type: cmd.type,
            sentAt: this.timers.now(),
            status: "pending",
            detail: "",
        });
        this.transport.send(encodeLine({ ...cmd, id }));
        return id;
    }

    onLine(line: string): void {
        let msg: Upstream;
        try {
            msg = parseUpstream(line);
        } catch (e) {
            if (e instanceof WireError) {
                this.parseErrors += 1;
                return;
            }
            throw e;
        }
        switch (msg.type) {
            case "telemetry":
                this.telemetry = msg;
                this.telemetryAt = this.timers.now();
                this.telemetryCount += 1;
                break;
            case "scan":
                this.scan = msg;
                break;
            case "plan":
                this.plan = msg;
                break;
            case "event":
                this.events.push(msg);
                if (this.events.length > EVENT_RING) this.events.shift();
                break;
            case "ack":
                this.reconcile(msg);
                break;
            case "error":
                this.toast("error", msg.detail);
                break;
        }
        this.onmessage?.(msg);
    }

    private reconcile(ack: Ack): void {
        const entry = this.journal.find((j) => j.status === "pending" && j.id === ack.ref);
        if (!entry) {
            this.orphanAcks += 1;
            return;
        }
        entry.status = ack.status;
        entry.detail = ack.detail ?? "";
        if (ack.status === "rejected") {
            this.toast("reject", `${entry.type} rejected: ${entry.detail || "no reason given"}`);
        }
    }

    toast(kind: Toast["kind"], text: string): void {
        this.toasts.push({ kind, text, at: this.timers.now() });
    }

    pending(): JournalEntry[] {
        return this.journal.filter((j) => j.status === "pending");
    }

    phase(): Phase | null {
        return this.telemetry ? this.telemetry.phase : null;
    }

    allowed(type: string): boolean {
        return commandAllowed(type, this.phase(), this.connection === "connected");
    }

    /** True when connected but telemetry has gone quiet for over a second. */
    stale(): boolean {
        if (this.connection !== "connected") return false;
        const ref = this.telemetry ? this.telemetryAt : this.connectedAt;
        return this.timers.now() - ref > STALE_MS;
    }

    close(): void {
        this.transport?.close();
        this.detach();
    }
}
