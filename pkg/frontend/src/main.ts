import { KeyPump, sweepFromForm, TELEOP, verticalFromForm } from "./controls.js";
import {
    abortMission,
    Command,
    goHome,
    inspectionMode,
    land,
    setHome,
    takeoff,
    velocity,
} from "./protocol.js";
import { badgeStates, drawScene, screenToWorld, Viewport } from "./render.js";
import { SessionModel, Transport } from "./session.js";
import { connectWebSocket } from "./transport.js";

function el<T extends HTMLElement>(id: string): T {
    return document.getElementById(id) as T;
}

const session = new SessionModel();
let transport: Transport | null = null;

// -- connection -----------------------------------------------------------

const urlInput = el<HTMLInputElement>("url");
const connectBtn = el<HTMLButtonElement>("connect");
const disconnectBtn = el<HTMLButtonElement>("disconnect");
const statusDot = el<HTMLDivElement>("status-dot");

const params = new URLSearchParams(location.search);
urlInput.value = params.get("server") ?? "ws://127.0.0.1:8750";

connectBtn.addEventListener("click", () => {
    if (session.connection === "connected") return;
    connectBtn.disabled = true;
    const t = connectWebSocket(urlInput.value.trim(), {
        onopen: () => {
            transport = t;
            session.attach(t);
            session.toast("info", "connected");
        },
        online: (line) => session.onLine(line),
        onclose: () => {
            session.detach();
            transport = null;
            connectBtn.disabled = false;
            session.toast("info", "connection closed");
        },
    });
});

disconnectBtn.addEventListener("click", () => {
    transport?.close();
});

// -- map canvas -----------------------------------------------------------

const canvas = el<HTMLCanvasElement>("cv");
const ctx = canvas.getContext("2d")!;
const vp: Viewport = { cx: 0, cy: 0, scale: 45 };

function fitCanvas(): void {
    const r = canvas.getBoundingClientRect();
    const dpr = window.devicePixelRatio || 1;
    canvas.width = Math.round(r.width * dpr);
    canvas.height = Math.round(r.height * dpr);
    ctx.setTransform(dpr, 0, 0, dpr, 0, 0);
}
window.addEventListener("resize", fitCanvas);

canvas.addEventListener("wheel", (e) => {
    e.preventDefault();
    const f = e.deltaY < 0 ? 1.15 : 1 / 1.15;
    vp.scale = Math.max(8, Math.min(220, vp.scale * f));
}, { passive: false });

canvas.addEventListener("click", (e) => {
    // a click on the map proposes a new home at the current flight height
    if (!session.telemetry) return;
    const r = canvas.getBoundingClientRect();
    const [wx, wy] = screenToWorld(vp, r.width, r.height, e.clientX - r.left, e.clientY - r.top);
    sendGated("set_home", () => setHome(round2(wx), round2(wy), session.telemetry!.est.z));
});

function round2(v: number): number {
    return Math.round(v * 100) / 100;
}

// -- commands ---------------------------------------------------------------

function sendGated(type: string, build: () => Command): boolean {
    if (!session.allowed(type)) {
        session.toast("reject", `${type} not available now`);
        return false;
    }
    session.send(build());
    return true;
}

el<HTMLButtonElement>("b-takeoff").addEventListener("click", () => sendGated("takeoff", takeoff));
el<HTMLButtonElement>("b-land").addEventListener("click", () => sendGated("land", land));
el<HTMLButtonElement>("b-home").addEventListener("click", () => sendGated("go_home", goHome));
el<HTMLButtonElement>("b-abort").addEventListener("click", () => sendGated("abort_mission", abortMission));
el<HTMLButtonElement>("b-inspect").addEventListener("click", () =>
    sendGated("inspection_mode", () => inspectionMode(!session.telemetry?.inspection_mode)));

const buttonGates: [string, string][] = [
    ["b-takeoff", "takeoff"],
    ["b-land", "land"],
    ["b-home", "go_home"],
    ["b-abort", "abort_mission"],
    ["b-inspect", "inspection_mode"],
    ["b-sweep", "start_sweep"],
    ["b-vertical", "start_vertical"],
];

// -- dialogs ----------------------------------------------------------------

const sweepDlg = el<HTMLDialogElement>("dlg-sweep");
el<HTMLButtonElement>("b-sweep").addEventListener("click", () => sweepDlg.showModal());
el<HTMLButtonElement>("sw-cancel").addEventListener("click", () => sweepDlg.close());
el<HTMLButtonElement>("sw-ok").addEventListener("click", () => {
    const parsed = sweepFromForm(
        el<HTMLInputElement>("sw-width").value,
        el<HTMLInputElement>("sw-height").value,
        el<HTMLInputElement>("sw-spacing").value,
        el<HTMLInputElement>("sw-e2e").checked,
    );
    if ("err" in parsed) {
        el("sw-err").textContent = parsed.err;
        return;
    }
    el("sw-err").textContent = "";
    sweepDlg.close();
    sendGated("start_sweep", () => parsed.ok);
});

const verticalDlg = el<HTMLDialogElement>("dlg-vertical");
el<HTMLButtonElement>("b-vertical").addEventListener("click", () => verticalDlg.showModal());
el<HTMLButtonElement>("vt-cancel").addEventListener("click", () => verticalDlg.close());
el<HTMLButtonElement>("vt-ok").addEventListener("click", () => {
    const parsed = verticalFromForm(
        el<HTMLInputElement>("vt-max").value,
        el<HTMLInputElement>("vt-offset").value,
        el<HTMLInputElement>("vt-bearing").value,
    );
    if ("err" in parsed) {
        el("vt-err").textContent = parsed.err;
        return;
    }
    el("vt-err").textContent = "";
    verticalDlg.close();
    sendGated("start_vertical", () => parsed.ok);
});

// -- teleop -------------------------------------------------------------

const pump = new KeyPump(
    (v) => session.send(velocity(v.vx, v.vy, v.vz, v.yawRate)),
    () => session.allowed("velocity"),
);
setInterval(() => pump.tick(), TELEOP.periodMs);

function typingTarget(e: KeyboardEvent): boolean {
    const t = e.target as HTMLElement | null;
    return !!t && (t.tagName === "INPUT" || t.closest("dialog") !== null);
}

window.addEventListener("keydown", (e) => {
    if (typingTarget(e)) return;
    if (pump.press(e.code)) e.preventDefault();
});
window.addEventListener("keyup", (e) => {
    if (typingTarget(e)) return;
    pump.release(e.code);
});
window.addEventListener("blur", () => {
    pump.release("KeyW"); pump.release("KeyS"); pump.release("KeyA"); pump.release("KeyD");
    pump.release("ArrowUp"); pump.release("ArrowDown"); pump.release("ArrowLeft"); pump.release("ArrowRight");
    pump.releaseStick();
});

const pad = el<HTMLDivElement>("pad");
const knob = el<HTMLDivElement>("knob");
let padActive = false;

function padVector(e: PointerEvent): void {
    const r = pad.getBoundingClientRect();
    const radius = r.width / 2;
    let dx = (e.clientX - (r.left + radius)) / radius;
    let dy = (e.clientY - (r.top + radius)) / radius;
    const m = Math.hypot(dx, dy);
    if (m > 1) { dx /= m; dy /= m; }
    knob.style.transform = `translate(calc(-50% + ${dx * radius * 0.6}px), calc(-50% + ${dy * radius * 0.6}px))`;
    pump.setStick(dx, -dy); // screen down is backward
}

pad.addEventListener("pointerdown", (e) => {
    padActive = true;
    pad.setPointerCapture(e.pointerId);
    padVector(e);
});
pad.addEventListener("pointermove", (e) => {
    if (padActive) padVector(e);
});
function padRelease(): void {
    if (!padActive) return;
    padActive = false;
    knob.style.transform = "translate(-50%,-50%)";
    pump.releaseStick();
}
pad.addEventListener("pointerup", padRelease);
pad.addEventListener("pointercancel", padRelease);

// -- side panel + render loop ---------------------------------------------

const HEIGHT_FULL_M = 12;
const behaviorsDiv = el<HTMLDivElement>("behaviors");
const eventsDiv = el<HTMLDivElement>("events");
const toastsDiv = el<HTMLDivElement>("toasts");
let renderedEvents = 0;
let shownToasts = 0;
let hzSampleT = performance.now();
let hzSampleCount = 0;
let hz = 0;

function verdictClass(v: string): string {
    if (v === "land-now") return "bad";
    if (v === "ok") return "";
    return "warn";
}

function missionText(): string {
    const m = session.telemetry?.mission;
    if (!m || !m.kind) return "no mission";
    if (m.total !== undefined) {
        return `${m.kind} ${m.progress}/${m.total}${m.paused ? " (paused)" : ""}`;
    }
    return m.kind;
}

function updatePanel(): void {
    const tel = session.telemetry;
    const connected = session.connection === "connected";
    statusDot.classList.toggle("on", connected);
    disconnectBtn.disabled = !connected;
    if (!connected) connectBtn.disabled = false;

    el("f-phase").textContent = tel ? tel.phase : "–";
    const verdictEl = el("f-verdict");
    verdictEl.textContent = tel ? tel.verdict : "–";
    verdictEl.className = tel ? verdictClass(tel.verdict) : "";
    el("f-mission").textContent = missionText();

    const batt = tel ? Math.max(0, Math.min(1, tel.battery)) : 0;
    const battBar = el<HTMLDivElement>("f-batt");
    battBar.style.width = `${(batt * 100).toFixed(1)}%`;
    battBar.classList.toggle("low", batt < 0.25);
    el("f-batt-pct").textContent = tel ? `${(batt * 100).toFixed(0)}%` : "";

    const z = tel ? tel.est.z : 0;
    el<HTMLDivElement>("f-height").style.height = `${Math.max(0, Math.min(100, (z / HEIGHT_FULL_M) * 100))}%`;
    el("f-height-m").textContent = tel ? `${z.toFixed(2)} m` : "–";
    el("f-obst").textContent = tel ? `obstacle ${tel.min_obstacle_d.toFixed(2)} m` : "";

    for (const [id, type] of buttonGates) {
        el<HTMLButtonElement>(id).disabled = !session.allowed(type);
    }
    el("b-inspect").textContent = tel?.inspection_mode ? "Inspection on" : "Inspection";

    if (tel) {
        const badges = badgeStates(tel.behaviors);
        if (behaviorsDiv.childElementCount !== badges.length) {
            behaviorsDiv.innerHTML = "";
            for (let i = 0; i < badges.length; i++) {
                behaviorsDiv.appendChild(document.createElement("span"));
            }
        }
        badges.forEach((b, i) => {
            const s = behaviorsDiv.children[i] as HTMLSpanElement;
            s.textContent = b.label;
            s.classList.toggle("on", b.on);
        });
    }

    if (session.events.length !== renderedEvents) {
        renderedEvents = session.events.length;
        const lines = session.events.slice(-30).reverse().map((ev) => {
            const extras = Object.entries(ev)
                .filter(([k]) => k !== "type" && k !== "t" && k !== "event")
                .map(([k, v]) => `${k}=${v}`)
                .join(" ");
            return `${ev.t.toFixed(1)}s ${ev.event} ${extras}`;
        });
        eventsDiv.textContent = lines.join("\n");
    }

    while (shownToasts < session.toasts.length) {
        const t = session.toasts[shownToasts++];
        const d = document.createElement("div");
        d.className = `toast ${t.kind}`;
        d.textContent = t.text;
        toastsDiv.appendChild(d);
        setTimeout(() => d.remove(), 5000);
    }

    const now = performance.now();
    if (now - hzSampleT >= 1000) {
        hz = ((session.telemetryCount - hzSampleCount) * 1000) / (now - hzSampleT);
        hzSampleT = now;
        hzSampleCount = session.telemetryCount;
    }
    el("meta").textContent =
        `telemetry ${hz.toFixed(1)} Hz | pending acks ${session.pending().length}` +
        (session.orphanAcks ? ` | orphan acks ${session.orphanAcks}` : "") +
        (session.parseErrors ? ` | parse errors ${session.parseErrors}` : "");
}

function frame(): void {
    const r = canvas.getBoundingClientRect();
    if (canvas.width === 0) fitCanvas();
    const tel = session.telemetry;
    if (tel) {
        // ease the view onto the vehicle rather than snapping
        vp.cx += (tel.est.x - vp.cx) * 0.15;
        vp.cy += (tel.est.y - vp.cy) * 0.15;
    }
    const stale = session.stale();
    el("banner").classList.toggle("show", stale);
    drawScene(ctx, r.width, r.height, vp, {
        telemetry: tel,
        scan: session.scan,
        plan: session.plan,
        stale,
    });
    updatePanel();
    requestAnimationFrame(frame);
}

fitCanvas();
requestAnimationFrame(frame);
