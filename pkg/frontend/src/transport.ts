import { Transport } from "./session.js";

export interface LineHandlers {
    onopen(): void;
    online(line: string): void;
    onclose(): void;
}

/**
 * WebSocket carrier for the newline-framed protocol. The server puts one
 * JSON line in each text frame, but splitting defensively costs nothing.
 */
export function connectWebSocket(url: string, handlers: LineHandlers): Transport {
    const ws = new WebSocket(url);
    ws.addEventListener("open", () => handlers.onopen());
    ws.addEventListener("message", (ev) => {
        for (const part of String(ev.data).split("\n")) {
            if (part.trim().length > 0) handlers.online(part);
        }
    });
    ws.addEventListener("close", () => handlers.onclose());
    ws.addEventListener("error", () => {
        // the close event follows; nothing to do here
    });
    return {
        send(line: string): void {
            if (ws.readyState === WebSocket.OPEN) ws.send(line + "\n");
        },
        close(): void {
            ws.close();
        },
    };
}
