/**
 * TCP server half. One connection is served at a time; others wait paused
 * until the active one closes. Per connection, request ids must be strictly
 * increasing; malformed JSON earns an error response (id null), never
 * silence, and never kills the process.
 */

import * as net from "node:net";

import {
  BRIDGE_METHODS,
  encodeMessage,
  MessageReader,
  type BridgeResponse,
  type Incoming,
} from "./protocol";
import { stubAnswer } from "./stub";

export type Handler = (
  method: string,
  params: Record<string, unknown>,
) => unknown;

export interface ConnectionState {
  lastId: number;
}

function fail(
  id: number | null,
  code: "BadParams" | "ModelFailure" | "Unsupported",
  message: string,
): BridgeResponse {
  return { id, ok: false, error: { code, message } };
}

/**
 * Turn one incoming frame into the response document. Shared by the socket
 * server and the fixture recorder so recorded bytes match served bytes.
 */
export function processIncoming(
  item: Incoming,
  state: ConnectionState,
  handler: Handler = stubAnswer,
): BridgeResponse {
  if ("badJson" in item) return fail(null, "BadParams", item.badJson);
  const doc = item.doc as {
    id?: unknown;
    method?: unknown;
    params?: unknown;
  } | null;
  if (doc == null || typeof doc !== "object") {
    return fail(null, "BadParams", "request must be a JSON object");
  }
  const id = Number.isInteger(doc.id) ? (doc.id as number) : null;
  if (id == null || id <= state.lastId) {
    return fail(id, "BadParams", "id must be strictly increasing");
  }
  state.lastId = id;
  const method = typeof doc.method === "string" ? doc.method : "";
  if (!(BRIDGE_METHODS as readonly string[]).includes(method)) {
    return fail(id, "Unsupported", `unknown method ${JSON.stringify(method)}`);
  }
  const params =
    doc.params && typeof doc.params === "object"
      ? (doc.params as Record<string, unknown>)
      : {};
  try {
    return { id, ok: true, result: handler(method, params) };
  } catch (err) {
    return fail(id, "BadParams", err instanceof Error ? err.message : String(err));
  }
}

export interface BridgeServer {
  /** the bound port; meaningful once the returned promise resolves */
  port: number;
  close(): Promise<void>;
}

export function startServer(
  port: number,
  host = "127.0.0.1",
  handler: Handler = stubAnswer,
): Promise<BridgeServer> {
  const server = net.createServer({ noDelay: true });
  let active: net.Socket | null = null;
  const waiting: net.Socket[] = [];

  function attach(sock: net.Socket): void {
    active = sock;
    const reader = new MessageReader();
    const state: ConnectionState = { lastId: 0 };
    sock.on("data", (chunk) => {
      for (const item of reader.push(chunk)) {
        sock.write(encodeMessage(processIncoming(item, state, handler)));
      }
    });
    sock.on("error", () => sock.destroy());
    sock.on("close", () => {
      active = null;
      const next = waiting.shift();
      if (next) {
        attach(next);
        next.resume();
      }
    });
  }

  server.on("connection", (sock) => {
    if (active) {
      sock.pause();
      waiting.push(sock);
    } else {
      attach(sock);
    }
  });

  return new Promise((resolve, reject) => {
    server.once("error", reject);
    server.listen(port, host, () => {
      const bound = (server.address() as net.AddressInfo).port;
      resolve({
        port: bound,
        close: () =>
          new Promise<void>((done) => {
            for (const sock of waiting) sock.destroy();
            if (active) active.destroy();
            server.close(() => done());
          }),
      });
    });
  });
}
