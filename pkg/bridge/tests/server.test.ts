import * as fs from "node:fs";
import * as net from "node:net";
import * as path from "node:path";
import { afterEach, beforeEach, describe, expect, it } from "vitest";

import {
  encodeMessage,
  MessageReader,
  type BridgeResponse,
} from "../src/protocol";
import { startServer, type BridgeServer } from "../src/server";

const FIXTURE = path.join(__dirname, "fixtures", "conversation.json");

function connect(port: number): Promise<net.Socket> {
  return new Promise((resolve, reject) => {
    const sock = net.connect({ port, host: "127.0.0.1" }, () => resolve(sock));
    sock.once("error", reject);
  });
}

/** Send frames, then await n response documents. */
function exchange(
  sock: net.Socket,
  frames: Buffer[],
  n: number,
  timeoutMs = 5000,
): Promise<BridgeResponse[]> {
  return new Promise((resolve, reject) => {
    const reader = new MessageReader();
    const docs: BridgeResponse[] = [];
    const timer = setTimeout(
      () => reject(new Error(`timed out with ${docs.length}/${n} responses`)),
      timeoutMs,
    );
    sock.on("data", (chunk) => {
      for (const item of reader.push(chunk)) {
        if (!("doc" in item)) {
          clearTimeout(timer);
          reject(new Error("server sent undecodable JSON"));
          return;
        }
        docs.push(item.doc as BridgeResponse);
        if (docs.length === n) {
          clearTimeout(timer);
          resolve(docs);
        }
      }
    });
    for (const frame of frames) sock.write(frame);
  });
}

describe("bridge server", () => {
  let server: BridgeServer;

  beforeEach(async () => {
    server = await startServer(0);
  });

  afterEach(async () => {
    await server.close();
  });

  it("answers health with the method list", async () => {
    const sock = await connect(server.port);
    const [response] = await exchange(
      sock,
      [encodeMessage({ id: 1, method: "health", params: {} })],
      1,
    );
    expect(response).toEqual({
      id: 1,
      ok: true,
      result: {
        methods: ["caption", "correct", "reconstruct", "lpips", "segment", "health"],
      },
    });
    sock.destroy();
  });

  it("enforces strictly increasing ids but keeps serving", async () => {
    const sock = await connect(server.port);
    const frames = [
      encodeMessage({ id: 1, method: "health", params: {} }),
      encodeMessage({ id: 1, method: "health", params: {} }),
      encodeMessage({ id: 2, method: "health", params: {} }),
    ];
    const [ok1, dup, ok2] = await exchange(sock, frames, 3);
    expect(ok1.ok).toBe(true);
    expect(dup.ok).toBe(false);
    expect(dup.error?.code).toBe("BadParams");
    expect(ok2).toMatchObject({ id: 2, ok: true });
    sock.destroy();
  });

  it("rejects unknown methods with Unsupported", async () => {
    const sock = await connect(server.port);
    const [response] = await exchange(
      sock,
      [encodeMessage({ id: 1, method: "teleport", params: {} })],
      1,
    );
    expect(response.ok).toBe(false);
    expect(response.error?.code).toBe("Unsupported");
    sock.destroy();
  });

  it("answers malformed JSON with id null, then recovers", async () => {
    const sock = await connect(server.port);
    const bad = Buffer.from("{broken", "utf-8");
    const head = Buffer.alloc(4);
    head.writeUInt32LE(bad.length, 0);
    const frames = [
      Buffer.concat([head, bad]),
      encodeMessage({ id: 1, method: "health", params: {} }),
    ];
    const [err, ok] = await exchange(sock, frames, 2);
    expect(err).toMatchObject({ id: null, ok: false });
    expect(err.error?.code).toBe("BadParams");
    expect(ok).toMatchObject({ id: 1, ok: true });
    sock.destroy();
  });

  it("maps handler failures to BadParams error responses", async () => {
    const sock = await connect(server.port);
    const [response] = await exchange(
      sock,
      [encodeMessage({ id: 1, method: "correct", params: { text: 7 } })],
      1,
    );
    expect(response.ok).toBe(false);
    expect(response.error?.code).toBe("BadParams");
    expect(response.error?.message).toMatch(/string/);
    sock.destroy();
  });

  it("serves one connection at a time, queueing the next", async () => {
    const first = await connect(server.port);
    const second = await connect(server.port);
    const secondDone = exchange(
      second,
      [encodeMessage({ id: 1, method: "health", params: {} })],
      1,
    );
    // the second connection must stay unanswered while the first is open
    const raced = await Promise.race([
      secondDone.then(() => "answered"),
      new Promise((resolve) => setTimeout(() => resolve("waiting"), 200)),
    ]);
    expect(raced).toBe("waiting");
    first.destroy();
    const [response] = await secondDone;
    expect(response).toMatchObject({ id: 1, ok: true });
    second.destroy();
  });

  it("replays the golden conversation byte-identically", async () => {
    const steps: { request_hex: string; response_hex: string }[] = JSON.parse(
      fs.readFileSync(FIXTURE, "utf-8"),
    );
    expect(steps).toHaveLength(6);
    const sock = await connect(server.port);
    for (const step of steps) {
      const want = Buffer.from(step.response_hex, "hex");
      const got = await new Promise<Buffer>((resolve, reject) => {
        const chunks: Buffer[] = [];
        let size = 0;
        const timer = setTimeout(() => reject(new Error("timed out")), 5000);
        const onData = (chunk: Buffer) => {
          chunks.push(chunk);
          size += chunk.length;
          if (size >= want.length) {
            clearTimeout(timer);
            sock.off("data", onData);
            resolve(Buffer.concat(chunks));
          }
        };
        sock.on("data", onData);
        sock.write(Buffer.from(step.request_hex, "hex"));
      });
      expect(got.equals(want)).toBe(true);
    }
    sock.destroy();
  });
});
