/**
 * Wire protocol: 4-byte little-endian length prefix, then one UTF-8 JSON
 * document. Requests carry {id, method, params}; every request gets exactly
 * one response {id, ok, result|error}, in order. A body that is not valid
 * JSON still consumes its declared length, so framing never desynchronizes.
 */

export const BRIDGE_METHODS = [
  "caption",
  "correct",
  "reconstruct",
  "lpips",
  "segment",
  "health",
] as const;

export type BridgeMethod = (typeof BRIDGE_METHODS)[number];

export type ErrorCode = "BadParams" | "ModelFailure" | "Unsupported";

export interface ImageDoc {
  width: number;
  height: number;
  /** base64 of raw RGB8 bytes, row-major, exactly width*height*3 long */
  data: string;
}

export interface BridgeRequest {
  id: number;
  method: string;
  params: Record<string, unknown>;
}

export interface BridgeResponse {
  id: number | null;
  ok: boolean;
  result?: unknown;
  error?: { code: ErrorCode; message: string };
}

/** One decoded frame: either a parsed document or a decode failure note. */
export type Incoming = { doc: unknown } | { badJson: string };

export function encodeMessage(doc: unknown): Buffer {
  const body = Buffer.from(JSON.stringify(doc), "utf-8");
  const head = Buffer.allocUnsafe(4);
  head.writeUInt32LE(body.length, 0);
  return Buffer.concat([head, body]);
}

/** Incremental frame splitter; feed it chunks, get complete documents. */
export class MessageReader {
  private pending: Buffer = Buffer.alloc(0);

  push(chunk: Buffer): Incoming[] {
    this.pending = this.pending.length
      ? Buffer.concat([this.pending, chunk])
      : chunk;
    const out: Incoming[] = [];
    for (;;) {
      if (this.pending.length < 4) return out;
      const length = this.pending.readUInt32LE(0);
      if (this.pending.length < 4 + length) return out;
      const body = this.pending.subarray(4, 4 + length);
      this.pending = this.pending.subarray(4 + length);
      try {
        out.push({ doc: JSON.parse(body.toString("utf-8")) });
      } catch (err) {
        out.push({ badJson: String(err) });
      }
    }
  }
}

export interface RawImage {
  width: number;
  height: number;
  pixels: Buffer;
}

export function docToImage(doc: unknown): RawImage {
  const d = doc as ImageDoc | null;
  if (
    d == null ||
    !Number.isInteger(d.width) ||
    !Number.isInteger(d.height) ||
    typeof d.data !== "string"
  ) {
    throw new Error("image document needs integer width/height and base64 data");
  }
  const pixels = Buffer.from(d.data, "base64");
  if (pixels.length !== d.width * d.height * 3) {
    throw new Error(
      `image data is ${pixels.length} bytes, expected ${d.width * d.height * 3}`,
    );
  }
  return { width: d.width, height: d.height, pixels };
}

export function imageToDoc(image: RawImage): ImageDoc {
  return {
    width: image.width,
    height: image.height,
    data: image.pixels.toString("base64"),
  };
}
