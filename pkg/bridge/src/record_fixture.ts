/**
 * Records the golden conversation fixture: six requests spanning every
 * method, with the stub's exact response bytes. Run once after a protocol
 * change and commit the output; the conformance tests replay it and demand
 * byte identity, so drift in framing or serialization fails loudly.
 *
 * Usage: node dist/record_fixture.js [output-path]
 */

import * as fs from "node:fs";
import * as path from "node:path";

import { encodeMessage, imageToDoc } from "./protocol";
import { processIncoming, type ConnectionState } from "./server";

function image(width: number, height: number, fill: number) {
  return imageToDoc({
    width,
    height,
    pixels: Buffer.alloc(width * height * 3, fill),
  });
}

const requests = [
  { id: 1, method: "health", params: {} },
  {
    id: 2,
    method: "caption",
    params: { image: image(2, 2, 128), query: "describe the picture" },
  },
  { id: 3, method: "correct", params: { text: "a rxd squxre at top left" } },
  { id: 4, method: "lpips", params: { a: image(2, 2, 128), b: image(2, 2, 128) } },
  { id: 5, method: "segment", params: { image: image(4, 3, 0) } },
  {
    id: 6,
    method: "reconstruct",
    params: { captions: ["a red square at top left"], image: null, lambda: 0.4, width: 3, height: 2 },
  },
];

const state: ConnectionState = { lastId: 0 };
const steps = requests.map((request) => {
  const response = processIncoming({ doc: request }, state);
  return {
    request_hex: encodeMessage(request).toString("hex"),
    response_hex: encodeMessage(response).toString("hex"),
  };
});

const out =
  process.argv[2] ??
  path.join(__dirname, "..", "tests", "fixtures", "conversation.json");
fs.mkdirSync(path.dirname(out), { recursive: true });
fs.writeFileSync(out, JSON.stringify(steps, null, 2) + "\n");
console.log(`wrote ${steps.length} steps to ${out}`);
