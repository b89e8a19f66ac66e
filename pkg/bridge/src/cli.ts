#!/usr/bin/env node
/**
 * multisc-bridge --port P [--stub] [--caption-model NAME] [--lpips-net NAME]
 *
 * Prints "LISTENING <port>" once the socket is bound (with --port 0 the OS
 * picks, so callers read this line to learn the port). Only stub mode is
 * implemented here: model-backed mode needs weights this package does not
 * ship, so starting without --stub exits with an explanation.
 */

import { parseArgs } from "node:util";

import { startServer } from "./server";

async function main(): Promise<number> {
  let values;
  try {
    ({ values } = parseArgs({
      options: {
        port: { type: "string" },
        stub: { type: "boolean", default: false },
        "caption-model": { type: "string" },
        "lpips-net": { type: "string" },
      },
    }));
  } catch (err) {
    console.error(`error: ${err instanceof Error ? err.message : err}`);
    return 2;
  }
  if (values.port === undefined || !/^\d+$/.test(values.port)) {
    console.error("error: --port must be a non-negative integer");
    return 2;
  }
  if (!values.stub) {
    console.error(
      "error: model weights are not bundled; run with --stub for the " +
        "deterministic stub backend",
    );
    return 2;
  }
  const server = await startServer(Number(values.port));
  console.log(`LISTENING ${server.port}`);
  await new Promise<void>((resolve) => {
    process.on("SIGINT", resolve);
    process.on("SIGTERM", resolve);
  });
  await server.close();
  return 0;
}

main().then(
  (code) => process.exit(code),
  (err) => {
    console.error(`error: ${err instanceof Error ? err.message : err}`);
    process.exit(1);
  },
);
