#!/usr/bin/env python3
"""Attaching the model-server stub.

Launches the TypeScript stub backend (bridge/dist/cli.js, built with
`npm run build` inside bridge/), talks to it over the length-prefixed
JSON protocol, and runs a tiny sweep with perceptual scoring delegated to
it. Requires node and the built bridge; prints instructions otherwise.
"""

import shutil
import subprocess
import sys
from pathlib import Path

import numpy as np

from multisc.bridge import BridgeClient
from multisc.channel import ChannelConfig
from multisc.pipeline import RunConfig, snr_sweep

BRIDGE_CLI = Path(__file__).parent.parent / "bridge" / "dist" / "cli.js"
OUT = Path(__file__).parent / "out"


def main() -> int:
    if not (BRIDGE_CLI.exists() and shutil.which("node")):
        print("bridge not built; run: cd bridge && npm install && npm run build")
        return 1
    OUT.mkdir(exist_ok=True)
    proc = subprocess.Popen(["node", str(BRIDGE_CLI), "--port", "0", "--stub"],
                            stdout=subprocess.PIPE, text=True)
    try:
        port = int(proc.stdout.readline().split()[1])
        endpoint = f"127.0.0.1:{port}"
        print(f"stub backend on {endpoint}\n")

        with BridgeClient(endpoint) as client:
            print(f"health: {client.health()}")
            image = np.zeros((4, 6, 3), dtype=np.uint8)
            print(f'caption: "{client.caption(image, "describe the picture")}"')
            shifted = image.copy()
            shifted[:, :, 0] = 51
            print(f"lpips(identical) = {client.lpips(image, image)}")
            print(f"lpips(one channel off by 51) = {client.lpips(image, shifted):.4f}")

        path = OUT / "sweep_with_lpips.csv"
        config = RunConfig(
            channel=ChannelConfig(kind="awgn", snr_db=6.0, seed=9),
            epsilon=51.0, num_scenes=3, objects_per_scene=3,
            snr_grid=(6.0, 18.0), backend=endpoint, output_path=str(path),
            master_seed=9)
        with BridgeClient(endpoint) as client:
            snr_sweep(config, backend=client)
        print(f"\nsweep with lpips column -> {path}")
        for row in path.read_text().strip().split("\n"):
            print(f"  {row}")
    finally:
        proc.kill()
        proc.wait()
    return 0


if __name__ == "__main__":
    sys.exit(main())
