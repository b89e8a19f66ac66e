#!/usr/bin/env python3
"""Two-process mode on loopback.

Starts a receiver in a background thread, transmits a few sessions to it,
and checks the answers against in-process runs of the same scenes. The
transmitter applies the channel before framing, so the socket itself is
lossless and both modes score identically, byte for byte.

The same exchange across real processes:
    multisc serve --port 9000 --out received/
    multisc send --to 127.0.0.1:9000 --snr 3,9 --scenes 5 --out remote.csv
"""

import threading

from multisc.channel import ChannelConfig
from multisc.metrics import report_row
from multisc.netmode import ReceiverServer, send_session
from multisc.pipeline import RunConfig, run_pipeline, scene_seed
from multisc.scene import generate_scene


def main() -> None:
    server = ReceiverServer(port=0)
    thread = threading.Thread(target=server.serve, kwargs={"max_sessions": 3},
                              daemon=True)
    thread.start()
    endpoint = f"127.0.0.1:{server.port}"
    print(f"receiver listening on {endpoint}\n")

    for snr_db in (0.0, 9.0, 18.0):
        config = RunConfig(
            channel=ChannelConfig(kind="rayleigh", snr_db=snr_db, seed=31),
            epsilon=51.0, num_scenes=1, objects_per_scene=4,
            snr_grid=(snr_db,), backend=None, output_path=None,
            master_seed=31)
        spec = generate_scene(seed=scene_seed(31, 0), num_objects=4)
        local = run_pipeline(spec, config)
        remote, answer = send_session(endpoint, spec, config)
        marker = "identical" if remote == local else "MISMATCH"
        print(f"snr {snr_db:5.1f} dB: {marker}")
        print(f"  local : {report_row(local)}")
        print(f"  socket: {report_row(remote)}"
              f"  (skipped frames: {answer['skipped_frames']})")

    thread.join(timeout=5)
    print(f"\nreceiver handled {server.sessions_handled} sessions")


if __name__ == "__main__":
    main()
