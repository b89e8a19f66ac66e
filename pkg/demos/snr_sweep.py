#!/usr/bin/env python3
"""SNR sweep over both channels.

Runs a small paired sweep (same scenes at every SNR point) for the
additive and fading channels and prints the per-SNR mean rows from the
CSVs. The fading channel trails at equal SNR because deep fades
occasionally wipe out whole streams.

The CLI equivalent of one of these runs:
    multisc sweep --channel awgn --snr 0:18:6 --scenes 20 --objects 3 \
        --seed 42 --out demos/out/sweep_awgn.csv --gnuplot
"""

from pathlib import Path

from multisc.channel import ChannelConfig
from multisc.metrics import CSV_HEADER
from multisc.pipeline import RunConfig, snr_sweep

OUT = Path(__file__).parent / "out"


def main() -> None:
    OUT.mkdir(exist_ok=True)
    grid = (0.0, 6.0, 12.0, 18.0)
    for kind in ("awgn", "rayleigh"):
        path = OUT / f"sweep_{kind}.csv"
        config = RunConfig(
            channel=ChannelConfig(kind=kind, snr_db=grid[0], seed=42),
            epsilon=51.0, num_scenes=20, objects_per_scene=3,
            snr_grid=grid, backend=None, output_path=str(path),
            master_seed=42)
        snr_sweep(config)
        rows = path.read_text().strip().split("\n")
        summaries = [r for r in rows if ",mean," in r]
        print(f"{kind}: wrote {path}")
        print(f"  {CSV_HEADER}")
        for row in summaries:
            print(f"  {row}")
        print()


if __name__ == "__main__":
    main()
