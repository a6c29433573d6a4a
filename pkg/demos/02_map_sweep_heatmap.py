"""Sweep the demo map, average the metrics and draw top-down heatmaps.

Writes the metrics CSV and one CSV/PGM heatmap pair per chosen metric into
the output directory.
"""
from __future__ import annotations

import argparse
import time
from pathlib import Path

from voxelvist import worlds
from voxelvist.survey import SweepConfig, aggregate_map, build_heatmap, default_workers, sweep
from voxelvist.world import default_block_classes


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out", default="demo_out")
    ap.add_argument("--radius", type=int, default=32)
    ap.add_argument("--rate", type=int, default=10)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--threads", type=int, default=default_workers())
    ap.add_argument("--metrics", nargs="+", default=["area", "openness", "drift", "clutter"])
    args = ap.parse_args()

    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    world = worlds.bundled_demo_world()
    classes = default_block_classes()
    config = SweepConfig(radius=args.radius, subsample=args.rate, seed=args.seed)

    t0 = time.perf_counter()
    table = sweep(world, classes, config, workers=args.threads)
    print(f"{len(table)} isovists in {time.perf_counter() - t0:.1f}s on {args.threads} worker(s)")
    table.write_csv(out / "demo_metrics.csv")

    summary = aggregate_map(table)
    print("\nmap means (every isovist, underground included):")
    for name, value in summary.means.items():
        absent = f"  ({summary.absent[name]} absent)" if summary.absent[name] else ""
        shown = "-" if value is None else f"{value:.4g}"
        print(f"  {name:<15}{shown}{absent}")

    print(f"\nheatmaps use isovists at y >= {config.y_min} only")
    for metric in args.metrics:
        grid = build_heatmap(table, metric)
        written = grid.write(out / f"heatmap_{metric}")
        lo, hi = grid.scale()
        print(f"  {metric:<10} range {lo:.4g}..{hi:.4g} -> {written[1]}")


if __name__ == "__main__":
    main()
