"""Command line entry point: ``voxelvist {scan,isovist,sweep,heatmap,aggregate,correlate}``."""
from __future__ import annotations

import argparse
import hashlib
import json
import logging
import sys
import time
from pathlib import Path

from . import __version__
from .geometry import sphere_shell
from .isovist import METRIC_NAMES, NotAHeadspaceError, compute_isovist, derive_metrics
from .reachability import floodfill_reach
from .stats import RatingTable, correlation_matrix
from .survey import (
    MetricsTable,
    SweepConfig,
    aggregate_map,
    build_heatmap,
    default_workers,
    read_means_csv,
    sweep,
    write_means_csv,
)
from .world import default_block_classes, enumerate_headspaces, load_block_classes, load_world

log = logging.getLogger("voxelvist")


class DataError(Exception):
    pass


def _sha256(path: Path) -> str:
    return hashlib.sha256(path.read_bytes()).hexdigest()


def _write_manifest(out: Path, command: str, inputs: dict[str, Path], outputs: list[Path], **extra) -> Path:
    manifest = out.with_name(out.name + ".manifest.json")
    doc = {
        "tool": "voxelvist",
        "version": __version__,
        "command": command,
        "inputs": {k: {"path": str(p), "sha256": _sha256(p)} for k, p in inputs.items()},
        "outputs": [str(p) for p in outputs],
        **extra,
    }
    manifest.write_text(json.dumps(doc, indent=2, sort_keys=True) + "\n")
    return manifest


def _load(args):
    path = Path(args.world)
    if not path.exists():
        raise DataError(f"world file not found: {path}")
    world = load_world(path, args.format)
    classes = load_block_classes(args.classes) if args.classes else default_block_classes()
    return path, world, classes


def cmd_scan(args) -> int:
    _, world, classes = _load(args)
    heads = enumerate_headspaces(world, classes)
    lo, hi = world.bounds()
    print(f"headspaces: {len(heads)}")
    print("dims: {} {} {}".format(*world.dims))
    print(f"bounds: {tuple(lo)} .. {tuple(hi)}")
    if heads:
        ys = sorted({p.y for p in heads})
        print(f"height levels: {len(ys)} (y {ys[0]}..{ys[-1]})")
    return 0


def cmd_isovist(args) -> int:
    _, world, classes = _load(args)
    centroid = (args.x, args.y, args.z)
    shell = sphere_shell(args.radius)
    try:
        sets = compute_isovist(world, classes, centroid, shell)
    except NotAHeadspaceError as exc:
        raise DataError(str(exc)) from None
    reach = floodfill_reach(world, classes, sets.centroid - (0, 2, 0), args.steps)
    metrics = derive_metrics(sets, reach, clutter=args.clutter)
    for name, value in metrics.as_dict().items():
        shown = "" if value is None else (value if isinstance(value, int) else f"{value:.6g}")
        print(f"{name}={shown}")
    if args.perimeter_out:
        lines = ["x,y,z,block,real"]
        for p in sorted(sets.perimeter):
            lines.append(f"{p.x},{p.y},{p.z},{sets.perimeter[p]},{int(p in sets.real_perimeter)}")
        Path(args.perimeter_out).write_text("\n".join(lines) + "\n")
    return 0


def cmd_sweep(args) -> int:
    t0 = time.perf_counter()
    path, world, classes = _load(args)
    overrides = dict(
        radius=args.radius, reach_steps=args.steps, subsample=args.rate, seed=args.seed, clutter=args.clutter
    )
    if args.config:
        config = SweepConfig.from_file(args.config, **overrides)
    else:
        config = SweepConfig(**{k: v for k, v in overrides.items() if v is not None})
    workers = args.threads or default_workers()
    t_load = time.perf_counter()

    def progress(done, total):
        log.info("isovists %d/%d", done, total)

    table = sweep(world, classes, config, workers=workers, progress=progress)
    t_sweep = time.perf_counter()
    out = Path(args.out)
    table.write_csv(out)
    t_write = time.perf_counter()
    inputs = {"world": path}
    if args.classes:
        inputs["classes"] = Path(args.classes)
    if args.config:
        inputs["config"] = Path(args.config)
    manifest = _write_manifest(
        out,
        "sweep",
        inputs,
        [out],
        config=vars(config),
        threads=workers,
        counts={"headspaces": len(enumerate_headspaces(world, classes)), "centroids": len(table)},
        timings={
            "load_s": round(t_load - t0, 4),
            "sweep_s": round(t_sweep - t_load, 4),
            "write_s": round(t_write - t_sweep, 4),
        },
    )
    print(f"wrote {len(table)} rows to {out} (manifest {manifest.name})")
    return 0


def cmd_heatmap(args) -> int:
    src = Path(args.metrics)
    if not src.exists():
        raise DataError(f"metrics file not found: {src}")
    if args.metric not in METRIC_NAMES:
        raise DataError(f"unknown metric {args.metric!r}; choose from {', '.join(METRIC_NAMES)}")
    table = MetricsTable.read_csv(src)
    grid = build_heatmap(table, args.metric, y_min=args.ymin, extent=tuple(args.extent) if args.extent else None)
    written = grid.write(Path(args.out))
    _write_manifest(Path(args.out), "heatmap", {"metrics": src}, written, metric=args.metric, y_min=args.ymin)
    print("wrote " + ", ".join(str(p) for p in written))
    return 0


def cmd_aggregate(args) -> int:
    groups: dict[str, list[Path]] = {}
    for spec in args.inputs:
        gen, sep, csv_path = spec.partition("=")
        if not sep or not gen or not csv_path:
            raise DataError(f"expected GENERATOR=metrics.csv, got {spec!r}")
        groups.setdefault(gen, []).append(Path(csv_path))
    means = {}
    for gen, paths in groups.items():
        for p in paths:
            if not p.exists():
                raise DataError(f"metrics file not found: {p}")
        summary = aggregate_map([MetricsTable.read_csv(p) for p in paths])
        means[gen] = summary.means
    out = Path(args.out)
    write_means_csv(means, out)
    inputs = {f"{gen}[{i}]": p for gen, ps in groups.items() for i, p in enumerate(ps)}
    _write_manifest(out, "aggregate", inputs, [out])
    print(f"wrote means for {len(means)} generators to {out}")
    return 0


def cmd_correlate(args) -> int:
    means_path, ratings_path = Path(args.means), Path(args.ratings)
    for p in (means_path, ratings_path):
        if not p.exists():
            raise DataError(f"file not found: {p}")
    means = read_means_csv(means_path)
    ratings = RatingTable.read_csv(ratings_path)
    report = correlation_matrix(means, ratings)
    out = Path(args.out)
    out.write_text(report.to_csv(), newline="")
    _write_manifest(out, "correlate", {"means": means_path, "ratings": ratings_path}, [out], dropped=report.dropped)
    if report.dropped:
        print(f"dropped generators without both sides: {', '.join(report.dropped)}")
    print(f"wrote {len(report.cells)} correlations to {out}")
    return 0


def _world_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("world", help="world file (layered-text or .json voxel-json)")
    p.add_argument("--classes", help="block-classes file (default: bundled Minecraft names)")
    p.add_argument("--format", choices=["layered-text", "voxel-json"], help="override format detection")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="voxelvist", description="Isovist metrics for voxel worlds.")
    parser.add_argument("--version", action="version", version=f"voxelvist {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true", help="progress output on stderr")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("scan", help="count headspaces")
    _world_args(p)
    p.set_defaults(func=cmd_scan)

    p = sub.add_parser("isovist", help="metrics for one centroid")
    _world_args(p)
    p.add_argument("x", type=int)
    p.add_argument("y", type=int)
    p.add_argument("z", type=int)
    p.add_argument("--radius", type=int, default=256)
    p.add_argument("--steps", type=int, default=10)
    p.add_argument("--clutter", choices=["equation", "reachable"], default="equation")
    p.add_argument("--perimeter-out", help="CSV dump of perimeter cells")
    p.set_defaults(func=cmd_isovist)

    p = sub.add_parser("sweep", help="metrics for sampled centroids of a whole map")
    _world_args(p)
    p.add_argument("--radius", type=int)
    p.add_argument("--steps", type=int)
    p.add_argument("--rate", type=int, help="keep 1 in RATE headspaces per height level")
    p.add_argument("--seed", type=int)
    p.add_argument("--clutter", choices=["equation", "reachable"])
    p.add_argument("--config", help="sectioned config file with a [sweep] section")
    p.add_argument("--threads", type=int, help="worker processes (env VOXELVIST_THREADS, else CPU count)")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("heatmap", help="top-down heatmap from a metrics CSV")
    p.add_argument("metrics")
    p.add_argument("--metric", required=True)
    p.add_argument("--ymin", type=int, default=60)
    p.add_argument("--extent", type=int, nargs=4, metavar=("XMIN", "XMAX", "ZMIN", "ZMAX"))
    p.add_argument("--out", required=True, help="output stem; writes .csv, .pgm and .pgm.scale.txt")
    p.set_defaults(func=cmd_heatmap)

    p = sub.add_parser("aggregate", help="per-generator metric means from metrics CSVs")
    p.add_argument("inputs", nargs="+", metavar="GENERATOR=CSV")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_aggregate)

    p = sub.add_parser("correlate", help="Spearman correlation of means against ratings")
    p.add_argument("means")
    p.add_argument("ratings")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_correlate)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.WARNING,
        format="%(asctime)s %(name)s %(message)s",
        stream=sys.stderr,
    )
    try:
        return args.func(args)
    except (DataError, OSError, ValueError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
