"""Whole-map sweeps: centroid sampling, parallel metric runs, means and heatmaps."""
from __future__ import annotations

import configparser
import csv
import io
import logging
import math
import os
from collections import defaultdict
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path
from typing import Callable, Iterable, Mapping, Sequence

import numpy as np

from .geometry import sphere_shell
from .isovist import METRIC_NAMES, IsovistMetrics, isovist_metrics
from .world import BlockClasses, BlockPos, VoxelWorld, enumerate_headspaces

__all__ = [
    "SweepConfig",
    "MetricsTable",
    "MapSummary",
    "HeatmapGrid",
    "sample_centroids",
    "sweep",
    "aggregate_map",
    "build_heatmap",
    "write_means_csv",
    "read_means_csv",
    "CSV_HEADER",
]

log = logging.getLogger(__name__)

CSV_HEADER: tuple[str, ...] = ("x", "y", "z", *METRIC_NAMES)
_INT_METRICS = {"area", "perimeter", "real_perimeter", "diversity", "reachability"}

MEASURED, INTERPOLATED, ABSENT = 1, 2, 0


@dataclass(frozen=True)
class SweepConfig:
    radius: int = 256
    reach_steps: int = 10
    subsample: int = 10
    seed: int = 0
    y_min: int = 60
    clutter: str = "equation"

    def __post_init__(self):
        if self.radius < 1:
            raise ValueError("radius must be >= 1")
        if self.reach_steps < 0:
            raise ValueError("reach_steps must be >= 0")
        if self.subsample < 1:
            raise ValueError("subsample must be >= 1")
        if self.clutter not in ("equation", "reachable"):
            raise ValueError(f"unknown clutter variant {self.clutter!r}")

    @classmethod
    def from_file(cls, path: str | Path, **overrides) -> "SweepConfig":
        """Read a ``[sweep]`` section; keys mirror the field names."""
        parser = configparser.ConfigParser()
        if not parser.read(path):
            raise FileNotFoundError(path)
        values: dict[str, object] = {}
        if parser.has_section("sweep"):
            for f in fields(cls):
                if parser.has_option("sweep", f.name):
                    raw = parser.get("sweep", f.name)
                    values[f.name] = raw if f.name == "clutter" else int(raw)
            unknown = set(parser.options("sweep")) - {f.name for f in fields(cls)}
            if unknown:
                raise ValueError(f"unknown sweep options: {sorted(unknown)}")
        values.update({k: v for k, v in overrides.items() if v is not None})
        return cls(**values)  # type: ignore[arg-type]


def _fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    return f"{value:.6g}"


@dataclass
class MetricsTable:
    """One row of metrics per sampled centroid.

    ``bounds`` is the inclusive ``(x_min, x_max, z_min, z_max)`` footprint of
    the swept world, used as the default heatmap extent.
    """

    rows: list[tuple[BlockPos, IsovistMetrics]]
    world_id: str = ""
    config: SweepConfig | None = None
    bounds: tuple[int, int, int, int] | None = None

    def __len__(self) -> int:
        return len(self.rows)

    def column(self, name: str) -> list:
        if name in ("x", "y", "z"):
            return [getattr(p, name) for p, _ in self.rows]
        if name not in METRIC_NAMES:
            raise KeyError(f"unknown metric {name!r}")
        return [getattr(m, name) for _, m in self.rows]

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(CSV_HEADER)
        for p, m in self.rows:
            writer.writerow([p.x, p.y, p.z, *(_fmt(getattr(m, n)) for n in METRIC_NAMES)])
        return buf.getvalue()

    def write_csv(self, path: str | Path) -> None:
        Path(path).write_text(self.to_csv(), newline="")

    @classmethod
    def read_csv(cls, path: str | Path, world_id: str | None = None) -> "MetricsTable":
        path = Path(path)
        with path.open(newline="") as fh:
            reader = csv.reader(fh)
            header = next(reader, None)
            if header is None or tuple(header) != CSV_HEADER:
                raise ValueError(f"{path}: unexpected metrics header {header}")
            rows = []
            for lineno, rec in enumerate(reader, 2):
                if len(rec) != len(CSV_HEADER):
                    raise ValueError(f"{path}:{lineno}: expected {len(CSV_HEADER)} fields")
                pos = BlockPos(*(int(v) for v in rec[:3]))
                vals = {}
                for name, raw in zip(METRIC_NAMES, rec[3:]):
                    if raw == "":
                        vals[name] = None
                    elif name in _INT_METRICS:
                        vals[name] = int(raw)
                    else:
                        vals[name] = float(raw)
                rows.append((pos, IsovistMetrics(**vals)))
        return cls(rows, world_id if world_id is not None else path.stem)


# --------------------------------------------------------------------------
# sampling and sweeping


def _level_rng(seed: int, y: int) -> np.random.Generator:
    # each height level gets its own stream, so adding levels never reshuffles others
    ss = np.random.SeedSequence(entropy=seed % 2**64, spawn_key=(y % 2**32,))
    return np.random.default_rng(ss)


def sample_centroids(world: VoxelWorld, classes: BlockClasses, config: SweepConfig) -> list[BlockPos]:
    """Pick ``ceil(count / k)`` headspaces per height level, uniformly at random."""
    by_level: dict[int, list[BlockPos]] = defaultdict(list)
    for p in enumerate_headspaces(world, classes):
        by_level[p.y].append(p)
    chosen: list[BlockPos] = []
    for y in sorted(by_level):
        level = sorted(by_level[y])
        take = math.ceil(len(level) / config.subsample)
        if take == len(level):
            chosen.extend(level)
            continue
        idx = _level_rng(config.seed, y).choice(len(level), size=take, replace=False)
        chosen.extend(level[i] for i in sorted(idx.tolist()))
    return chosen


_worker_state: dict = {}


def _init_worker(world, classes, config):
    _worker_state.update(world=world, classes=classes, config=config)


def _run_chunk(centroids: Sequence[BlockPos]) -> list[tuple[BlockPos, IsovistMetrics]]:
    world = _worker_state["world"]
    classes = _worker_state["classes"]
    config: SweepConfig = _worker_state["config"]
    shell = sphere_shell(config.radius)
    out = []
    for c in centroids:
        try:
            m = isovist_metrics(world, classes, c, shell, config.reach_steps, config.clutter)
        except Exception as exc:
            raise RuntimeError(f"isovist failed at centroid {tuple(c)}") from exc
        out.append((c, m))
    return out


def default_workers() -> int:
    env = os.environ.get("VOXELVIST_THREADS")
    if env:
        return max(1, int(env))
    return os.cpu_count() or 1


def sweep(
    world: VoxelWorld,
    classes: BlockClasses,
    config: SweepConfig,
    workers: int = 1,
    progress: Callable[[int, int], None] | None = None,
) -> MetricsTable:
    """Metrics for every sampled centroid, rows sorted by ``(y, x, z)``.

    ``workers > 1`` spreads centroids over a process pool; the result is
    identical to the serial run.
    """
    centroids = sample_centroids(world, classes, config)
    lo, hi = world.bounds()
    table = MetricsTable([], world.name, config, (lo.x, hi.x, lo.z, hi.z))
    if not centroids:
        return table

    sphere_shell(config.radius)  # build once before forking
    chunk = max(1, min(64, len(centroids) // (4 * max(1, workers)) or 1))
    chunks = [centroids[i : i + chunk] for i in range(0, len(centroids), chunk)]
    rows: list[tuple[BlockPos, IsovistMetrics]] = []
    done = 0
    if workers <= 1:
        _init_worker(world, classes, config)
        results: Iterable = map(_run_chunk, chunks)
        for part in results:
            rows.extend(part)
            done += len(part)
            if progress:
                progress(done, len(centroids))
    else:
        with ProcessPoolExecutor(
            max_workers=workers, initializer=_init_worker, initargs=(world, classes, config)
        ) as pool:
            for part in pool.map(_run_chunk, chunks):
                rows.extend(part)
                done += len(part)
                if progress:
                    progress(done, len(centroids))
    rows.sort(key=lambda r: (r[0].y, r[0].x, r[0].z))
    table.rows = rows
    return table


# --------------------------------------------------------------------------
# aggregation


@dataclass(frozen=True)
class MapSummary:
    means: dict[str, float | None]
    absent: dict[str, int]
    rows: int


def aggregate_map(table: MetricsTable | Iterable[MetricsTable]) -> MapSummary:
    """Per-metric arithmetic mean over all rows, skipping absent values.

    Several tables (e.g. one generator's maps) are pooled row-wise.
    """
    tables = [table] if isinstance(table, MetricsTable) else list(table)
    rows = [m for t in tables for _, m in t.rows]
    if not rows:
        raise ValueError("cannot aggregate an empty metrics table")
    means: dict[str, float | None] = {}
    absent: dict[str, int] = {}
    for name in METRIC_NAMES:
        vals = [getattr(m, name) for m in rows]
        present = [v for v in vals if v is not None]
        absent[name] = len(vals) - len(present)
        if present:
            # clamp away the last-ulp rounding of the division
            means[name] = float(min(max(math.fsum(present) / len(present), min(present)), max(present)))
        else:
            means[name] = None
    return MapSummary(means, absent, len(rows))


def write_means_csv(means: Mapping[str, Mapping[str, float | None]], path: str | Path) -> None:
    """One row per generator: ``generator,<metric>,...``."""
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["generator", *METRIC_NAMES])
    for gen in means:
        writer.writerow([gen, *(_fmt(means[gen].get(n)) for n in METRIC_NAMES)])
    Path(path).write_text(buf.getvalue(), newline="")


def read_means_csv(path: str | Path) -> dict[str, dict[str, float | None]]:
    with Path(path).open(newline="") as fh:
        reader = csv.DictReader(fh)
        if not reader.fieldnames or reader.fieldnames[0] != "generator":
            raise ValueError(f"{path}: first column must be 'generator'")
        out: dict[str, dict[str, float | None]] = {}
        for rec in reader:
            gen = rec.pop("generator")
            if gen in out:
                raise ValueError(f"{path}: duplicate generator {gen!r}")
            out[gen] = {k: (float(v) if v not in ("", None) else None) for k, v in rec.items()}
    return out


# --------------------------------------------------------------------------
# heatmaps


@dataclass
class HeatmapGrid:
    """Top-down grid of one metric; arrays are indexed ``[z - z0, x - x0]``.

    ``source`` holds ``MEASURED``, ``INTERPOLATED`` or ``ABSENT`` per cell.
    """

    metric: str
    x0: int
    z0: int
    values: np.ndarray
    source: np.ndarray = field(repr=False)

    def value_at(self, x: int, z: int) -> float:
        return float(self.values[z - self.z0, x - self.x0])

    def to_csv(self) -> str:
        nz, nx = self.values.shape
        lines = ["z\\x," + ",".join(str(self.x0 + i) for i in range(nx))]
        for j in range(nz):
            cells = ["NA" if self.source[j, i] == ABSENT else f"{self.values[j, i]:.6g}" for i in range(nx)]
            lines.append(f"{self.z0 + j}," + ",".join(cells))
        return "\n".join(lines) + "\n"

    def scale(self) -> tuple[float, float]:
        present = self.values[self.source != ABSENT]
        return float(present.min()), float(present.max())

    def to_pgm(self, maxval: int = 65535) -> tuple[str, str]:
        """Plain (P2) 16-bit PGM text and its scale sidecar.

        Pixel = floor((v - min) / (max - min) * maxval + 0.5); a constant grid
        and absent cells map to 0. Rows run from ``z0`` downwards in the file.
        """
        lo, hi = self.scale()
        nz, nx = self.values.shape
        if hi > lo:
            pix = np.floor((self.values - lo) / (hi - lo) * maxval + 0.5)
        else:
            pix = np.zeros_like(self.values)
        pix = np.where(self.source == ABSENT, 0, pix).astype(np.int64)
        out = ["P2", f"# voxelvist heatmap metric={self.metric} x0={self.x0} z0={self.z0}", f"{nx} {nz}", str(maxval)]
        out.extend(" ".join(map(str, row)) for row in pix.tolist())
        sidecar = "\n".join(
            [
                f"metric={self.metric}",
                f"min={lo!r}",
                f"max={hi!r}",
                f"maxval={maxval}",
                "pixel=floor((value-min)/(max-min)*maxval+0.5); 0 when max==min or value absent",
                f"x0={self.x0}",
                f"z0={self.z0}",
            ]
        )
        return "\n".join(out) + "\n", sidecar + "\n"

    def write(self, stem: str | Path) -> list[Path]:
        """Write ``<stem>.csv``, ``<stem>.pgm`` and ``<stem>.pgm.scale.txt``."""
        stem = Path(stem)
        csv_path = stem.with_name(stem.name + ".csv")
        pgm_path = stem.with_name(stem.name + ".pgm")
        scale_path = stem.with_name(stem.name + ".pgm.scale.txt")
        csv_path.write_text(self.to_csv(), newline="")
        pgm, sidecar = self.to_pgm()
        pgm_path.write_text(pgm, newline="")
        scale_path.write_text(sidecar, newline="")
        return [csv_path, pgm_path, scale_path]


def build_heatmap(
    table: MetricsTable,
    metric: str,
    y_min: int | None = None,
    extent: tuple[int, int, int, int] | None = None,
) -> HeatmapGrid:
    """Average ``metric`` per ``(x, z)`` over rows with ``y >= y_min``; fill gaps by nearest neighbour.

    The extent (inclusive ``x_min, x_max, z_min, z_max``) defaults to the
    table's ``bounds``, else the footprint of all its rows. Equidistant
    donors resolve to the lexicographically smallest ``(x, z)``.
    """
    if metric not in METRIC_NAMES:
        raise KeyError(f"unknown metric {metric!r}")
    if y_min is None:
        y_min = table.config.y_min if table.config else 60
    if extent is None:
        extent = table.bounds
    if extent is None:
        if not table.rows:
            raise ValueError("heatmap of an empty table")
        xs = [p.x for p, _ in table.rows]
        zs = [p.z for p, _ in table.rows]
        extent = (min(xs), max(xs), min(zs), max(zs))
    x0, x1, z0, z1 = extent
    nx, nz = x1 - x0 + 1, z1 - z0 + 1

    sums = np.zeros((nz, nx))
    counts = np.zeros((nz, nx), dtype=np.int64)
    for p, m in table.rows:
        v = getattr(m, metric)
        if p.y < y_min or v is None:
            continue
        if not (x0 <= p.x <= x1 and z0 <= p.z <= z1):
            continue
        sums[p.z - z0, p.x - x0] += v
        counts[p.z - z0, p.x - x0] += 1
    measured = counts > 0
    if not measured.any():
        raise ValueError(f"no samples of {metric!r} at y >= {y_min}")

    values = np.full((nz, nx), np.nan)
    values[measured] = sums[measured] / counts[measured]
    source = np.where(measured, MEASURED, INTERPOLATED).astype(np.uint8)

    # donors sorted by (x, z) so argmin's first hit is the tie-break winner
    dz, dx = np.nonzero(measured)
    order = np.lexsort((dz, dx))
    dx, dz = dx[order], dz[order]
    donor_vals = values[dz, dx]
    tz, tx = np.nonzero(~measured)
    step = max(1, 4_000_000 // max(1, len(dx)))
    for s in range(0, len(tx), step):
        ex = tx[s : s + step, None] - dx[None, :]
        ez = tz[s : s + step, None] - dz[None, :]
        best = np.argmin(ex * ex + ez * ez, axis=1)
        values[tz[s : s + step], tx[s : s + step]] = donor_vals[best]
    return HeatmapGrid(metric, x0, z0, values, source)


def config_dict(config: SweepConfig) -> dict:
    return asdict(config)
