"""Per-centroid isovist sets and the metrics derived from them.

Rays run from the centroid's head cell to every offset of a
:class:`~voxelvist.geometry.SphereShell`. A ray stops at the first cell that
is not transparent; that cell joins the perimeter (and the real perimeter,
being opaque). A ray that reaches its shell cell unobstructed contributes
that see-through end cell to the perimeter only. Headspaces on the
unobstructed part of any ray, no farther than the shell radius from the
centroid, are visible.
"""
from __future__ import annotations

from dataclasses import dataclass, fields
from typing import Iterable, Mapping, Sequence

import numpy as np

from .geometry import SphereShell, bresenham3d, radial_stats
from .world import AIR, BlockClasses, BlockPos, ClassifiedWorld, VoxelWorld, classify

__all__ = [
    "NotAHeadspaceError",
    "IsovistSets",
    "IsovistMetrics",
    "METRIC_NAMES",
    "compute_isovist",
    "visible",
    "drift",
    "derive_metrics",
    "isovist_metrics",
]


class NotAHeadspaceError(ValueError):
    """The requested centroid is not a valid headspace."""


@dataclass(frozen=True)
class IsovistSets:
    """Base sets for one centroid.

    ``perimeter`` maps each terminating cell to its block name; the real
    perimeter is the opaque subset. ``radial_endpoints`` holds absolute
    positions, one row per shell offset, aligned with ``radial_lengths``.
    """

    centroid: BlockPos
    radius: int
    visible_headspaces: frozenset[BlockPos]
    supports: frozenset[BlockPos]
    perimeter: Mapping[BlockPos, str]
    real_perimeter: Mapping[BlockPos, str]
    radial_lengths: np.ndarray
    radial_endpoints: np.ndarray


@dataclass(frozen=True)
class IsovistMetrics:
    area: int
    perimeter: int
    real_perimeter: int
    diversity: int
    mean_radial: float
    var_radial: float
    vista: float
    drift: float
    roundness: float
    openness: float | None
    reachability: int
    occlusivity: float | None
    clutter: float

    def as_dict(self) -> dict[str, float | int | None]:
        return {f.name: getattr(self, f.name) for f in fields(self)}


METRIC_NAMES: tuple[str, ...] = tuple(f.name for f in fields(IsovistMetrics))


def _trace(cw: ClassifiedWorld, centroid: BlockPos, shell: SphereShell):
    """Walk every shell ray; return visible headspace, terminal and blocked arrays (local coords)."""
    dims = np.asarray(cw.world.dims, dtype=np.int64)
    sy, sz = int(dims[1]), int(dims[2])
    c = np.asarray(cw.to_local(centroid), dtype=np.int32)
    transparent = cw.transparent.ravel()
    headspace = cw.headspace.ravel()
    ray_len = np.abs(shell.offsets).max(axis=1).astype(np.int64)
    r2 = shell.radius * shell.radius

    seen_parts = []
    terminals = np.empty((len(shell), 3), dtype=np.int64)
    blocked_any = np.empty(len(shell), dtype=bool)

    for start, paths in shell.iter_paths():
        stop = start + len(paths)
        cells = paths + c
        inb = np.all((cells >= 0) & (cells < dims.astype(np.int32)), axis=2)
        flat = (cells[..., 0].astype(np.int64) * sy + cells[..., 1]) * sz + cells[..., 2]
        flat = np.where(inb, flat, 0)
        opaque = inb & ~transparent[flat]
        opaque[:, 0] = False  # the centroid never hides itself

        hit = opaque.any(axis=1)
        first = np.where(hit, opaque.argmax(axis=1), ray_len[start:stop])
        visible_end = np.where(hit, first, paths.shape[1])
        on_prefix = np.arange(paths.shape[1])[None, :] < visible_end[:, None]

        within = (paths.astype(np.int64) ** 2).sum(axis=2) <= r2
        sel = on_prefix & within & inb & headspace[flat]
        seen_parts.append(np.unique(flat[sel]))
        terminals[start:stop] = cells[np.arange(len(paths)), first]
        blocked_any[start:stop] = hit

    seen = np.unique(np.concatenate(seen_parts)) if seen_parts else np.empty(0, np.int64)
    return seen, terminals, blocked_any


def compute_isovist(
    world: VoxelWorld, classes: BlockClasses, centroid: Sequence[int], shell: SphereShell
) -> IsovistSets:
    """Cast every shell ray from ``centroid`` and collect the base sets."""
    cw = classify(world, classes)
    centroid = BlockPos(*(int(v) for v in centroid))
    if not cw.is_headspace(centroid):
        raise NotAHeadspaceError(f"{tuple(centroid)} is not a headspace")

    seen, terminals, blocked = _trace(cw, centroid, shell)
    origin = np.asarray(world.origin, dtype=np.int64)
    sx, sy, sz = world.dims

    hs_local = np.column_stack(np.unravel_index(seen, (sx, sy, sz)))
    visible_hs = frozenset(map(BlockPos._make, (hs_local + origin).tolist()))
    supports = frozenset(BlockPos(p.x, p.y - 2, p.z) for p in visible_hs)

    term_abs = terminals + origin
    uniq, idx = np.unique(terminals, axis=0, return_index=True)
    inb = np.all((uniq >= 0) & (uniq < np.asarray(world.dims)), axis=1)
    ids = np.zeros(len(uniq), dtype=np.int64)
    ids[inb] = world.cells[tuple(uniq[inb].T)]
    names = [world.palette[i] if ok else AIR for i, ok in zip(ids.tolist(), inb.tolist())]
    positions = list(map(BlockPos._make, (uniq + origin).tolist()))
    perimeter = dict(zip(positions, names))
    real = {p: n for p, n, b in zip(positions, names, blocked[idx].tolist()) if b}

    lengths = np.linalg.norm(terminals - np.asarray(cw.to_local(centroid)), axis=1)
    return IsovistSets(
        centroid=centroid,
        radius=shell.radius,
        visible_headspaces=visible_hs,
        supports=supports,
        perimeter=perimeter,
        real_perimeter=real,
        radial_lengths=lengths,
        radial_endpoints=term_abs,
    )


def visible(world: VoxelWorld, classes: BlockClasses, a: Sequence[int], b: Sequence[int]) -> bool:
    """Per-pair visibility: every interior cell of the line from a to b is transparent."""
    cw = classify(world, classes)
    line = bresenham3d(a, b)
    return all(cw.is_transparent(p) for p in line[1:-1])


def drift(radial_endpoints, centroid: Sequence[int]) -> float:
    """Distance from the centroid to the mean radial end point."""
    ends = np.asarray(radial_endpoints, dtype=np.float64).reshape(-1, 3)
    if len(ends) == 0:
        raise ValueError("drift needs at least one radial end point")
    return float(np.linalg.norm(ends.mean(axis=0) - np.asarray(centroid, dtype=np.float64)))


def derive_metrics(
    sets: IsovistSets,
    reach: Iterable[BlockPos],
    clutter: str = "equation",
) -> IsovistMetrics:
    """All scalar metrics from the base sets and a reachable-support set.

    ``clutter="equation"`` uses visible supports that are also perimeter
    cells; ``clutter="reachable"`` additionally requires them to be
    reachable. Openness and occlusivity are ``None`` when their denominator
    is zero.
    """
    reach = frozenset(getattr(reach, "cells", reach))
    area = len(sets.visible_headspaces)
    perimeter = len(sets.perimeter)
    real_perimeter = len(sets.real_perimeter)
    mean, var, vista = radial_stats(sets.radial_lengths)

    seen_supports = sets.supports & sets.perimeter.keys()
    if clutter == "reachable":
        seen_supports = seen_supports & reach
    elif clutter != "equation":
        raise ValueError(f"unknown clutter variant {clutter!r}")

    return IsovistMetrics(
        area=area,
        perimeter=perimeter,
        real_perimeter=real_perimeter,
        diversity=len(set(sets.perimeter.values())),
        mean_radial=mean,
        var_radial=var,
        vista=vista,
        drift=drift(sets.radial_endpoints, sets.centroid),
        roundness=area / perimeter,
        openness=area / real_perimeter if real_perimeter else None,
        reachability=len(reach),
        occlusivity=len(reach & sets.supports) / len(reach) if reach else None,
        clutter=len(seen_supports) / area,
    )


def isovist_metrics(
    world: VoxelWorld,
    classes: BlockClasses,
    centroid: Sequence[int],
    shell: SphereShell,
    steps: int = 10,
    clutter: str = "equation",
) -> IsovistMetrics:
    """Isovist, flood fill and metrics for one centroid."""
    from .reachability import floodfill_reach

    sets = compute_isovist(world, classes, centroid, shell)
    reach = floodfill_reach(world, classes, sets.centroid - (0, 2, 0), steps)
    return derive_metrics(sets, reach, clutter=clutter)
