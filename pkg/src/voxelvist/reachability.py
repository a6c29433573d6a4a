"""Step-bounded flood fill over support blocks.

Movement model: one lateral step per move (4-connected by default). From a
support at height ``y`` the avatar can

* walk level onto a support at ``y``,
* climb onto a support at ``y + 1`` if the cell above its own head is free,
* walk off an edge and fall onto the first support below.

Every landing must leave a full headspace above it, and falling needs the
empty column between the walking height and the landing. A looser
``column`` rule, which lands on any support of the neighbour column, is
available for comparison.
"""
from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from typing import Mapping, Sequence

from .world import BlockClasses, BlockPos, ClassifiedWorld, VoxelWorld, classify

__all__ = ["ReachSet", "InvalidStartError", "floodfill_reach", "LATERAL_4", "LATERAL_8"]

LATERAL_4 = ((1, 0), (-1, 0), (0, 1), (0, -1))
LATERAL_8 = LATERAL_4 + ((1, 1), (1, -1), (-1, 1), (-1, -1))


class InvalidStartError(ValueError):
    """The start block does not support a headspace."""


@dataclass(frozen=True)
class ReachSet:
    start_support: BlockPos
    steps: int
    step_of: Mapping[BlockPos, int]

    @property
    def cells(self) -> frozenset[BlockPos]:
        return frozenset(self.step_of)

    def __len__(self) -> int:
        return len(self.step_of)

    def __contains__(self, p) -> bool:
        return p in self.step_of


def _supports_headspace(cw: ClassifiedWorld, s: BlockPos) -> bool:
    return cw.is_headspace((s.x, s.y + 2, s.z))


def _landing(cw: ClassifiedWorld, s: BlockPos, nx: int, nz: int, max_drop: int | None) -> list[BlockPos]:
    y = s.y
    up = BlockPos(nx, y + 1, nz)
    if cw.is_standable(up):
        if _supports_headspace(cw, up) and cw.is_empty((s.x, y + 3, s.z)):
            return [up]
        return []
    # the body enters the neighbour column at its current height
    if not (cw.is_empty((nx, y + 1, nz)) and cw.is_empty((nx, y + 2, nz))):
        return []
    lowest = cw.world.origin.y - 1
    yy = y
    while yy >= lowest:
        if max_drop is not None and y - yy > max_drop:
            return []
        p = BlockPos(nx, yy, nz)
        if cw.is_standable(p):
            return [p] if _supports_headspace(cw, p) else []
        if not cw.is_empty(p):
            return []
        yy -= 1
    return []


def _column_landings(cw: ClassifiedWorld, s: BlockPos, nx: int, nz: int, max_drop: int | None) -> list[BlockPos]:
    # every support in the column up to one above, whatever lies in between
    out = []
    top = s.y + 1
    bottom = cw.world.origin.y if max_drop is None else max(cw.world.origin.y, s.y - max_drop)
    for yy in range(top, bottom - 1, -1):
        p = BlockPos(nx, yy, nz)
        if not (cw.is_standable(p) and _supports_headspace(cw, p)):
            continue
        if yy == top and not cw.is_empty((s.x, s.y + 3, s.z)):
            continue
        out.append(p)
    return out


def floodfill_reach(
    world: VoxelWorld,
    classes: BlockClasses,
    start_support: Sequence[int],
    n: int = 10,
    *,
    diagonal: bool = False,
    max_drop: int | None = None,
    neighbor_order: Sequence[tuple[int, int]] | None = None,
    landing: str = "fall",
) -> ReachSet:
    """Breadth-first fill of supports walkable from ``start_support`` in ``n`` moves.

    Each lateral move costs one step whatever the height change.
    ``neighbor_order`` only changes exploration order, never the result.

    ``landing="fall"`` drops the avatar onto the first support below it.
    ``landing="column"`` instead accepts every support in the neighbour
    column no higher than one above, ignoring blocks in between.
    """
    if n < 0:
        raise ValueError("step budget must be non-negative")
    cw = classify(world, classes)
    start = BlockPos(*(int(v) for v in start_support))
    if not _supports_headspace(cw, start):
        raise InvalidStartError(f"{tuple(start)} does not support a headspace")

    if landing == "fall":
        land = _landing
    elif landing == "column":
        land = _column_landings
    else:
        raise ValueError(f"unknown landing rule {landing!r}")
    moves = neighbor_order if neighbor_order is not None else (LATERAL_8 if diagonal else LATERAL_4)
    step_of = {start: 0}
    queue = deque([start])
    while queue:
        s = queue.popleft()
        k = step_of[s]
        if k == n:
            continue
        for dx, dz in moves:
            for t in land(cw, s, s.x + dx, s.z + dz, max_drop):
                if t not in step_of:
                    step_of[t] = k + 1
                    queue.append(t)
    return ReachSet(start, n, step_of)
