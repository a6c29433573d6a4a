"""Integer line traversal and sphere shells for ray casting on the block grid."""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from functools import cached_property, lru_cache
from typing import Sequence

import numpy as np

from .world import BlockPos

__all__ = [
    "bresenham3d",
    "bresenham_paths",
    "SphereShell",
    "sphere_shell",
    "shell_coverage_gaps",
    "radial_stats",
    "OCTAHEDRAL_GROUP",
    "THICKEN_LIMIT",
]

# Shells up to this radius are checked for ball coverage and thickened.
THICKEN_LIMIT = 64
# Shells whose padded paths exceed this many cells are traced in blocks.
PATH_CACHE_CELLS = 40_000_000

OCTAHEDRAL_GROUP: tuple[tuple[tuple[int, int, int], tuple[int, int, int]], ...] = tuple(
    (perm, signs)
    for perm in itertools.permutations(range(3))
    for signs in itertools.product((1, -1), repeat=3)
)


def _round_ratio(num: np.ndarray, den: np.ndarray) -> np.ndarray:
    """``num / den`` rounded half away from zero, exact in integers (den > 0)."""
    return np.sign(num) * ((2 * np.abs(num) + den) // (2 * den))


def bresenham3d(a: Sequence[int], b: Sequence[int]) -> list[BlockPos]:
    """Cells of the 3D Bresenham line from ``a`` to ``b``, both inclusive.

    Steps once per unit along the dominant axis; the two minor coordinates
    are the ideal line rounded half away from zero (relative to ``a``), so
    ``bresenham3d(a, b)`` mirrors ``bresenham3d(a, 2a - b)``.
    """
    a = np.asarray(a, dtype=np.int64)
    delta = np.asarray(b, dtype=np.int64) - a
    n = int(np.abs(delta).max())
    if n == 0:
        return [BlockPos(*a.tolist())]
    steps = np.arange(n + 1, dtype=np.int64)[:, None]
    cells = a + _round_ratio(steps * delta, np.int64(n))
    return list(map(BlockPos._make, cells.tolist()))


def bresenham_paths(offsets: np.ndarray, length: int | None = None) -> np.ndarray:
    """Vectorised :func:`bresenham3d` from the origin to every offset.

    Returns an ``(n_rays, length, 3)`` array; each path is padded by
    repeating its final cell. ``length`` defaults to the longest path.
    """
    offsets = np.asarray(offsets, dtype=np.int64).reshape(-1, 3)
    n = np.abs(offsets).max(axis=1)
    if length is None:
        length = int(n.max(initial=0)) + 1
    steps = np.minimum(np.arange(length, dtype=np.int64)[None, :], n[:, None])
    den = np.maximum(n, 1)[:, None, None]
    return _round_ratio(steps[:, :, None] * offsets[:, None, :], den)


@dataclass(frozen=True, eq=False)
class SphereShell:
    """Ray targets around a centroid.

    ``offsets`` is sorted lexicographically. ``added`` counts the offsets
    contributed by thickening on top of the rounded-radius surface.
    """

    radius: int
    offsets: np.ndarray
    added: int = 0

    def __len__(self) -> int:
        return len(self.offsets)

    @property
    def path_length(self) -> int:
        return int(np.abs(self.offsets).max(initial=0)) + 1

    @cached_property
    def _paths(self) -> np.ndarray:
        p = bresenham_paths(self.offsets, self.path_length).astype(np.int32)
        p.flags.writeable = False
        return p

    def iter_paths(self, chunk_cells: int = 4_000_000):
        """Yield ``(start, paths)`` blocks covering every ray.

        Small shells keep their paths cached; large ones recompute per block
        to bound memory.
        """
        total = len(self.offsets) * self.path_length
        if total <= PATH_CACHE_CELLS:
            yield 0, self._paths
            return
        per = max(1, chunk_cells // self.path_length)
        for start in range(0, len(self.offsets), per):
            block = self.offsets[start : start + per]
            yield start, bresenham_paths(block, self.path_length).astype(np.int32)


def _rounded_surface(radius: int) -> np.ndarray:
    # round(|v|) == r  <=>  (2r-1)^2 <= 4|v|^2 < (2r+1)^2 ; no ties are possible
    lo, hi = (2 * radius - 1) ** 2, (2 * radius + 1) ** 2
    axis = np.arange(-radius - 1, radius + 2, dtype=np.int64)
    yy, zz = np.meshgrid(axis, axis, indexing="ij")
    yz = yy * yy + zz * zz
    out = []
    for x in axis:
        q = 4 * (x * x + yz)
        m = (q >= lo) & (q < hi)
        out.append(np.column_stack([np.full(int(m.sum()), x), yy[m], zz[m]]))
    return np.concatenate(out)


def _orbit(v: Sequence[int]) -> set[tuple[int, int, int]]:
    return {
        tuple(signs[i] * v[perm[i]] for i in range(3))  # type: ignore[misc]
        for perm, signs in OCTAHEDRAL_GROUP
    }


def _keys(cells: np.ndarray, span: int) -> np.ndarray:
    c = cells + span
    w = 2 * span + 1
    return (c[..., 0] * w + c[..., 1]) * w + c[..., 2]


def _ball(radius: int) -> np.ndarray:
    axis = np.arange(-radius, radius + 1, dtype=np.int64)
    grid = np.stack(np.meshgrid(axis, axis, axis, indexing="ij"), -1).reshape(-1, 3)
    return grid[(grid * grid).sum(1) <= radius * radius]


def _coverage_target(radius: int) -> np.ndarray:
    # the whole ball of radius r, plus the 26 neighbours so that r=1 sees them all
    cube = np.array(list(itertools.product((-1, 0, 1), repeat=3)), dtype=np.int64)
    both = np.concatenate([_ball(radius), cube])
    return np.unique(both, axis=0)


def shell_coverage_gaps(offsets: np.ndarray, radius: int) -> np.ndarray:
    """Cells of the ball of radius ``radius`` and of the 3x3x3 neighbourhood that no ray visits."""
    span = radius + 2
    paths = bresenham_paths(offsets)
    seen = np.unique(_keys(paths.reshape(-1, 3), span))
    target = _coverage_target(radius)
    return target[~np.isin(_keys(target, span), seen)]


def _on_path(v: np.ndarray, cell: Sequence[int]) -> bool:
    n = int(np.abs(v).max())
    i = max(abs(c) for c in cell)
    if i > n:
        return False
    return tuple(_round_ratio(i * v, np.int64(n)).tolist()) == tuple(cell)


def _donor_for(cell: Sequence[int], radius: int) -> tuple[int, int, int] | None:
    """An offset with norm in [r-1, r+1] whose ray passes through ``cell``."""
    c = np.asarray(cell, dtype=np.float64)
    norm = float(np.linalg.norm(c))
    for target in (radius - 1, radius, radius + 1):
        base = np.round(c * target / norm).astype(np.int64)
        candidates = sorted(
            {tuple((base + d).tolist()) for d in itertools.product((-1, 0, 1), repeat=3)},
            key=lambda v: (abs(float(np.linalg.norm(v)) - target), v),
        )
        for v in candidates:
            nv = float(np.linalg.norm(v))
            if radius - 1 <= nv <= radius + 1 and _on_path(np.asarray(v), cell):
                return v  # type: ignore[return-value]
    return None


def _thicken(offsets: np.ndarray, radius: int) -> tuple[np.ndarray, int]:
    current = set(map(tuple, offsets.tolist()))
    start = len(current)
    while True:
        gaps = shell_coverage_gaps(np.array(sorted(current)), radius)
        if len(gaps) == 0:
            break
        new: set[tuple[int, int, int]] = set()
        handled: set[tuple[int, int, int]] = set()
        for cell in map(tuple, gaps.tolist()):
            if cell in handled:
                continue
            donor = _donor_for(cell, radius)
            if donor is None:
                raise RuntimeError(f"no shell offset covers {cell} at radius {radius}")
            new |= _orbit(donor)
            handled |= _orbit(cell)
        new -= current
        if not new:
            raise RuntimeError(f"thickening stalled at radius {radius}")
        current |= new
    return np.array(sorted(current), dtype=np.int64), len(current) - start


@lru_cache(maxsize=8)
def sphere_shell(radius: int, thicken_limit: int = THICKEN_LIMIT) -> SphereShell:
    """Integer offsets at rounded distance ``radius`` from the centre.

    For ``radius <= thicken_limit`` the shell is also guaranteed to reach
    every cell of the ball of radius ``radius`` (not just ``radius - 1``)
    and every neighbour of the centre: offsets (and their 48
    symmetric images) are added until rays cover all of it.
    """
    if int(radius) != radius or radius < 1:
        raise ValueError(f"radius must be a positive integer, got {radius!r}")
    radius = int(radius)
    offsets = _rounded_surface(radius)
    added = 0
    if radius <= thicken_limit:
        offsets, added = _thicken(offsets, radius)
    else:
        order = np.lexsort(offsets.T[::-1])
        offsets = offsets[order]
    offsets = offsets.astype(np.int32)
    offsets.flags.writeable = False
    return SphereShell(radius, offsets, added)


def radial_stats(lengths) -> tuple[float, float, float]:
    """Population mean, population variance and maximum of radial lengths."""
    arr = np.asarray(lengths, dtype=np.float64).ravel()
    if arr.size == 0:
        raise ValueError("radial_stats needs at least one length")
    if np.any(arr < 0):
        raise ValueError("radial lengths must be non-negative")
    mean = float(arr.mean())
    var = float(((arr - mean) ** 2).mean())
    return mean, var, float(arr.max())
