"""Synthetic worlds for tests, demos and benchmarks."""
from __future__ import annotations

from importlib import resources

import numpy as np

from .world import AIR, VoxelWorld, _read_voxel_json

__all__ = [
    "flat_plane",
    "sealed_box",
    "walled_enclosure",
    "random_world",
    "terrain_world",
    "demo_world",
    "bundled_demo_world",
]


def _world(names: np.ndarray, origin=(0, 0, 0), name: str = "") -> VoxelWorld:
    return VoxelWorld.from_names(names, origin, name)


def flat_plane(size_x: int = 5, size_z: int = 5, height: int = 6, floor: str = "stone") -> VoxelWorld:
    """A one-block floor at ``y = 0`` under air."""
    names = np.full((size_x, height, size_z), AIR, dtype=object)
    names[:, 0, :] = floor
    return _world(names, name=f"flat_{size_x}x{size_z}")


def sealed_box() -> VoxelWorld:
    """Solid stone with a single 1x2 air column standing on stone.

    The only headspace is ``(1, 3, 1)``; its support is ``(1, 1, 1)``.
    """
    names = np.full((3, 5, 3), "stone", dtype=object)
    names[1, 2, 1] = AIR
    names[1, 3, 1] = AIR
    return _world(names, name="sealed_box")


def walled_enclosure(
    size: int = 21, inner: int = 5, wall_height: int = 2, height: int = 8
) -> VoxelWorld:
    """Flat stone plane with a square wall ring around the centre column.

    The ring's interior is ``inner x inner`` supports centred at
    ``(size // 2, 0, size // 2)``.
    """
    names = np.full((size, height, size), AIR, dtype=object)
    names[:, 0, :] = "stone"
    c = size // 2
    lo, hi = c - inner // 2 - 1, c + inner // 2 + 1
    for y in range(1, 1 + wall_height):
        names[lo : hi + 1, y, lo] = "stone"
        names[lo : hi + 1, y, hi] = "stone"
        names[lo, y, lo : hi + 1] = "stone"
        names[hi, y, lo : hi + 1] = "stone"
    return _world(names, name="enclosure")


RANDOM_BLOCKS = ("stone", "dirt", "glass", "oak_log", "oak_door", "water", "oak_leaves")


def random_world(rng: np.random.Generator, size: int = 8, height: int = 8, density: float = 0.25) -> VoxelWorld:
    """Small random world: a bumpy floor plus scattered blocks of mixed classes."""
    names = np.full((size, height, size), AIR, dtype=object)
    ground = rng.integers(0, 3, size=(size, size))
    for x in range(size):
        for z in range(size):
            names[x, : ground[x, z] + 1, z] = "stone"
    scatter = rng.random((size, height, size)) < density
    scatter[:, 0, :] = False
    picks = rng.integers(0, len(RANDOM_BLOCKS), size=int(scatter.sum()))
    names[scatter] = np.asarray(RANDOM_BLOCKS, dtype=object)[picks]
    return _world(names, name="random")


def _smooth_noise(rng: np.random.Generator, size_x: int, size_z: int, octaves: int = 4) -> np.ndarray:
    xs = np.arange(size_x)[:, None]
    zs = np.arange(size_z)[None, :]
    out = np.zeros((size_x, size_z))
    for k in range(octaves):
        freq = (2**k) / max(size_x, size_z)
        for _ in range(3):
            angle = rng.uniform(0, 2 * np.pi)
            phase = rng.uniform(0, 2 * np.pi)
            out += np.sin(2 * np.pi * freq * (np.cos(angle) * xs + np.sin(angle) * zs) + phase) / (k + 1)
    return out / np.abs(out).max()


def _house(names: np.ndarray, x0: int, z0: int, y0: int, w: int, d: int, h: int, rng) -> None:
    sx, sy, sz = names.shape
    x1, z1, y1 = min(x0 + w, sx) - 1, min(z0 + d, sz) - 1, min(y0 + h, sy - 1)
    if x1 - x0 < 3 or z1 - z0 < 3 or y1 - y0 < 3:
        return
    names[x0 : x1 + 1, y0 : y1 + 1, z0 : z1 + 1] = AIR
    names[x0 : x1 + 1, y0, z0 : z1 + 1] = "oak_planks"
    for x in (x0, x1):
        names[x, y0 + 1 : y1, z0 : z1 + 1] = "stone_bricks"
    for z in (z0, z1):
        names[x0 : x1 + 1, y0 + 1 : y1, z] = "stone_bricks"
    names[x0 : x1 + 1, y1, z0 : z1 + 1] = "oak_planks"
    # door on the z0 face, windows on the x faces
    dx = (x0 + x1) // 2
    names[dx, y0 + 1, z0] = "oak_door"
    names[dx, y0 + 2, z0] = "oak_door"
    if y1 - y0 >= 4:
        names[x0, y0 + 2, (z0 + z1) // 2] = "glass"
        names[x1, y0 + 2, (z0 + z1) // 2] = "glass"
    if rng.random() < 0.5:
        names[x0 + 1, y0 + 1, z0 + 1] = "crafting_table"


def _tree(names: np.ndarray, x: int, z: int, y0: int, rng) -> None:
    sx, sy, sz = names.shape
    trunk = int(rng.integers(3, 6))
    top = min(y0 + trunk, sy - 2)
    for y in range(y0, top):
        names[x, y, z] = "oak_log"
    for dx in (-1, 0, 1):
        for dz in (-1, 0, 1):
            for dy in (0, 1):
                xx, zz, yy = x + dx, z + dz, top + dy
                if 0 <= xx < sx and 0 <= zz < sz and yy < sy and names[xx, yy, zz] == AIR:
                    names[xx, yy, zz] = "oak_leaves"


def terrain_world(
    seed: int,
    size_x: int = 24,
    size_z: int = 24,
    height: int = 24,
    base: int = 6,
    relief: int = 4,
    sea_level: int | None = None,
    houses: int = 2,
    trees: int = 3,
    caves: int = 0,
    origin=(0, 0, 0),
) -> VoxelWorld:
    """Procedural terrain with optional water, houses, trees and caves."""
    rng = np.random.default_rng(seed)
    names = np.full((size_x, height, size_z), AIR, dtype=object)
    h = np.clip(np.round(base + relief * _smooth_noise(rng, size_x, size_z)).astype(int), 1, height - 8)
    for x in range(size_x):
        for z in range(size_z):
            names[x, : h[x, z] - 1, z] = "stone"
            names[x, h[x, z] - 1, z] = "dirt"
            names[x, h[x, z], z] = "grass_block" if sea_level is None or h[x, z] >= sea_level else "sand"
            if sea_level is not None and h[x, z] < sea_level:
                names[x, h[x, z] + 1 : sea_level + 1, z] = "water"

    for _ in range(caves):
        cx, cz = int(rng.integers(2, size_x - 6)), int(rng.integers(2, size_z - 6))
        floor = int(rng.integers(1, max(2, h.min() - 4)))
        names[cx : cx + 5, floor + 1 : floor + 4, cz : cz + 5] = AIR

    for _ in range(houses):
        w, d = int(rng.integers(5, 9)), int(rng.integers(5, 9))
        x0, z0 = int(rng.integers(0, size_x - w)), int(rng.integers(0, size_z - d))
        ground = int(h[x0 : x0 + w, z0 : z0 + d].max())
        if sea_level is not None and ground < sea_level:
            continue
        names[x0 : x0 + w, : ground + 1, z0 : z0 + d] = np.where(
            names[x0 : x0 + w, : ground + 1, z0 : z0 + d] == AIR,
            "stone",
            names[x0 : x0 + w, : ground + 1, z0 : z0 + d],
        )
        _house(names, x0, z0, ground, w, d, int(rng.integers(4, 7)), rng)

    for _ in range(trees):
        x, z = int(rng.integers(1, size_x - 1)), int(rng.integers(1, size_z - 1))
        y0 = int(h[x, z]) + 1
        if names[x, y0, z] == AIR and names[x, y0 - 1, z] == "grass_block":
            _tree(names, x, z, y0, rng)
    return _world(names, origin, name=f"terrain_{seed}")


def demo_world(seed: int = 2021) -> VoxelWorld:
    """The 64x32x64 demo map: coast, lake, village houses, trees and caves.

    Its origin sits at ``y = 48`` so the surface lies around ``y = 60``.
    """
    world = terrain_world(
        seed,
        size_x=64,
        size_z=64,
        height=32,
        base=12,
        relief=6,
        sea_level=13,
        houses=9,
        trees=14,
        caves=3,
        origin=(0, 48, 0),
    )
    object.__setattr__(world, "name", "demo")
    return world


def bundled_demo_world() -> VoxelWorld:
    """The demo world as shipped in ``voxelvist/data/demo_world.json``."""
    text = resources.files("voxelvist").joinpath("data/demo_world.json").read_text()
    return _read_voxel_json(text)
