"""Voxel worlds, block classification and headspace enumeration.

A :class:`VoxelWorld` is a dense, read-only grid of palette ids. Positions
are world coordinates: cell ``(0, 0, 0)`` of the array sits at ``origin``.
Everything outside the loaded bounds reads as ``"air"``.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from functools import lru_cache
from importlib import resources
from pathlib import Path
from typing import Iterable, NamedTuple, Sequence

import numpy as np

AIR = "air"

__all__ = [
    "AIR",
    "BlockPos",
    "VoxelWorld",
    "BlockClasses",
    "WorldFormatError",
    "WorldStructureError",
    "ClassifiedWorld",
    "classify",
    "load_world",
    "save_world",
    "block_at",
    "enumerate_headspaces",
    "load_block_classes",
    "default_block_classes",
]


class BlockPos(NamedTuple):
    x: int
    y: int
    z: int

    def __add__(self, other):  # type: ignore[override]
        return BlockPos(self.x + other[0], self.y + other[1], self.z + other[2])

    def __sub__(self, other):
        return BlockPos(self.x - other[0], self.y - other[1], self.z - other[2])


class WorldFormatError(ValueError):
    """A world file could not be parsed."""

    def __init__(self, message: str, line: int | None = None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


class WorldStructureError(ValueError):
    """A world file parsed but its shape is inconsistent."""


@dataclass(frozen=True, eq=False)
class VoxelWorld:
    """Immutable dense block grid.

    ``cells`` is indexed ``cells[x, y, z]`` in local coordinates and holds
    palette ids. Identity equality/hash so worlds can key caches cheaply.
    """

    palette: tuple[str, ...]
    cells: np.ndarray
    origin: BlockPos = BlockPos(0, 0, 0)
    name: str = ""

    def __post_init__(self):
        cells = np.array(self.cells, dtype=np.uint16, copy=True)
        if cells.ndim != 3 or min(cells.shape) <= 0:
            raise WorldStructureError(f"cells must be a non-empty 3D array, got shape {cells.shape}")
        if len(set(self.palette)) != len(self.palette):
            raise WorldStructureError("palette names must be unique")
        if not self.palette or self.palette[0] != AIR:
            raise WorldStructureError("palette id 0 must be 'air'")
        if cells.size and int(cells.max()) >= len(self.palette):
            raise WorldStructureError("cell id outside the palette")
        cells.flags.writeable = False
        object.__setattr__(self, "cells", cells)
        object.__setattr__(self, "palette", tuple(self.palette))
        object.__setattr__(self, "origin", BlockPos(*self.origin))

    @property
    def dims(self) -> tuple[int, int, int]:
        return tuple(int(s) for s in self.cells.shape)  # type: ignore[return-value]

    @classmethod
    def from_names(cls, names: np.ndarray, origin=(0, 0, 0), name: str = "") -> "VoxelWorld":
        """Build a world from an ``(x, y, z)`` array of block names."""
        names = np.asarray(names)
        found = [n for n in dict.fromkeys(names.ravel().tolist()) if n != AIR]
        palette = (AIR, *found)
        lookup = {n: i for i, n in enumerate(palette)}
        ids = np.vectorize(lookup.__getitem__, otypes=[np.uint16])(names)
        return cls(palette, ids, BlockPos(*origin), name)

    def contains(self, p: Sequence[int]) -> bool:
        lx, ly, lz = p[0] - self.origin.x, p[1] - self.origin.y, p[2] - self.origin.z
        sx, sy, sz = self.cells.shape
        return 0 <= lx < sx and 0 <= ly < sy and 0 <= lz < sz

    def names(self) -> np.ndarray:
        """Return an ``(x, y, z)`` object array of block names."""
        return np.asarray(self.palette, dtype=object)[self.cells]

    def bounds(self) -> tuple[BlockPos, BlockPos]:
        """Inclusive (min, max) world coordinates."""
        hi = BlockPos(*(o + s - 1 for o, s in zip(self.origin, self.cells.shape)))
        return self.origin, hi


def block_at(world: VoxelWorld, p: Sequence[int]) -> str:
    """Name of the block at world position ``p``; ``"air"`` outside the world."""
    if not world.contains(p):
        return AIR
    o = world.origin
    return world.palette[world.cells[p[0] - o.x, p[1] - o.y, p[2] - o.z]]


# --------------------------------------------------------------------------
# block classes


@dataclass(frozen=True)
class BlockClasses:
    """Name-based classification sets shared by every world."""

    empty: frozenset[str]
    standable: frozenset[str]
    transparent: frozenset[str]
    doors: frozenset[str] = field(default_factory=frozenset)

    def __post_init__(self):
        for attr in ("empty", "standable", "transparent", "doors"):
            object.__setattr__(self, attr, frozenset(getattr(self, attr)))
        if AIR not in self.empty or AIR not in self.transparent:
            raise ValueError("'air' must be both empty and transparent")
        if not self.doors <= self.transparent:
            raise ValueError(f"doors must be transparent: {sorted(self.doors - self.transparent)}")
        both = self.empty & self.standable
        if both:
            raise ValueError(f"blocks cannot be both empty and standable: {sorted(both)}")


def _parse_classes(text: str, source: str) -> BlockClasses:
    sections: dict[str, set[str]] = {}
    current = None
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if line.startswith("[") and line.endswith("]"):
            current = line[1:-1].strip()
            if current not in ("empty", "standable", "transparent", "doors"):
                raise WorldFormatError(f"{source}: unknown section [{current}]", lineno)
            sections.setdefault(current, set())
            continue
        if current is None:
            raise WorldFormatError(f"{source}: block name outside a section", lineno)
        sections[current].add(line)
    return BlockClasses(
        empty=frozenset(sections.get("empty", ())),
        standable=frozenset(sections.get("standable", ())),
        transparent=frozenset(sections.get("transparent", ())),
        doors=frozenset(sections.get("doors", ())),
    )


def load_block_classes(path: str | Path) -> BlockClasses:
    """Read a sectioned block-classes file (``[empty]``, ``[standable]``, ...)."""
    path = Path(path)
    return _parse_classes(path.read_text(), str(path))


def default_block_classes() -> BlockClasses:
    text = resources.files("voxelvist").joinpath("data/default_classes.txt").read_text()
    return _parse_classes(text, "default_classes.txt")


def format_block_classes(classes: BlockClasses) -> str:
    out = []
    for section in ("empty", "standable", "transparent", "doors"):
        out.append(f"[{section}]")
        out.extend(sorted(getattr(classes, section)))
        out.append("")
    return "\n".join(out)


# --------------------------------------------------------------------------
# classification masks


@dataclass(frozen=True, eq=False)
class ClassifiedWorld:
    """Boolean per-cell masks of a world under one set of block classes.

    Masks are indexed like ``world.cells``. ``headspace`` covers in-bounds
    cells only; the column below may reach outside the world, where cells
    count as air.
    """

    world: VoxelWorld
    classes: BlockClasses
    empty: np.ndarray
    standable: np.ndarray
    transparent: np.ndarray
    headspace: np.ndarray

    def to_local(self, p: Sequence[int]) -> tuple[int, int, int]:
        o = self.world.origin
        return p[0] - o.x, p[1] - o.y, p[2] - o.z

    def is_headspace(self, p: Sequence[int]) -> bool:
        if not self.world.contains(p):
            return False
        return bool(self.headspace[self.to_local(p)])

    def is_standable(self, p: Sequence[int]) -> bool:
        if not self.world.contains(p):
            return False
        return bool(self.standable[self.to_local(p)])

    def is_empty(self, p: Sequence[int]) -> bool:
        if not self.world.contains(p):
            return True
        return bool(self.empty[self.to_local(p)])

    def is_transparent(self, p: Sequence[int]) -> bool:
        if not self.world.contains(p):
            return True
        return bool(self.transparent[self.to_local(p)])


def _lut(palette: Iterable[str], names: frozenset[str]) -> np.ndarray:
    return np.array([n in names for n in palette], dtype=bool)


@lru_cache(maxsize=16)
def classify(world: VoxelWorld, classes: BlockClasses) -> ClassifiedWorld:
    """Precompute class masks and the headspace mask (cached per pair)."""
    empty = _lut(world.palette, classes.empty)[world.cells]
    standable = _lut(world.palette, classes.standable)[world.cells]
    transparent = _lut(world.palette, classes.transparent)[world.cells]

    # shift down the y axis; below the world is air: empty, never standable
    below_empty = np.ones_like(empty)
    below_empty[:, 1:, :] = empty[:, :-1, :]
    below2_standable = np.zeros_like(standable)
    below2_standable[:, 2:, :] = standable[:, :-2, :]
    headspace = empty & below_empty & below2_standable

    for arr in (empty, standable, transparent, headspace):
        arr.flags.writeable = False
    return ClassifiedWorld(world, classes, empty, standable, transparent, headspace)


def enumerate_headspaces(world: VoxelWorld, classes: BlockClasses) -> set[BlockPos]:
    """All positions where a standing avatar's head fits."""
    cw = classify(world, classes)
    local = np.argwhere(cw.headspace) + np.asarray(world.origin)
    return set(map(BlockPos._make, local.tolist()))


# --------------------------------------------------------------------------
# file formats


def _read_layered_text(text: str) -> VoxelWorld:
    lines = text.split("\n")
    if lines and lines[-1] == "":
        lines.pop()
    lines = [ln[:-1] if ln.endswith("\r") else ln for ln in lines]

    dims = None
    origin = (0, 0, 0)
    legend: dict[str, str] = {}
    layers: list[list[tuple[int, str]]] = []
    current: list[tuple[int, str]] = []

    for lineno, line in enumerate(lines, 1):
        if line.startswith("DIMS"):
            parts = line.split()
            if len(parts) != 4:
                raise WorldFormatError("DIMS needs three integers", lineno)
            try:
                dims = tuple(int(v) for v in parts[1:])
            except ValueError:
                raise WorldFormatError(f"bad DIMS values {parts[1:]}", lineno) from None
            if min(dims) <= 0:
                raise WorldFormatError("DIMS must be positive", lineno)
        elif line.startswith("ORIGIN"):
            parts = line.split()
            try:
                origin = tuple(int(v) for v in parts[1:])
            except ValueError:
                raise WorldFormatError(f"bad ORIGIN values {parts[1:]}", lineno) from None
            if len(origin) != 3:
                raise WorldFormatError("ORIGIN needs three integers", lineno)
        elif line.startswith("LEGEND"):
            body = line[len("LEGEND"):]
            if len(body) < 4 or body[0] != " " or body[2] != "=":
                raise WorldFormatError("expected 'LEGEND c=block_name'", lineno)
            char, name = body[1], body[3:].strip()
            if not name:
                raise WorldFormatError("empty block name in legend", lineno)
            if char in legend and legend[char] != name:
                raise WorldFormatError(f"legend character {char!r} defined twice", lineno)
            legend[char] = name
        elif line == "":
            if current:
                layers.append(current)
                current = []
        else:
            if dims is None:
                raise WorldFormatError("grid row before DIMS header", lineno)
            current.append((lineno, line))
    if current:
        layers.append(current)

    if dims is None:
        raise WorldFormatError("missing DIMS header")
    sx, sy, sz = dims
    if len(layers) != sy:
        raise WorldStructureError(f"expected {sy} y-layers, found {len(layers)}")

    palette = [AIR]
    ids_of: dict[str, int] = {}
    for char, name in legend.items():
        if name not in palette:
            palette.append(name)
        ids_of[char] = palette.index(name)

    cells = np.zeros((sx, sy, sz), dtype=np.uint16)
    for y, layer in enumerate(layers):
        if len(layer) != sz:
            raise WorldStructureError(f"layer y={y}: expected {sz} rows, found {len(layer)}")
        for z, (lineno, row) in enumerate(layer):
            if len(row) != sx:
                raise WorldStructureError(
                    f"layer y={y}, row z={z} (line {lineno}): expected {sx} characters, found {len(row)}"
                )
            for x, char in enumerate(row):
                if char not in ids_of:
                    raise WorldFormatError(f"character {char!r} has no LEGEND entry", lineno)
                cells[x, y, z] = ids_of[char]
    return VoxelWorld(tuple(palette), cells, BlockPos(*origin))


_CODE_CHARS = ".#" + "".join(
    c for c in map(chr, range(33, 127)) if c not in ".#"
)


def _write_layered_text(world: VoxelWorld) -> str:
    if len(world.palette) > len(_CODE_CHARS):
        raise ValueError(f"palette too large for layered-text ({len(world.palette)} entries)")
    codes = _CODE_CHARS[: len(world.palette)]
    sx, sy, sz = world.dims
    out = [f"DIMS {sx} {sy} {sz}"]
    if tuple(world.origin) != (0, 0, 0):
        out.append("ORIGIN {} {} {}".format(*world.origin))
    for i, name in enumerate(world.palette):
        out.append(f"LEGEND {codes[i]}={name}")
    lut = np.array(list(codes))
    for y in range(sy):
        out.append("")
        for z in range(sz):
            out.append("".join(lut[world.cells[:, y, z]]))
    return "\n".join(out) + "\n"


def _read_voxel_json(text: str) -> VoxelWorld:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise WorldFormatError(f"invalid JSON at offset {exc.pos}: {exc.msg}", exc.lineno) from None
    if not isinstance(doc, dict):
        raise WorldFormatError("top level must be an object")
    missing = {"dims", "palette", "cells"} - doc.keys()
    if missing:
        raise WorldFormatError(f"missing keys: {sorted(missing)}")
    dims = doc["dims"]
    if len(dims) != 3 or any(int(d) <= 0 for d in dims):
        raise WorldStructureError(f"dims must be three positive integers, got {dims}")
    sx, sy, sz = (int(d) for d in dims)
    flat = np.asarray(doc["cells"], dtype=np.int64)
    if flat.ndim != 1 or flat.size != sx * sy * sz:
        raise WorldStructureError(f"cells length {flat.size} != {sx}*{sy}*{sz}")
    if flat.size and (flat.min() < 0 or flat.max() >= len(doc["palette"])):
        raise WorldStructureError("cell id outside the palette")
    # x fastest, then z, then y
    cells = flat.reshape(sy, sz, sx).transpose(2, 0, 1)
    origin = BlockPos(*doc.get("origin", (0, 0, 0)))
    return VoxelWorld(tuple(doc["palette"]), cells, origin, doc.get("name", ""))


def _write_voxel_json(world: VoxelWorld) -> str:
    doc = {
        "dims": list(world.dims),
        "origin": list(world.origin),
        "palette": list(world.palette),
        "cells": world.cells.transpose(1, 2, 0).ravel().tolist(),
    }
    if world.name:
        doc["name"] = world.name
    return json.dumps(doc, separators=(",", ":")) + "\n"


def _guess_format(path: Path) -> str:
    return "voxel-json" if path.suffix.lower() == ".json" else "layered-text"


def load_world(path: str | Path, format: str | None = None) -> VoxelWorld:
    """Load a world file in ``layered-text`` or ``voxel-json`` format."""
    path = Path(path)
    format = format or _guess_format(path)
    text = path.read_text()
    if format == "layered-text":
        world = _read_layered_text(text)
    elif format == "voxel-json":
        world = _read_voxel_json(text)
    else:
        raise ValueError(f"unknown world format {format!r}")
    if not world.name:
        object.__setattr__(world, "name", path.stem)
    return world


def parse_layered_text(text: str) -> VoxelWorld:
    return _read_layered_text(text)


def save_world(world: VoxelWorld, path: str | Path, format: str | None = None) -> None:
    path = Path(path)
    format = format or _guess_format(path)
    if format == "layered-text":
        path.write_text(_write_layered_text(world))
    elif format == "voxel-json":
        path.write_text(_write_voxel_json(world))
    else:
        raise ValueError(f"unknown world format {format!r}")
