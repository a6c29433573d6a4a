import itertools

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from voxelvist import worlds
from voxelvist.reachability import LATERAL_4, InvalidStartError, floodfill_reach
from voxelvist.world import BlockPos, VoxelWorld, enumerate_headspaces

CENTER = BlockPos(15, 0, 15)


def diamond(n):
    return 1 + 2 * n * (n + 1)


class TestFlatPlane:
    def test_221(self, plane, classes):
        assert len(floodfill_reach(plane, classes, CENTER, 10)) == 221

    def test_zero_steps(self, plane, classes):
        r = floodfill_reach(plane, classes, CENTER, 0)
        assert r.cells == {CENTER}
        assert r.step_of[CENTER] == 0

    def test_diamond_counts_and_steps(self, plane, classes):
        for n in range(0, 16):
            r = floodfill_reach(plane, classes, CENTER, n)
            assert len(r) == diamond(n)
            for p, k in r.step_of.items():
                assert k == abs(p.x - CENTER.x) + abs(p.z - CENTER.z)

    def test_monotone(self, plane, classes):
        prev = frozenset()
        for n in range(0, 16):
            cur = floodfill_reach(plane, classes, CENTER, n).cells
            assert prev <= cur
            prev = cur

    def test_neighbours_differ_by_one(self, plane, classes):
        r = floodfill_reach(plane, classes, CENTER, 10)
        for p, k in r.step_of.items():
            for dx, dz in LATERAL_4:
                q = BlockPos(p.x + dx, p.y, p.z + dz)
                if q in r.step_of:
                    assert abs(r.step_of[q] - k) == 1

    def test_diagonal(self, plane, classes):
        r = floodfill_reach(plane, classes, CENTER, 3, diagonal=True)
        assert len(r) == 49  # a 7x7 square

    def test_bad_start(self, plane, classes):
        with pytest.raises(InvalidStartError):
            floodfill_reach(plane, classes, (15, 1, 15), 3)

    def test_negative_steps(self, plane, classes):
        with pytest.raises(ValueError):
            floodfill_reach(plane, classes, CENTER, -1)


def test_enclosure(classes):
    w = worlds.walled_enclosure(size=21, inner=5, wall_height=2)
    r = floodfill_reach(w, classes, (10, 0, 10), 10)
    assert r.cells == {BlockPos(x, 0, z) for x in range(8, 13) for z in range(8, 13)}


def terraced():
    """Plane with a 1-step terrace at x >= 6 and a 3-deep pit at x = 2."""
    names = np.full((9, 10, 3), "air", dtype=object)
    names[:, :4, :] = "stone"
    names[6:, 4, :] = "stone"
    names[2, 1:4, :] = "air"
    return VoxelWorld.from_names(names)


class TestMovement:
    def test_climb_one(self, classes):
        r = floodfill_reach(terraced(), classes, (5, 3, 1), 1)
        assert BlockPos(6, 4, 1) in r

    def test_climb_needs_head_clearance(self, classes):
        names = terraced().names()
        names[5, 6, 1] = "stone"  # the cell above the avatar's head at (5, 3, 1)
        r = floodfill_reach(VoxelWorld.from_names(names), classes, (5, 3, 1), 1)
        assert BlockPos(6, 4, 1) not in r
        assert BlockPos(4, 3, 1) in r

    def test_climb_two_blocked(self, classes):
        names = terraced().names()
        names[6:, 5, :] = "stone"
        r = floodfill_reach(VoxelWorld.from_names(names), classes, (5, 3, 1), 3)
        assert all(p.x <= 5 for p in r.cells)

    def test_drop_into_pit_and_back(self, classes):
        w = terraced()
        r = floodfill_reach(w, classes, (3, 3, 1), 1)
        assert BlockPos(2, 0, 1) in r
        # three blocks up is not climbable
        r2 = floodfill_reach(w, classes, (2, 0, 1), 4)
        assert r2.cells == {BlockPos(2, 0, z) for z in range(3)}

    def test_max_drop(self, classes):
        w = terraced()
        assert BlockPos(2, 0, 1) not in floodfill_reach(w, classes, (3, 3, 1), 1, max_drop=2)
        assert BlockPos(2, 0, 1) in floodfill_reach(w, classes, (3, 3, 1), 1, max_drop=3)

    def test_drop_from_terrace(self, classes):
        r = floodfill_reach(terraced(), classes, (6, 4, 1), 1)
        assert BlockPos(5, 3, 1) in r


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2**32 - 1), st.integers(0, 12))
def test_random_world_properties(seed, n):
    from voxelvist.world import default_block_classes

    classes = default_block_classes()
    w = worlds.random_world(np.random.default_rng(seed), size=8, height=8, density=0.2)
    hs = sorted(enumerate_headspaces(w, classes))
    if not hs:
        return
    start = hs[seed % len(hs)] - (0, 2, 0)
    r = floodfill_reach(w, classes, start, n)
    assert r.step_of[start] == 0
    assert all(0 <= k <= n for k in r.step_of.values())
    heads = enumerate_headspaces(w, classes)
    assert all(p + (0, 2, 0) in heads for p in r.cells)
    # every cell past the start has a predecessor one step closer
    for p, k in r.step_of.items():
        if k:
            assert any(
                q in floodfill_reach(w, classes, start, k - 1).cells
                and p in floodfill_reach(w, classes, q, 1).cells
                for q, kq in r.step_of.items()
                if kq == k - 1
            )
    bigger = floodfill_reach(w, classes, start, n + 1).cells
    assert r.cells <= bigger
    for order in itertools.islice(itertools.permutations(LATERAL_4), 0, 24, 5):
        assert floodfill_reach(w, classes, start, n, neighbor_order=order).step_of == r.step_of


class TestColumnLanding:
    def overhang(self):
        # a 3-high cave under the right half: its floor lies below the surface
        names = np.full((6, 12, 3), "air", dtype=object)
        names[:, :6, :] = "stone"
        names[3:, 1:4, :] = "air"
        return VoxelWorld.from_names(names)

    def test_fall_stops_on_surface(self, classes):
        r = floodfill_reach(self.overhang(), classes, (2, 5, 1), 1)
        assert BlockPos(3, 5, 1) in r
        assert BlockPos(3, 0, 1) not in r

    def test_column_rule_adds_cave_floor(self, classes):
        r = floodfill_reach(self.overhang(), classes, (2, 5, 1), 1, landing="column")
        assert {BlockPos(3, 5, 1), BlockPos(3, 0, 1)} <= r.cells

    def test_rules_agree_on_flat(self, plane, classes):
        a = floodfill_reach(plane, classes, CENTER, 6)
        b = floodfill_reach(plane, classes, CENTER, 6, landing="column")
        assert a.step_of == b.step_of

    def test_unknown_rule(self, plane, classes):
        with pytest.raises(ValueError):
            floodfill_reach(plane, classes, CENTER, 1, landing="teleport")
