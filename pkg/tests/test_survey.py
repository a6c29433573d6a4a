import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from voxelvist import worlds
from voxelvist.isovist import METRIC_NAMES, IsovistMetrics
from voxelvist.survey import (
    ABSENT,
    CSV_HEADER,
    INTERPOLATED,
    MEASURED,
    MetricsTable,
    SweepConfig,
    aggregate_map,
    build_heatmap,
    read_means_csv,
    sample_centroids,
    sweep,
    write_means_csv,
)
from voxelvist.world import BlockPos, VoxelWorld, enumerate_headspaces


def metrics(**kw):
    base = dict(
        area=1, perimeter=1, real_perimeter=1, diversity=1, mean_radial=1.0, var_radial=0.0,
        vista=1.0, drift=0.0, roundness=1.0, openness=1.0, reachability=1, occlusivity=1.0, clutter=1.0,
    )
    base.update(kw)
    return IsovistMetrics(**base)


def table(*rows, bounds=None):
    return MetricsTable([(BlockPos(*p), m) for p, m in rows], "t", None, bounds)


class TestConfig:
    def test_defaults(self):
        c = SweepConfig()
        assert (c.radius, c.reach_steps, c.subsample, c.y_min) == (256, 10, 10, 60)

    @pytest.mark.parametrize("kw", [dict(radius=0), dict(reach_steps=-1), dict(subsample=0), dict(clutter="x")])
    def test_invalid(self, kw):
        with pytest.raises(ValueError):
            SweepConfig(**kw)

    def test_from_file(self, tmp_path):
        p = tmp_path / "run.ini"
        p.write_text("[sweep]\nradius = 32\nseed = 7\nclutter = reachable\n")
        c = SweepConfig.from_file(p, seed=9)
        assert (c.radius, c.seed, c.clutter, c.subsample) == (32, 9, "reachable", 10)

    def test_from_file_unknown_key(self, tmp_path):
        p = tmp_path / "run.ini"
        p.write_text("[sweep]\nradios = 32\n")
        with pytest.raises(ValueError, match="radios"):
            SweepConfig.from_file(p)


class TestSampling:
    def test_k1_is_everything(self, classes):
        w = worlds.terrain_world(2)
        got = sample_centroids(w, classes, SweepConfig(subsample=1))
        assert set(got) == enumerate_headspaces(w, classes)

    def test_flat_10x10(self, classes):
        w = worlds.flat_plane(10, 10, 5)
        cfg = SweepConfig(subsample=10, seed=42)
        a = sample_centroids(w, classes, cfg)
        assert len(a) == 10 and len(set(a)) == 10
        assert a == sample_centroids(w, classes, cfg)
        assert a != sample_centroids(w, classes, SweepConfig(subsample=10, seed=43))

    def test_large_k_one_per_level(self, classes):
        w = worlds.terrain_world(6)
        levels = {p.y for p in enumerate_headspaces(w, classes)}
        got = sample_centroids(w, classes, SweepConfig(subsample=10**6))
        assert sorted(p.y for p in got) == sorted(levels)

    @settings(max_examples=20, deadline=None)
    @given(st.integers(1, 15), st.integers(0, 2**63))
    def test_ceil_rule(self, k, seed):
        from voxelvist.world import default_block_classes

        classes = default_block_classes()
        w = worlds.terrain_world(8)
        heads = enumerate_headspaces(w, classes)
        got = sample_centroids(w, classes, SweepConfig(subsample=k, seed=seed))
        assert set(got) <= heads
        for y in {p.y for p in heads}:
            n = sum(1 for p in heads if p.y == y)
            assert sum(1 for p in got if p.y == y) == math.ceil(n / k)

    def test_levels_are_independent(self, classes):
        # removing one level's headspaces leaves every other level's picks alone
        w = worlds.terrain_world(9)
        cfg = SweepConfig(subsample=3, seed=5)
        full = sample_centroids(w, classes, cfg)
        top = max(p.y for p in full)
        names = w.names()
        names[:, top - w.origin.y, :] = "stone"
        cut = sample_centroids(VoxelWorld.from_names(names), classes, cfg)
        keep = lambda ps: sorted(p for p in ps if p.y < top - 2)
        assert keep(full) == keep(cut)


class TestSweep:
    def test_sealed_box(self, sealed, classes):
        t = sweep(sealed, classes, SweepConfig(radius=8, subsample=1))
        assert len(t) == 1
        (pos, m), = t.rows
        assert pos == (1, 3, 1)
        assert (m.area, m.clutter, m.occlusivity, m.reachability) == (1, 1.0, 1.0, 1)
        assert m.perimeter == m.real_perimeter

    def test_empty_world(self, classes):
        w = VoxelWorld(("air",), np.zeros((4, 4, 4)))
        t = sweep(w, classes, SweepConfig(radius=4))
        assert len(t) == 0
        assert t.to_csv() == ",".join(CSV_HEADER) + "\n"

    def test_deterministic_and_sorted(self, classes):
        w = worlds.terrain_world(1)
        cfg = SweepConfig(radius=6, subsample=4, seed=3)
        a, b = sweep(w, classes, cfg), sweep(w, classes, cfg)
        assert a.to_csv() == b.to_csv()
        keys = [(p.y, p.x, p.z) for p, _ in a.rows]
        assert keys == sorted(keys) and len(set(keys)) == len(keys)

    def test_parallel_equals_serial(self, classes):
        w = worlds.terrain_world(2)
        cfg = SweepConfig(radius=6, subsample=3, seed=1)
        calls = []
        par = sweep(w, classes, cfg, workers=2, progress=lambda d, t: calls.append((d, t)))
        assert par.to_csv() == sweep(w, classes, cfg).to_csv()
        assert calls[-1][0] == calls[-1][1] == len(par)

    def test_csv_format(self, classes, tmp_path):
        w = worlds.terrain_world(3)
        t = sweep(w, classes, SweepConfig(radius=5, subsample=6))
        text = t.to_csv()
        assert "\r" not in text
        lines = text.splitlines()
        assert lines[0] == ",".join(CSV_HEADER)
        path = tmp_path / "m.csv"
        t.write_csv(path)
        back = MetricsTable.read_csv(path)
        assert back.to_csv() == text
        for p, m in back.rows:
            assert isinstance(m.area, int)

    def test_absent_serialised_empty(self):
        t = table(((0, 60, 0), metrics(openness=None, occlusivity=None, mean_radial=1 / 3)))
        row = t.to_csv().splitlines()[1].split(",")
        rec = dict(zip(CSV_HEADER, row))
        assert rec["openness"] == "" and rec["occlusivity"] == ""
        assert rec["mean_radial"] == "0.333333"

    def test_bad_header(self, tmp_path):
        p = tmp_path / "m.csv"
        p.write_text("x,y,z,area\n")
        with pytest.raises(ValueError, match="header"):
            MetricsTable.read_csv(p)


class TestAggregate:
    def test_single_row(self):
        m = metrics(area=7, drift=2.5)
        s = aggregate_map(table(((0, 0, 0), m)))
        assert s.means == {k: float(v) for k, v in m.as_dict().items()}

    def test_skip_absent(self):
        s = aggregate_map(table(((0, 0, 0), metrics(openness=2.0)), ((1, 0, 0), metrics(openness=None))))
        assert s.means["openness"] == 2.0
        assert s.absent["openness"] == 1
        assert s.absent["area"] == 0

    def test_mean(self):
        s = aggregate_map(table(((0, 0, 0), metrics(area=10)), ((1, 0, 0), metrics(area=20))))
        assert s.means["area"] == 15

    def test_all_absent(self):
        s = aggregate_map(table(((0, 0, 0), metrics(openness=None))))
        assert s.means["openness"] is None

    def test_empty(self):
        with pytest.raises(ValueError):
            aggregate_map(table())

    def test_pools_tables(self):
        a = table(((0, 0, 0), metrics(area=10)))
        b = table(((0, 0, 0), metrics(area=20)), ((1, 0, 0), metrics(area=30)))
        assert aggregate_map([a, b]).means["area"] == 20

    @settings(max_examples=50)
    @given(st.lists(st.floats(0, 1e6, allow_nan=False), min_size=1, max_size=30))
    def test_within_range(self, xs):
        t = table(*(((i, 0, 0), metrics(drift=x)) for i, x in enumerate(xs)))
        mean = aggregate_map(t).means["drift"]
        assert min(xs) <= mean <= max(xs)

    def test_means_csv_roundtrip(self, tmp_path):
        means = {"gen_a": aggregate_map(table(((0, 0, 0), metrics(openness=None)))).means,
                 "gen_b": aggregate_map(table(((0, 0, 0), metrics(area=3)))).means}
        p = tmp_path / "means.csv"
        write_means_csv(means, p)
        back = read_means_csv(p)
        assert back == means
        assert p.read_text().splitlines()[0] == "generator," + ",".join(METRIC_NAMES)


class TestHeatmap:
    def test_two_cell_example(self):
        t = table(((0, 60, 0), metrics(area=1)), ((10, 64, 0), metrics(area=3)), bounds=(0, 10, 0, 0))
        g = build_heatmap(t, "area")
        assert g.value_at(4, 0) == 1.0
        assert g.value_at(6, 0) == 3.0
        assert g.value_at(5, 0) == 1.0  # tie goes to the lexicographically first donor
        assert g.source[0, 0] == MEASURED and g.source[0, 10] == MEASURED
        assert (g.source[0, 1:10] == INTERPOLATED).all()

    def test_tie_breaks_on_x_then_z(self):
        # (1,1) is equidistant from (0,1) and (1,0); (0,1) < (1,0)
        t = table(((1, 60, 0), metrics(area=5)), ((0, 60, 1), metrics(area=9)), bounds=(0, 1, 0, 1))
        g = build_heatmap(t, "area")
        assert g.value_at(1, 1) == 9.0
        assert g.value_at(0, 0) == 9.0

    def test_y_below_min_excluded(self):
        t = table(((0, 59, 0), metrics(area=1)), bounds=(0, 3, 0, 3))
        with pytest.raises(ValueError, match="y >= 60"):
            build_heatmap(t, "area")

    def test_y_filter_keeps_mean_honest(self):
        t = table(
            ((2, 59, 2), metrics(area=100)),
            ((2, 60, 2), metrics(area=4)),
            ((2, 70, 2), metrics(area=6)),
            bounds=(0, 4, 0, 4),
        )
        g = build_heatmap(t, "area")
        assert g.value_at(2, 2) == 5.0
        assert np.all(g.values == 5.0)

    def test_single_location(self):
        t = table(((3, 61, 1), metrics(drift=2.5)), bounds=(0, 5, 0, 5))
        g = build_heatmap(t, "drift")
        assert (g.source == MEASURED).sum() == 1
        assert np.all(g.values == 2.5)

    def test_absent_values_skipped(self):
        t = table(((0, 60, 0), metrics(openness=None)), ((3, 60, 0), metrics(openness=2.0)), bounds=(0, 3, 0, 0))
        g = build_heatmap(t, "openness")
        assert g.source[0, 0] == INTERPOLATED and g.value_at(0, 0) == 2.0

    def test_unknown_metric(self):
        with pytest.raises(KeyError):
            build_heatmap(table(((0, 60, 0), metrics())), "nope")

    @settings(max_examples=40, deadline=None)
    @given(st.lists(st.tuples(st.integers(0, 12), st.integers(0, 12), st.floats(0, 100, allow_nan=False)), min_size=1, max_size=12))
    def test_interpolated_copy_nearest(self, samples):
        t = table(*(((x, 60, z), metrics(drift=v)) for x, z, v in samples), bounds=(0, 12, 0, 12))
        g = build_heatmap(t, "drift")
        measured = {}
        for x, z, v in samples:
            measured.setdefault((x, z), []).append(v)
        means = {k: float(np.mean(v)) for k, v in measured.items()}
        for z in range(13):
            for x in range(13):
                if (x, z) in means:
                    assert g.value_at(x, z) == pytest.approx(means[x, z])
                    continue
                d = {k: (k[0] - x) ** 2 + (k[1] - z) ** 2 for k in means}
                best = min(d.values())
                donor = min(k for k in means if d[k] == best)
                assert g.value_at(x, z) == means[donor]

    def test_exports(self, tmp_path):
        t = table(((0, 60, 0), metrics(area=1)), ((2, 60, 1), metrics(area=3)), bounds=(0, 2, 0, 1))
        g = build_heatmap(t, "area")
        assert g.to_csv() == "z\\x,0,1,2\n0,1,1,3\n1,1,3,3\n"
        pgm, sidecar = g.to_pgm()
        assert pgm.splitlines()[0] == "P2"
        assert pgm.splitlines()[2:] == ["3 2", "65535", "0 0 65535", "0 65535 65535"]
        assert "min=1.0" in sidecar and "max=3.0" in sidecar
        paths = g.write(tmp_path / "area")
        assert [p.name for p in paths] == ["area.csv", "area.pgm", "area.pgm.scale.txt"]

    def test_pgm_midpoint_rounding(self):
        t = table(((0, 60, 0), metrics(area=0)), ((1, 60, 0), metrics(area=1)), ((2, 60, 0), metrics(area=2)), bounds=(0, 2, 0, 0))
        pgm, _ = build_heatmap(t, "area").to_pgm()
        assert pgm.splitlines()[-1] == "0 32768 65535"

    def test_csv_na_for_absent(self):
        from voxelvist.survey import HeatmapGrid

        g = HeatmapGrid("area", 0, 0, np.array([[1.0, np.nan]]), np.array([[MEASURED, ABSENT]]))
        assert g.to_csv().splitlines()[1] == "0,1,NA"
        assert g.to_pgm()[0].splitlines()[-1] == "0 0"
