"""Walk through one isovist on the bundled demo map.

Picks a headspace near the middle of the map, casts the shell rays, floods
the reachable ground and prints every metric along with what it counts.
"""
from __future__ import annotations

import argparse

import numpy as np

from voxelvist import worlds
from voxelvist.geometry import sphere_shell
from voxelvist.isovist import compute_isovist, derive_metrics
from voxelvist.reachability import floodfill_reach
from voxelvist.world import default_block_classes, enumerate_headspaces


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--radius", type=int, default=32)
    ap.add_argument("--steps", type=int, default=10)
    args = ap.parse_args()

    world = worlds.bundled_demo_world()
    classes = default_block_classes()
    heads = enumerate_headspaces(world, classes)
    print(f"demo map {world.dims}, origin {tuple(world.origin)}: {len(heads)} headspaces")

    # the headspace closest to the map centre, at surface height
    centre = np.array([32, 61, 32])
    c = min(heads, key=lambda p: (int(((np.array(p) - centre) ** 2).sum()), p))
    print(f"centroid {tuple(c)} stands on {tuple(c - (0, 2, 0))}")

    shell = sphere_shell(args.radius)
    print(f"shell radius {args.radius}: {len(shell)} rays ({shell.added} added to close coverage gaps)")
    sets = compute_isovist(world, classes, c, shell)
    reach = floodfill_reach(world, classes, c - (0, 2, 0), args.steps)
    m = derive_metrics(sets, reach)

    print()
    print(f"visible headspaces (area)      {m.area}")
    print(f"perimeter cells                 {m.perimeter}  (of which opaque: {m.real_perimeter})")
    print(f"distinct perimeter blocks       {m.diversity}: {', '.join(sorted(set(sets.perimeter.values())))}")
    print(f"radials mean / var / vista      {m.mean_radial:.2f} / {m.var_radial:.2f} / {m.vista:.2f}")
    print(f"drift                           {m.drift:.2f}")
    openness = "absent" if m.openness is None else f"{m.openness:.4f}"
    occlusivity = "absent" if m.occlusivity is None else f"{m.occlusivity:.4f}"
    print(f"roundness, openness             {m.roundness:.4f}, {openness}")
    print(f"reachable supports ({args.steps} steps)  {m.reachability}")
    print(f"occlusivity (reachable & seen)  {occlusivity}")
    print(f"clutter                         {m.clutter:.4f}")


if __name__ == "__main__":
    main()
