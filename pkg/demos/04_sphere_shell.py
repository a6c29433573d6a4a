"""How many rays a shell casts, and whether they reach every cell.

Compares the rounded-radius shell with the coverage-thickened one for a few
radii, then builds the full radius-256 shell used by the default sweep.
"""
from __future__ import annotations

import time

from voxelvist.geometry import shell_coverage_gaps, sphere_shell

PUBLISHED_COUNT_256 = 682746


def main() -> None:
    print(f"{'radius':>6} {'rounded':>9} {'gaps':>6} {'thickened':>10} {'gaps':>6}")
    for r in (1, 4, 8, 16, 32):
        plain = sphere_shell(r, thicken_limit=0)
        full = sphere_shell(r)
        print(
            f"{r:>6} {len(plain):>9} {len(shell_coverage_gaps(plain.offsets, r)):>6} "
            f"{len(full):>10} {len(shell_coverage_gaps(full.offsets, r)):>6}"
        )

    t0 = time.perf_counter()
    big = sphere_shell(256)
    dt = time.perf_counter() - t0
    print(f"\nradius 256: {len(big)} offsets in {dt:.2f}s; the published count is {PUBLISHED_COUNT_256}")
    print("the published rasterisation is not described, so the counts are not expected to agree")


if __name__ == "__main__":
    main()
