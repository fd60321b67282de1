"""Scan-and-bisect root finding on an interval.

Right-hand sides are opaque callables, so all root location is numerical:
a dense scan picks up sign changes and exact zeros at grid points, then
bisection refines each bracket.
"""

from __future__ import annotations

from typing import Callable

import numpy as np

#: residual target for refined roots
ROOT_RESIDUAL = 1e-12
#: two roots closer than this are treated as one
ROOT_SPACING = 1e-8


def _bisect(fn: Callable[[float], float], lo: float, hi: float) -> float:
    flo, fhi = fn(lo), fn(hi)
    if flo == 0.0:
        return lo
    if fhi == 0.0:
        return hi
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if mid == lo or mid == hi:
            break
        fmid = fn(mid)
        if abs(fmid) <= 0.01 * ROOT_RESIDUAL:
            return mid
        if (flo < 0.0) == (fmid < 0.0):
            lo, flo = mid, fmid
        else:
            hi, fhi = mid, fmid
    # bracket collapsed to float resolution
    return lo if abs(flo) <= abs(fhi) else hi


def scan_zeros(fn: Callable, lo: float, hi: float, n_scan: int = 10_000) -> list[float]:
    """All zeros of ``fn`` on [lo, hi] found by an ``n_scan``-point scan.

    Sign changes are refined by bisection; roots closer than
    ``ROOT_SPACING`` are deduplicated. Returned sorted ascending.
    """
    grid = np.linspace(lo, hi, n_scan)
    vals = np.asarray(fn(grid), dtype=float)
    roots: list[float] = [float(y) for y in grid[vals == 0.0]]

    sign = np.sign(vals)
    flip = np.nonzero(sign[:-1] * sign[1:] < 0)[0]
    scalar = lambda y: float(fn(float(y)))  # noqa: E731
    for i in flip:
        roots.append(_bisect(scalar, float(grid[i]), float(grid[i + 1])))

    roots.sort()
    dedup: list[float] = []
    for r in roots:
        if not dedup or r - dedup[-1] > ROOT_SPACING:
            dedup.append(r)
    return dedup
