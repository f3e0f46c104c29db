"""Integer fast path for the stage measures of a construction.

All endpoints of every ``μ_j`` and every breakpoint of every block multiplier
are multiples of ``1/D`` with ``D = 3 · 2^N`` for ``N`` one past the deepest
chain midpoint, and all heights are integers ``6^s``. On that grid a cumulative
mass is an integer, so per-node quantities reduce to integer arithmetic.

Everything here is exact; the rational routines elsewhere in the package are
the reference and the tests compare the two on small forests.
"""

from __future__ import annotations

import threading
from bisect import bisect_right
from fractions import Fraction

from .construction import Construction
from .dyadic import DyadicInterval


class StageGrid:
    """Common integer grid for all stage measures of ``c``."""

    def __init__(self, c: Construction) -> None:
        self.k = c.k
        self.nodes = c.nodes
        deepest = max(nd.interval.n for nd in c.nodes)
        self.N = deepest + 4 * c.k + 1
        self.D = 3 << self.N
        self._cache: dict[int, GridMeasure] = {}
        self._lock = threading.Lock()

    def point(self, m: int, n: int) -> int:
        """``m 2^-n`` on the grid."""
        return (3 * m) << (self.N - n)

    def jump(self, L: DyadicInterval) -> int:
        return (3 * L.m + 1) << (self.N - L.n)

    def measure(self, j: int) -> GridMeasure:
        """``μ_j``: frozen blocks for stages below ``j``, live blocks at stage ``j``.

        The two stages nearest the last request are cached.
        """
        with self._lock:
            if j not in self._cache:
                if len(self._cache) >= 2:
                    del self._cache[max(self._cache, key=lambda s: abs(s - j))]
                self._cache[j] = self._build(j)
            return self._cache[j]

    def _build(self, j: int) -> GridMeasure:
        k4 = 4 * self.k
        blocks = []
        for nd in self.nodes:
            s = nd.stage
            if s > j:
                continue
            L = nd.interval
            if s < j:
                # terminal I(L) = (16^k m + (16^k - 1)/3, n + 4k)
                tm = (L.m << k4) + ((1 << k4) - 1) // 3
                hi = self.point(tm + 1, L.n + k4)
            else:
                hi = self.point(L.m + 1, L.n)
            blocks.append((self.jump(L), hi, 6**s))
        return GridMeasure(self, blocks)

    def to_fraction(self, x: int) -> Fraction:
        return Fraction(x, self.D)


class GridMeasure:
    """Integer prefix sums of one stage measure; ``cdf(X)`` is ``D μ([0, X/D))``."""

    __slots__ = ("grid", "los", "his", "hts", "cum")

    def __init__(self, grid: StageGrid, blocks: list[tuple[int, int, int]]) -> None:
        self.grid = grid
        self.los = [b[0] for b in blocks]
        self.his = [b[1] for b in blocks]
        self.hts = [b[2] for b in blocks]
        cum, acc = [0], 0
        for lo, hi, h in blocks:
            acc += h * (hi - lo)
            cum.append(acc)
        self.cum = cum

    @property
    def total(self) -> int:
        return self.cum[-1]

    def cdf(self, X: int) -> int:
        i = bisect_right(self.los, X)
        if i == 0:
            return 0
        lo, hi = self.los[i - 1], self.his[i - 1]
        if X >= hi:
            return self.cum[i]
        return self.cum[i - 1] + self.hts[i - 1] * (X - lo)

    def mass(self, A: int, B: int) -> int:
        return self.cdf(B) - self.cdf(A)

    def blocks_outside(self, holes: list[tuple[int, int]]) -> list[tuple[int, int, int]]:
        """Blocks clipped to the complement of sorted disjoint ``holes``."""
        out = []
        h = 0
        for lo, hi, ht in zip(self.los, self.his, self.hts):
            cur = lo
            while h < len(holes) and holes[h][1] <= cur:
                h += 1
            g = h
            while g < len(holes) and holes[g][0] < hi:
                if holes[g][0] > cur:
                    out.append((cur, holes[g][0], ht))
                cur = max(cur, holes[g][1])
                g += 1
            if cur < hi:
                out.append((cur, hi, ht))
        return out


def chain_breakpoints(grid: StageGrid, L: DyadicInterval) -> list[int]:
    """Grid positions ``lo_i, mid_i`` of each chain member followed by ``L.hi``.

    The block multiplier of ``L`` is constant between consecutive points of
    this sorted list, and every chain member ends at ``L.hi`` or a midpoint of
    an earlier one.
    """
    pts = []
    m, n = L.m, L.n
    for _ in range(2 * grid.k + 1):
        pts.append(grid.point(m, n))
        pts.append(grid.point(2 * m + 1, n + 1))
        m, n = 4 * m + 1, n + 2
    pts.append(grid.point(L.m + 1, L.n))
    return pts


def profile(mu: GridMeasure, L: DyadicInterval) -> tuple[int, ...]:
    """Masses of the consecutive pieces of ``[L.lo, L.hi)`` cut at the chain breakpoints.

    Two measures with equal profiles on ``L`` give ``L`` the same mass, the
    same terminal mass, the same Haar ratios on the chain and the same
    level-set mass, since each of these is a sum of profile entries.
    """
    pts = sorted(chain_breakpoints(mu.grid, L))
    vals = [mu.cdf(x) for x in pts]
    return tuple(b - a for a, b in zip(vals, vals[1:]))


def level_set_mass(mu: GridMeasure, L: DyadicInterval, k: int) -> tuple[int, bool]:
    """``D μ({|S_L μ| > k μ(L)/|L|})`` and whether the level set is exactly ``I(L)-``.

    With ``c_i`` the Haar ratio of chain member ``I_i`` and ``|L|`` scaled
    out, ``|L| c_i = 4^i (μ(I_i+) - μ(I_i-))`` and the threshold becomes
    ``k μ(L)``; the block values are the partial sums of these integers.
    """
    grid = mu.grid
    lo, mid = [], []
    m, n = L.m, L.n
    for _ in range(2 * k + 1):
        lo.append(grid.point(m, n))
        mid.append(grid.point(2 * m + 1, n + 1))
        m, n = 4 * m + 1, n + 2
    hi = [grid.point(L.m + 1, L.n)]
    for i in range(2 * k):
        hi.append(mid[i])
    F = {x: mu.cdf(x) for x in (*lo, *mid, hi[0])}
    coeff = [(F[hi[i]] - 2 * F[mid[i]] + F[lo[i]]) << (2 * i) for i in range(2 * k + 1)]
    t = k * (F[hi[0]] - F[lo[0]])
    total = 0
    pieces = []
    running = 0
    for i, c in enumerate(coeff):
        # right half of I_i: c_i minus the earlier terms
        if abs(c - running) > t:
            pieces.append((mid[i], hi[i]))
        running += c
        end = lo[i + 1] if i < 2 * k else mid[i]
        if abs(running) > t:
            pieces.append((lo[i], end))
    for a, b in pieces:
        total += F[b] - F[a]
    last = 2 * k
    exact = pieces == [(lo[last], mid[last])]
    return total, exact
