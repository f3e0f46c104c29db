"""Stopping-time corona decomposition, the dyadic maximal function on supp(w),
the dual measure ``σ = w / (Mw)^2`` and the regions of each node by corona depth.
"""

from __future__ import annotations

from bisect import bisect_left, bisect_right
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Protocol, Sequence

from .dyadic import DyadicInterval, dyadic_containing, rat_str
from .steps import ZERO, Block, StepFunction, StepMeasure

Interval = tuple[Fraction, Fraction]


class UnsupportedGeometryError(ValueError):
    """Two support blocks of different height touch, so no empty margin separates them."""


class InfiniteCoronaError(RuntimeError):
    """The stopping family accumulates at a breakpoint and is infinite."""


class Forest(Protocol):
    def stage_intervals(self) -> list[list[DyadicInterval]]: ...


@dataclass(eq=False)
class CoronaNode:
    interval: DyadicInterval
    density: Fraction
    depth: int
    children: list[CoronaNode] = field(default_factory=list)

    def to_json(self) -> dict:
        return {
            "interval": self.interval.to_json(),
            "density": rat_str(self.density),
            "children": [ch.to_json() for ch in self.children],
        }


@dataclass(eq=False)
class CoronaForest:
    root: CoronaNode

    def nodes(self) -> list[CoronaNode]:
        out, stack = [], [self.root]
        while stack:
            nd = stack.pop()
            out.append(nd)
            stack.extend(reversed(nd.children))
        return out

    def stage_intervals(self) -> list[list[DyadicInterval]]:
        stages: list[list[DyadicInterval]] = []
        for nd in self.nodes():
            while len(stages) <= nd.depth:
                stages.append([])
            stages[nd.depth].append(nd.interval)
        return stages

    def to_json(self) -> dict:
        return self.root.to_json()


def average(w: StepMeasure, Q: DyadicInterval) -> Fraction:
    if not w.blocks:
        return ZERO
    return w.index.mass(Q.lo, Q.hi) * (1 << Q.n)


def _two_adic_order(q: int) -> int:
    # period of the binary expansion of p/q for odd q
    if q == 1:
        return 1
    r, e = 2 % q, 1
    while r != 1:
        r, e = (2 * r) % q, e + 1
    return e


def descent_guard(w: StepMeasure) -> int:
    """Depth past which a dyadic descent can only repeat itself.

    Below it every dyadic interval holds at most one breakpoint and the binary
    digits of each breakpoint have become periodic, so a straddling chain that
    has not stopped within one more period never will.
    """
    pts = sorted({x for lo, hi, _ in w.blocks for x in (lo, hi)} | {Fraction(0), Fraction(1)})
    gap = min((b - a for a, b in zip(pts, pts[1:])), default=Fraction(1))
    depth = (gap.denominator // gap.numerator).bit_length() + 1
    two_adic, period = 0, 1
    for x in pts:
        d = x.denominator
        e = (d & -d).bit_length() - 1
        two_adic = max(two_adic, e)
        period = max(period, _two_adic_order(d >> e))
    return max(depth, two_adic) + 2 * period + 4


def corona(w: StepMeasure, root: DyadicInterval | None = None) -> CoronaForest:
    """Stopping-time decomposition relative to ``w`` below ``root``.

    The children of a node ``L`` are the maximal dyadic ``J ⊊ L`` with
    ``w(J)/|J| >= 4 w(L)/|L|``. A subtree whose largest density is below the
    threshold holds no such ``J`` and is skipped.
    """
    root = root or DyadicInterval.unit()
    density = average(w, root)
    if density <= 0:
        raise ValueError(f"w({root}) must be positive")
    guard = descent_guard(w)
    top = CoronaNode(root, density, 0)
    todo = [top]
    while todo:
        node = todo.pop()
        t = 4 * node.density
        stack = [node.interval.right, node.interval.left]
        while stack:
            J = stack.pop()
            a = average(w, J)
            if a >= t:
                child = CoronaNode(J, a, node.depth + 1)
                node.children.append(child)
                todo.append(child)
            elif w.max_height(J.lo, J.hi) >= t:
                if J.n > guard:
                    raise InfiniteCoronaError(
                        f"stopping intervals below {node.interval} accumulate near {J}"
                    )
                stack.append(J.right)
                stack.append(J.left)
    return CoronaForest(top)


def verify_corona(w: StepMeasure, forest: CoronaForest) -> list[str]:
    """Re-check the two stopping conditions; returns the violations found.

    For each node ``L``: every child has density at least ``4 w(L)/|L|`` and
    every dyadic ``I ⊆ L`` not inside a child has density below it. Subtrees
    whose maximal height is below the threshold are certified wholesale.
    """
    problems: list[str] = []
    guard = descent_guard(w)
    for node in forest.nodes():
        t = 4 * node.density
        if average(w, node.interval) != node.density:
            problems.append(f"{node.interval}: stored density is stale")
        kids = {ch.interval for ch in node.children}
        for ch in node.children:
            if not node.interval.contains(ch.interval) or ch.interval == node.interval:
                problems.append(f"{ch.interval} is not a proper subinterval of {node.interval}")
            if ch.density < t:
                problems.append(f"{ch.interval}: density {ch.density} < 4 x {node.density}")
        stack = [node.interval]
        while stack:
            J = stack.pop()
            if J in kids:
                continue
            if J != node.interval and average(w, J) >= t:
                problems.append(f"{J} in the family of {node.interval} reaches the threshold {t}")
                continue
            if w.max_height(J.lo, J.hi) < t:
                continue
            if J.n > guard:
                problems.append(f"descent below {node.interval} does not terminate")
                break
            stack.extend((J.right, J.left))
    return problems


class StageIndex:
    """Per-stage sorted stopping intervals of a forest, for containment lookups."""

    def __init__(self, forest: Forest) -> None:
        self.stages = [sorted(s, key=DyadicInterval.sort_key) for s in forest.stage_intervals()]
        self._los = [[iv.lo for iv in s] for s in self.stages]

    def inside(self, E: DyadicInterval, stage: int) -> list[DyadicInterval]:
        """Stopping intervals of ``stage`` contained in ``E``."""
        if not 0 <= stage < len(self.stages):
            return []
        los = self._los[stage]
        i, j = bisect_left(los, E.lo), bisect_left(los, E.hi)
        return [iv for iv in self.stages[stage][i:j] if E.contains(iv)]

    def inside_span(self, a: Fraction, b: Fraction, stage: int) -> list[DyadicInterval]:
        """Stopping intervals of ``stage`` contained in ``[a, b)``."""
        if not 0 <= stage < len(self.stages):
            return []
        los = self._los[stage]
        i, j = bisect_left(los, a), bisect_left(los, b)
        return [iv for iv in self.stages[stage][i:j] if iv.hi <= b]

    def gamma(self, E: DyadicInterval) -> tuple[int, DyadicInterval]:
        """Stage and interval of the smallest stopping interval containing ``E``."""
        for s in range(len(self.stages) - 1, -1, -1):
            los = self._los[s]
            i = bisect_right(los, E.lo) - 1
            if i >= 0 and self.stages[s][i].contains(E):
                return s, self.stages[s][i]
        raise ValueError(f"{E} lies in no stopping interval")


@dataclass(frozen=True)
class DeltaRegion:
    base: DyadicInterval
    level: int
    region: tuple[Interval, ...]

    def to_json(self) -> dict:
        return {
            "base": self.base.to_json(),
            "level": self.level,
            "region": [[rat_str(a), rat_str(b)] for a, b in self.region],
        }


def _difference(outer: Sequence[Interval], holes: Sequence[Interval]) -> list[Interval]:
    out: list[Interval] = []
    h = 0
    for lo, hi in outer:
        cur = lo
        while h < len(holes) and holes[h][1] <= cur:
            h += 1
        g = h
        while g < len(holes) and holes[g][0] < hi:
            if holes[g][0] > cur:
                out.append((cur, holes[g][0]))
            cur = max(cur, holes[g][1])
            g += 1
        if cur < hi:
            out.append((cur, hi))
    return out


def delta_region(E: DyadicInterval, forest: Forest | StageIndex, l: int) -> DeltaRegion:
    """``Δ_l E``: the part of ``E`` at corona depth ``l`` below the stage of ``E``."""
    if l < 1:
        raise ValueError("level must be a positive integer")
    idx = forest if isinstance(forest, StageIndex) else StageIndex(forest)
    j, _ = idx.gamma(E)
    below = [(iv.lo, iv.hi) for iv in idx.inside(E, j + l)]
    if l == 1:
        outer = [(E.lo, E.hi)]
    else:
        outer = [(iv.lo, iv.hi) for iv in idx.inside(E, j + l - 1)]
    return DeltaRegion(E, l, tuple(_difference(outer, below)))


def delta_regions(E: DyadicInterval, forest: Forest | StageIndex) -> list[DeltaRegion]:
    """All nonempty ``Δ_l E``, l = 1, 2, ..."""
    idx = forest if isinstance(forest, StageIndex) else StageIndex(forest)
    j, _ = idx.gamma(E)
    out = []
    for l in range(1, len(idx.stages) - j + 1):
        reg = delta_region(E, idx, l)
        if reg.region:
            out.append(reg)
    return out


def maximal_on_support(w: StepMeasure) -> StepFunction:
    """Exact dyadic maximal function ``Mw`` on the support of ``w``.

    For a block of height ``h`` with empty margins ``g-, g+`` on either side,
    any dyadic interval shorter than both margins sees only this block, so
    only dyadic intervals of length at least ``min(g-, g+)`` can beat ``h``.
    A side with no neighbouring block imposes no constraint.
    """
    blocks = w.blocks
    best_chain: dict[tuple[int, int], Fraction] = {}

    def chain_max(Q: DyadicInterval) -> Fraction:
        # max average over Q and all its ancestors inside [0,1)
        key = (Q.m, Q.n)
        if key in best_chain:
            return best_chain[key]
        path = [Q]
        while path[-1].n > 0 and (path[-1].m >> 1, path[-1].n - 1) not in best_chain:
            path.append(path[-1].parent)
        top = path[-1]
        acc = best_chain.get((top.m >> 1, top.n - 1), ZERO) if top.n > 0 else ZERO
        for P in reversed(path):
            acc = max(acc, average(w, P))
            best_chain[(P.m, P.n)] = acc
        return acc

    pieces: list[Block] = []
    for i, (lo, hi, h) in enumerate(blocks):
        gaps = []
        if i > 0:
            gaps.append(lo - blocks[i - 1][1])
        if i + 1 < len(blocks):
            gaps.append(blocks[i + 1][0] - hi)
        if any(g == 0 for g in gaps):
            raise UnsupportedGeometryError(f"block [{lo}, {hi}) touches a block of another height")
        if not gaps:
            pieces.append((lo, hi, h))
            continue
        g = min(gaps)
        inv = 1 / g
        p = (inv.numerator // inv.denominator).bit_length() - 1  # 2^-p >= g > 2^-(p+1)
        step = Fraction(1, 1 << p)
        first = -((-lo.numerator << p) // lo.denominator)  # ceil(lo 2^p)
        cuts = [lo]
        x = Fraction(first, 1 << p)
        if x == lo:
            x += step
        while x < hi:
            cuts.append(x)
            x += step
        cuts.append(hi)
        for a, b in zip(cuts, cuts[1:]):
            Q = dyadic_containing(a, p)
            pieces.append((a, b, max(h, chain_max(Q))))
    return StepFunction._trusted(pieces)


def sigma(w: StepMeasure, Mw: StepFunction | None = None) -> StepMeasure:
    """``w / (Mw)^2`` on supp(w), zero elsewhere."""
    if Mw is None:
        Mw = maximal_on_support(w)
    out: list[Block] = []
    B = w.blocks
    i = 0
    for lo, hi, m in Mw.pieces:
        while B[i][1] <= lo:
            i += 1
        out.append((lo, hi, B[i][2] / (m * m)))
    return StepMeasure._trusted(out)


def sigma_lower_bound(w: StepMeasure, forest: Forest | StageIndex, E: DyadicInterval) -> Fraction:
    """``Σ_l 8^(-2l) (|L|/w(L))^2 w(Δ_l E)`` with ``L`` the stopping interval of ``E``."""
    idx = forest if isinstance(forest, StageIndex) else StageIndex(forest)
    _, L = idx.gamma(E)
    dens = average(w, L)
    if dens == 0:
        return ZERO
    total = ZERO
    for reg in delta_regions(E, idx):
        wm = sum((w.mass(a, b) for a, b in reg.region), ZERO)
        total += wm / (64**reg.level * dens * dens)
    return total
