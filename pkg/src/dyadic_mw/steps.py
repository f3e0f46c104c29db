"""Piecewise-constant measures and functions with exact rational breakpoints.

A :class:`StepMeasure` is a nonnegative density made of disjoint half-open
blocks ``[lo, hi)`` inside [0, 1); a :class:`StepFunction` is a signed step
function that vanishes off its pieces. Mass queries against large measures go
through an integer-scaled prefix-sum index so they cost ``O(log N)``.
"""

from __future__ import annotations

import csv
import io
import math
from bisect import bisect_left, bisect_right
from fractions import Fraction
from typing import Iterable, Sequence

from .dyadic import RationalLike, rat, rat_str

Block = tuple[Fraction, Fraction, Fraction]

ZERO = Fraction(0)
ONE = Fraction(1)


def _merge_touching(items: list[Block]) -> list[Block]:
    out: list[Block] = []
    for lo, hi, v in items:
        if out and out[-1][1] == lo and out[-1][2] == v:
            out[-1] = (out[-1][0], hi, v)
        else:
            out.append((lo, hi, v))
    return out


def _normalize(items: Iterable[Sequence[RationalLike]], *, signed: bool) -> list[Block]:
    blocks = []
    for item in items:
        lo, hi, v = (rat(x) for x in item)
        if not lo < hi:
            raise ValueError(f"empty or reversed block [{lo}, {hi})")
        if v == 0:
            continue
        if not signed and v < 0:
            raise ValueError(f"negative height {v} on [{lo}, {hi})")
        blocks.append((lo, hi, v))
    blocks.sort(key=lambda b: b[0])
    for (lo0, hi0, _), (lo1, _, _) in zip(blocks, blocks[1:]):
        if lo1 < hi0:
            raise ValueError(f"overlapping blocks at [{lo0}, {hi0}) and [{lo1}, ...)")
    return _merge_touching(blocks)


class _MassIndex:
    """Prefix sums of block masses on a common integer grid.

    Endpoints are scaled by ``scale`` (lcm of endpoint denominators) and heights
    by ``hscale`` so every stored quantity is an integer.
    """

    __slots__ = ("scale", "hscale", "los", "his", "hts", "cum")

    def __init__(self, blocks: Sequence[Block]) -> None:
        self.scale = math.lcm(1, *(b[0].denominator for b in blocks), *(b[1].denominator for b in blocks))
        self.hscale = math.lcm(1, *(b[2].denominator for b in blocks))
        D, H = self.scale, self.hscale
        self.los = [lo.numerator * (D // lo.denominator) for lo, _, _ in blocks]
        self.his = [hi.numerator * (D // hi.denominator) for _, hi, _ in blocks]
        self.hts = [h.numerator * (H // h.denominator) for _, _, h in blocks]
        cum = [0]
        acc = 0
        for lo, hi, h in zip(self.los, self.his, self.hts):
            acc += h * (hi - lo)
            cum.append(acc)
        self.cum = cum

    def _scaled(self, x: Fraction):
        y = x * self.scale
        return y.numerator if y.denominator == 1 else y

    def span(self, a: Fraction, b: Fraction) -> tuple[int, int]:
        """Index range of blocks meeting ``[a, b)``."""
        return bisect_right(self.his, self._scaled(a)), bisect_left(self.los, self._scaled(b))

    def mass(self, a: Fraction, b: Fraction) -> Fraction:
        if b <= a:
            return ZERO
        A, B = self._scaled(a), self._scaled(b)
        i = bisect_right(self.his, A)
        j = bisect_left(self.los, B)
        if i >= j:
            return ZERO
        total = self.cum[j] - self.cum[i]
        if self.los[i] < A:
            total -= self.hts[i] * (A - self.los[i])
        if self.his[j - 1] > B:
            total -= self.hts[j - 1] * (self.his[j - 1] - B)
        return Fraction(total) / (self.scale * self.hscale)


class StepMeasure:
    """Finite nonnegative measure with piecewise-constant density on [0, 1)."""

    __slots__ = ("blocks", "_index")

    def __init__(self, blocks: Iterable[Sequence[RationalLike]] = ()) -> None:
        normalized = _normalize(blocks, signed=False)
        if normalized and (normalized[0][0] < 0 or normalized[-1][1] > 1):
            raise ValueError("step measures must live inside [0, 1)")
        self.blocks: tuple[Block, ...] = tuple(normalized)
        self._index: _MassIndex | None = None

    @classmethod
    def _trusted(cls, blocks: Sequence[Block]) -> StepMeasure:
        # caller guarantees sorted, disjoint, positive Fraction blocks in [0,1)
        self = object.__new__(cls)
        self.blocks = tuple(_merge_touching(list(blocks)))
        self._index = None
        return self

    @property
    def index(self) -> _MassIndex:
        if self._index is None:
            self._index = _MassIndex(self.blocks)
        return self._index

    def __len__(self) -> int:
        return len(self.blocks)

    def __eq__(self, other: object) -> bool:
        return isinstance(other, StepMeasure) and self.blocks == other.blocks

    def __hash__(self) -> int:
        return hash(self.blocks)

    def __repr__(self) -> str:
        inner = ", ".join(f"[{lo},{hi})@{h}" for lo, hi, h in self.blocks[:6])
        more = f", ... ({len(self.blocks)} blocks)" if len(self.blocks) > 6 else ""
        return f"StepMeasure({inner}{more})"

    @property
    def total_mass(self) -> Fraction:
        return self.mass(ZERO, ONE)

    def mass(self, a: RationalLike, b: RationalLike) -> Fraction:
        return mass(self, a, b)

    def density_at(self, x: RationalLike) -> Fraction:
        if not self.blocks:
            return ZERO
        X = self.index._scaled(rat(x))
        i = bisect_right(self.index.los, X) - 1
        if i >= 0 and X < self.index.his[i]:
            return self.blocks[i][2]
        return ZERO

    def max_height(self, a: RationalLike, b: RationalLike) -> Fraction:
        """Largest density on ``[a, b)``; zero if no block meets it."""
        i, j = self.index.span(rat(a), rat(b))
        if i >= j:
            return ZERO
        return max(h for _, _, h in self.blocks[i:j])

    def restrict(self, a: RationalLike, b: RationalLike) -> StepMeasure:
        a, b = rat(a), rat(b)
        i, j = self.index.span(a, b)
        return StepMeasure._trusted(
            [(max(lo, a), min(hi, b), h) for lo, hi, h in self.blocks[i:j]]
        )

    def restrict_outside(self, intervals: Sequence[tuple[Fraction, Fraction]]) -> StepMeasure:
        """Restriction to the complement of sorted disjoint ``intervals``."""
        out: list[Block] = []
        cuts = list(intervals)
        c = 0
        for lo, hi, h in self.blocks:
            while c < len(cuts) and cuts[c][1] <= lo:
                c += 1
            cur = lo
            d = c
            while d < len(cuts) and cuts[d][0] < hi:
                clo, chi = cuts[d]
                if clo > cur:
                    out.append((cur, min(clo, hi), h))
                cur = max(cur, chi)
                d += 1
            if cur < hi:
                out.append((cur, hi, h))
        return StepMeasure._trusted(out)

    def scaled(self, factor: RationalLike) -> StepMeasure:
        factor = rat(factor)
        if factor < 0:
            raise ValueError("measures scale by nonnegative factors only")
        return StepMeasure._trusted([(lo, hi, h * factor) for lo, hi, h in self.blocks if factor])

    def as_function(self) -> StepFunction:
        return StepFunction._trusted(self.blocks)

    def to_json(self) -> dict:
        return {"blocks": [{"lo": rat_str(lo), "hi": rat_str(hi), "height": rat_str(h)} for lo, hi, h in self.blocks]}

    @classmethod
    def from_json(cls, d: dict) -> StepMeasure:
        return cls((b["lo"], b["hi"], b["height"]) for b in d["blocks"])

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["lo", "hi", "height"])
        for lo, hi, h in self.blocks:
            writer.writerow([rat_str(lo), rat_str(hi), rat_str(h)])
        return buf.getvalue()

    @classmethod
    def from_csv(cls, text: str) -> StepMeasure:
        rows = csv.DictReader(io.StringIO(text))
        return cls((r["lo"], r["hi"], r["height"]) for r in rows)


class StepFunction:
    """Signed step function, zero off its pieces; adjacent equal pieces merged."""

    __slots__ = ("pieces",)

    def __init__(self, pieces: Iterable[Sequence[RationalLike]] = ()) -> None:
        self.pieces: tuple[Block, ...] = tuple(_normalize(pieces, signed=True))

    @classmethod
    def _trusted(cls, pieces: Sequence[Block]) -> StepFunction:
        self = object.__new__(cls)
        self.pieces = tuple(_merge_touching([p for p in pieces if p[2] != 0]))
        return self

    def __len__(self) -> int:
        return len(self.pieces)

    def __eq__(self, other: object) -> bool:
        return isinstance(other, StepFunction) and self.pieces == other.pieces

    def __hash__(self) -> int:
        return hash(self.pieces)

    def __repr__(self) -> str:
        return "StepFunction(" + ", ".join(f"[{lo},{hi})={v}" for lo, hi, v in self.pieces) + ")"

    def __neg__(self) -> StepFunction:
        return StepFunction._trusted([(lo, hi, -v) for lo, hi, v in self.pieces])

    def scaled(self, factor: RationalLike) -> StepFunction:
        factor = rat(factor)
        return StepFunction._trusted([(lo, hi, v * factor) for lo, hi, v in self.pieces])

    def __add__(self, other: StepFunction) -> StepFunction:
        return add_functions([self, other])

    def __sub__(self, other: StepFunction) -> StepFunction:
        return add_functions([self, -other])

    def value_at(self, x: RationalLike) -> Fraction:
        x = rat(x)
        i = bisect_right([p[0] for p in self.pieces], x) - 1
        if i >= 0 and x < self.pieces[i][1]:
            return self.pieces[i][2]
        return ZERO

    def restrict(self, a: RationalLike, b: RationalLike) -> StepFunction:
        a, b = rat(a), rat(b)
        return StepFunction._trusted(
            [(max(lo, a), min(hi, b), v) for lo, hi, v in self.pieces if lo < b and hi > a]
        )

    def breakpoints(self) -> list[Fraction]:
        pts = []
        for lo, hi, _ in self.pieces:
            if not pts or pts[-1] != lo:
                pts.append(lo)
            pts.append(hi)
        return pts

    def to_json(self) -> dict:
        return {"pieces": [{"lo": rat_str(lo), "hi": rat_str(hi), "value": rat_str(v)} for lo, hi, v in self.pieces]}

    @classmethod
    def from_json(cls, d: dict) -> StepFunction:
        return cls((p["lo"], p["hi"], p["value"]) for p in d["pieces"])

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["lo", "hi", "value"])
        for lo, hi, v in self.pieces:
            writer.writerow([rat_str(lo), rat_str(hi), rat_str(v)])
        return buf.getvalue()


def block(lo: RationalLike, hi: RationalLike, height: RationalLike) -> StepMeasure:
    return StepMeasure([(lo, hi, height)])


def mass(w: StepMeasure, a: RationalLike, b: RationalLike) -> Fraction:
    """``w([a, b))``, exactly."""
    a, b = rat(a), rat(b)
    if a > b:
        raise ValueError(f"mass needs a <= b, got [{a}, {b})")
    if not w.blocks:
        return ZERO
    return w.index.mass(a, b)


def _sweep(items: Iterable[Block]) -> list[Block]:
    events: dict[Fraction, Fraction] = {}
    for lo, hi, v in items:
        events[lo] = events.get(lo, ZERO) + v
        events[hi] = events.get(hi, ZERO) - v
    out: list[Block] = []
    level = ZERO
    xs = sorted(events)
    for x0, x1 in zip(xs, xs[1:]):
        level += events[x0]
        if level != 0:
            out.append((x0, x1, level))
    return out


def combine(measures: Sequence[StepMeasure]) -> StepMeasure:
    """Pointwise sum of step measures."""
    if not measures:
        return StepMeasure()
    if len(measures) == 1:
        return measures[0]
    return StepMeasure._trusted(_sweep(b for m in measures for b in m.blocks))


def add_functions(functions: Sequence[StepFunction]) -> StepFunction:
    return StepFunction._trusted(_sweep(p for f in functions for p in f.pieces))


def _integrate_square_merge(f: StepFunction, w: StepMeasure) -> Fraction:
    total = ZERO
    P, B = f.pieces, w.blocks
    i = j = 0
    while i < len(P) and j < len(B):
        flo, fhi, v = P[i]
        blo, bhi, h = B[j]
        lo, hi = max(flo, blo), min(fhi, bhi)
        if lo < hi:
            total += v * v * h * (hi - lo)
        if fhi <= bhi:
            i += 1
        else:
            j += 1
    return total


def integrate_square(f: StepFunction, w: StepMeasure) -> Fraction:
    """``∫ f² dw`` via the common refinement of breakpoints."""
    if len(f.pieces) * 32 < len(w.blocks):
        # few pieces against a large measure: one indexed mass query per piece
        return sum((v * v * w.index.mass(lo, hi) for lo, hi, v in f.pieces), ZERO)
    return _integrate_square_merge(f, w)


def integrate_product(f: StepFunction, g: StepFunction, w: StepMeasure) -> Fraction:
    """``∫ f g dw`` for small ``f, g`` against a possibly large ``w``."""
    total = ZERO
    P, Q = f.pieces, g.pieces
    i = j = 0
    while i < len(P) and j < len(Q):
        plo, phi, u = P[i]
        qlo, qhi, v = Q[j]
        lo, hi = max(plo, qlo), min(phi, qhi)
        if lo < hi and w.blocks:
            total += u * v * w.index.mass(lo, hi)
        if phi <= qhi:
            i += 1
        else:
            j += 1
    return total


def integrate(f: StepFunction, w: StepMeasure) -> Fraction:
    """``∫ f dw``."""
    if not w.blocks:
        return ZERO
    return sum((v * w.index.mass(lo, hi) for lo, hi, v in f.pieces), ZERO)


def support_blocks(w: StepMeasure) -> list[tuple[Block, Fraction, Fraction]]:
    """Each maximal block with the widths of the empty gaps to either side.

    Gaps are measured to the neighbouring block, or to 0 / 1 at the ends.
    """
    out = []
    B = w.blocks
    for i, blk in enumerate(B):
        left = blk[0] - (B[i - 1][1] if i > 0 else ZERO)
        right = (B[i + 1][0] if i + 1 < len(B) else ONE) - blk[1]
        out.append((blk, left, right))
    return out
