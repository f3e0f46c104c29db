"""Exact rationals and dyadic-interval geometry on [0, 1).

All scalars are :class:`fractions.Fraction`; a dyadic interval is stored as the
integer pair ``(m, n)`` standing for ``[m 2^-n, (m+1) 2^-n)``.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Iterator, Literal, Union

Rational = Fraction
RationalLike = Union[Fraction, int, str]

LEFT = "left"
RIGHT = "right"
Side = Literal["left", "right"]


def rat(x: RationalLike) -> Fraction:
    """Coerce ``x`` to a Fraction; strings may be ``"p/q"`` or integers."""
    if isinstance(x, Fraction):
        return x
    if isinstance(x, float):
        raise TypeError("floats are not exact; pass a Fraction, int or 'p/q' string")
    return Fraction(x)


def rat_str(x: Fraction | int) -> str:
    """Serialize as ``"num/den"`` in lowest terms (denominator always shown)."""
    x = Fraction(x)
    return f"{x.numerator}/{x.denominator}"


def parse_rat(s: str) -> Fraction:
    return Fraction(s)


@dataclass(frozen=True, order=False)
class DyadicInterval:
    """The half-open interval ``[m 2^-n, (m+1) 2^-n)`` inside [0, 1)."""

    m: int
    n: int

    def __post_init__(self) -> None:
        if self.n < 0:
            raise ValueError(f"scale n must be nonnegative, got {self.n}")
        if not 0 <= self.m < (1 << self.n):
            raise ValueError(f"[{self.m}/2^{self.n}, ...) is not inside [0, 1)")

    @classmethod
    def unit(cls) -> DyadicInterval:
        return cls(0, 0)

    @classmethod
    def from_endpoints(cls, lo: RationalLike, hi: RationalLike) -> DyadicInterval:
        lo, hi = rat(lo), rat(hi)
        length = hi - lo
        if length <= 0 or length.numerator != 1 or length.denominator & (length.denominator - 1):
            raise ValueError(f"[{lo}, {hi}) is not a dyadic interval")
        n = length.denominator.bit_length() - 1
        m = lo * length.denominator
        if m.denominator != 1:
            raise ValueError(f"[{lo}, {hi}) is not aligned to the dyadic grid")
        return cls(int(m), n)

    @property
    def lo(self) -> Fraction:
        return Fraction(self.m, 1 << self.n)

    @property
    def hi(self) -> Fraction:
        return Fraction(self.m + 1, 1 << self.n)

    @property
    def length(self) -> Fraction:
        return Fraction(1, 1 << self.n)

    @property
    def mid(self) -> Fraction:
        return Fraction(2 * self.m + 1, 1 << (self.n + 1))

    @property
    def left(self) -> DyadicInterval:
        return DyadicInterval(2 * self.m, self.n + 1)

    @property
    def right(self) -> DyadicInterval:
        return DyadicInterval(2 * self.m + 1, self.n + 1)

    @property
    def parent(self) -> DyadicInterval:
        if self.n == 0:
            raise ValueError("[0,1) has no parent inside [0,1)")
        return DyadicInterval(self.m >> 1, self.n - 1)

    def child(self, side: Side) -> DyadicInterval:
        if side == LEFT:
            return self.left
        if side == RIGHT:
            return self.right
        raise ValueError(f"side must be 'left' or 'right', got {side!r}")

    def contains(self, other: DyadicInterval) -> bool:
        """True iff ``other`` is a (not necessarily proper) subinterval."""
        return other.n >= self.n and (other.m >> (other.n - self.n)) == self.m

    def intersects(self, other: DyadicInterval) -> bool:
        return self.contains(other) or other.contains(self)

    def contains_point(self, x: RationalLike) -> bool:
        return self.lo <= rat(x) < self.hi

    def ancestors(self) -> Iterator[DyadicInterval]:
        """Strict ancestors up to and including [0, 1), nearest first."""
        m, n = self.m, self.n
        while n > 0:
            m, n = m >> 1, n - 1
            yield DyadicInterval(m, n)

    def sort_key(self) -> tuple[Fraction, int]:
        # by left endpoint, larger intervals first
        return (self.lo, self.n)

    def to_json(self) -> dict:
        return {"m": str(self.m), "n": self.n}

    @classmethod
    def from_json(cls, d: dict) -> DyadicInterval:
        return cls(int(d["m"]), int(d["n"]))

    def __str__(self) -> str:
        return f"[{self.lo},{self.hi})"


def dyadic_containing(x: RationalLike, n: int) -> DyadicInterval:
    """The scale-``n`` dyadic interval containing the point ``x`` in [0, 1)."""
    x = rat(x)
    m = (x.numerator << n) // x.denominator
    return DyadicInterval(m, n)


def child(interval: DyadicInterval, side: Side) -> DyadicInterval:
    return interval.child(side)


def jumping_point(interval: DyadicInterval) -> Fraction:
    """``a + |J|/3`` for ``J = [a, a + |J|)``."""
    return Fraction(3 * interval.m + 1, 3 << interval.n)


def right_end(interval: DyadicInterval) -> Fraction:
    return interval.hi


def left_left_grandchild(interval: DyadicInterval) -> DyadicInterval:
    return DyadicInterval(4 * interval.m, interval.n + 2)
