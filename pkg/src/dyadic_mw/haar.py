"""Chains of dyadic intervals around a jumping point, Haar ratios, block multipliers.

No square roots appear anywhere. For a measure ``w`` and dyadic ``I`` we keep
the rational ``c_I = (w(I+) - w(I-)) / |I|``; then ``<w, h_I> h_I`` equals
``c_I (1_{I+} - 1_{I-})`` and ``<w, h_I>^2 = c_I^2 |I|``.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from .dyadic import DyadicInterval, RationalLike, rat
from .steps import ZERO, Block, StepFunction, StepMeasure


@dataclass(frozen=True)
class XiCollection:
    """The chain ``J = I_0 ⊃ I_1 ⊃ ... ⊃ I_2k`` with ``|I_i| = 4 |I_{i+1}|``.

    ``plus`` holds the right children ``I_0+ ... I_{2k-1}+`` and ``terminal``
    is the smallest member ``I_2k``.
    """

    J: DyadicInterval
    k: int
    chain: tuple[DyadicInterval, ...]

    @property
    def terminal(self) -> DyadicInterval:
        return self.chain[-1]

    @property
    def plus(self) -> tuple[DyadicInterval, ...]:
        return tuple(I.right for I in self.chain[:-1])

    def to_json(self) -> dict:
        return {
            "J": self.J.to_json(),
            "k": self.k,
            "chain": [I.to_json() for I in self.chain],
            "terminal": self.terminal.to_json(),
            "plus": [I.to_json() for I in self.plus],
        }


def xi(J: DyadicInterval, k: int) -> XiCollection:
    """Closed-form chain: each member is the right child of the previous one's left child."""
    if k < 1:
        raise ValueError(f"k must be a positive integer, got {k}")
    chain = [J]
    m, n = J.m, J.n
    for _ in range(2 * k):
        # (I^-)^+ of [m 2^-n, ...) is [(4m+1) 2^-(n+2), ...)
        m, n = 4 * m + 1, n + 2
        chain.append(DyadicInterval(m, n))
    return XiCollection(J, k, tuple(chain))


def haar_ratio(w: StepMeasure, I: DyadicInterval) -> Fraction:
    """``<w, h_I> / sqrt|I|``, i.e. ``(w(I+) - w(I-)) / |I|``."""
    if not w.blocks:
        return ZERO
    mid = I.mid
    return (w.index.mass(mid, I.hi) - w.index.mass(I.lo, mid)) * (1 << I.n)


def block_coefficients(J: DyadicInterval, k: int, w: StepMeasure) -> list[Fraction]:
    return [haar_ratio(w, I) for I in xi(J, k).chain]


def block_from_coefficients(J: DyadicInterval, k: int, r: int, coeffs: list[Fraction]) -> StepFunction:
    """``r Σ c_i (1_{I_i+} - 1_{I_i-})`` over the chain of ``J``, as ordered pieces."""
    chain = xi(J, k).chain
    left: list[Block] = []
    right: list[Block] = []
    running = ZERO
    for i, (I, c) in enumerate(zip(chain, coeffs)):
        # on I_i+ every earlier term sits on its left half; on (I_i-)- the
        # current term joins them with a minus sign
        right.append((I.mid, I.hi, r * (c - running)))
        running += c
        if i + 1 < len(chain):
            left.append((I.lo, chain[i + 1].lo, -r * running))
        else:
            left.append((I.lo, I.mid, -r * running))
    return StepFunction._trusted(left + right[::-1])


def apply_block(J: DyadicInterval, k: int, r: int, w: StepMeasure) -> StepFunction:
    """The block multiplier ``S_{J,r} w = r Σ_{I in chain} <w, h_I> h_I``."""
    if r not in (1, -1):
        raise ValueError(f"sign must be +1 or -1, got {r}")
    return block_from_coefficients(J, k, r, block_coefficients(J, k, w))


def level_set(f: StepFunction, t: RationalLike) -> list[tuple[Fraction, Fraction]]:
    """Disjoint intervals where ``|f| > t`` (strict)."""
    t = rat(t)
    if t < 0:
        raise ValueError("threshold must be nonnegative")
    out: list[tuple[Fraction, Fraction]] = []
    for lo, hi, v in f.pieces:
        if abs(v) > t:
            if out and out[-1][1] == lo:
                out[-1] = (out[-1][0], hi)
            else:
                out.append((lo, hi))
    return out


def measure_of(w: StepMeasure, intervals: list[tuple[Fraction, Fraction]]) -> Fraction:
    if not w.blocks:
        return ZERO
    return sum((w.index.mass(lo, hi) for lo, hi in intervals), ZERO)
