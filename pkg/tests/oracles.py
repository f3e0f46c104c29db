"""Brute-force reference computations, independent of the library's fast paths."""

from __future__ import annotations

from fractions import Fraction
from itertools import product

from dyadic_mw.dyadic import DyadicInterval, jumping_point
from dyadic_mw.steps import StepMeasure


def all_dyadic(root: DyadicInterval, depth: int):
    """Every dyadic subinterval of ``root`` down to ``depth`` extra levels."""
    for d in range(depth + 1):
        n = root.n + d
        for m in range(root.m << d, (root.m + 1) << d):
            yield DyadicInterval(m, n)


def brute_mass(w: StepMeasure, a: Fraction, b: Fraction) -> Fraction:
    total = Fraction(0)
    for lo, hi, h in w.blocks:
        lo, hi = max(lo, a), min(hi, b)
        if lo < hi:
            total += h * (hi - lo)
    return total


def brute_average(w: StepMeasure, Q: DyadicInterval) -> Fraction:
    return brute_mass(w, Q.lo, Q.hi) / Q.length


def brute_chain(J: DyadicInterval, k: int) -> list[DyadicInterval]:
    """Chain by search: the dyadic ``I ⊆ J`` of length ``4^-i |J|`` holding ``jp(J)`` in ``I-``."""
    jp = jumping_point(J)
    chain = []
    for i in range(2 * k + 1):
        found = [I for I in all_dyadic(J, 2 * i)
                 if I.n == J.n + 2 * i and I.lo <= jp < I.mid]
        assert len(found) == 1, f"scale {i}: {found}"
        chain.append(found[0])
    return chain


def brute_block(J_chain: list[DyadicInterval], r: int, w: StepMeasure, x: Fraction) -> Fraction:
    """``r Σ c_I (1_{I+} - 1_{I-})(x)`` evaluated term by term at a point."""
    total = Fraction(0)
    for I in J_chain:
        c = (brute_mass(w, I.mid, I.hi) - brute_mass(w, I.lo, I.mid)) / I.length
        if I.mid <= x < I.hi:
            total += c
        elif I.lo <= x < I.mid:
            total -= c
    return r * total


def brute_stopping_children(w: StepMeasure, L: DyadicInterval, depth: int) -> list[DyadicInterval]:
    """Maximal dyadic ``J ⊊ L`` with average at least four times that of ``L``, scanned to ``depth``."""
    t = 4 * brute_average(w, L)
    hits = [J for J in all_dyadic(L, depth) if J != L and brute_average(w, J) >= t]
    return sorted((J for J in hits if not any(K != J and K.contains(J) for K in hits)),
                  key=DyadicInterval.sort_key)


def brute_maximal(w: StepMeasure, x: Fraction, depth: int) -> Fraction:
    """``sup`` of dyadic averages over intervals containing ``x`` with scale at most ``depth``."""
    best = Fraction(0)
    for n in range(depth + 1):
        m = (x.numerator << n) // x.denominator
        best = max(best, brute_average(w, DyadicInterval(m, n)))
    return best


def sign_patterns(n: int):
    return product((1, -1), repeat=n)
