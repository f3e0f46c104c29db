from fractions import Fraction as F

import pytest
from hypothesis import given
from hypothesis import strategies as st

from dyadic_mw.dyadic import (DyadicInterval, child, dyadic_containing, jumping_point,
                              left_left_grandchild, parse_rat, rat, rat_str, right_end)

from .oracles import all_dyadic

D = DyadicInterval.from_endpoints


@st.composite
def dyadics(draw, max_n=12):
    n = draw(st.integers(0, max_n))
    m = draw(st.integers(0, (1 << n) - 1))
    return DyadicInterval(m, n)


def test_child_examples():
    assert child(DyadicInterval.unit(), "left") == D(0, F(1, 2))
    assert child(D(F(1, 4), F(1, 2)), "right") == D(F(3, 8), F(1, 2))
    assert child(child(D(F(1, 4), F(1, 2)), "left"), "right") == D(F(5, 16), F(3, 8))


def test_child_agrees_with_depth_four_enumeration():
    for I in all_dyadic(DyadicInterval.unit(), 3):
        halves = [J for J in all_dyadic(I, 1) if J != I]
        assert [I.left, I.right] == sorted(halves, key=DyadicInterval.sort_key)
        assert I.left.hi == I.right.lo == I.mid


def test_jumping_point_examples():
    assert jumping_point(DyadicInterval.unit()) == F(1, 3)
    assert jumping_point(D(F(5, 16), F(3, 8))) == F(1, 3)
    assert jumping_point(D(F(1, 2), F(5, 8))) == F(13, 24)


def test_right_end_and_grandchild_examples():
    assert right_end(DyadicInterval.unit()) == 1
    assert right_end(D(F(5, 16), F(3, 8))) == F(3, 8)
    assert right_end(D(F(3, 8), F(13, 32))) == F(13, 32)
    assert left_left_grandchild(D(F(1, 2), 1)) == D(F(1, 2), F(5, 8))
    assert left_left_grandchild(D(F(3, 8), F(1, 2))) == D(F(3, 8), F(13, 32))
    assert left_left_grandchild(DyadicInterval.unit()) == D(0, F(1, 4))


def test_invalid_intervals_rejected():
    with pytest.raises(ValueError):
        DyadicInterval(4, 2)
    with pytest.raises(ValueError):
        DyadicInterval(0, -1)
    with pytest.raises(ValueError):
        D(F(1, 3), F(2, 3))
    with pytest.raises(ValueError):
        D(F(1, 8), F(3, 8))
    with pytest.raises(ValueError):
        DyadicInterval.unit().parent
    with pytest.raises(TypeError):
        rat(0.5)


@given(dyadics())
def test_jumping_point_binary_digits_alternate(J):
    # below J the point jp(J) falls in the left half, then the right, and so on
    jp = jumping_point(J)
    cur = J
    for d in range(1, 13):
        nxt = dyadic_containing(jp, J.n + d)
        assert cur.contains(nxt)
        assert nxt == (cur.left if d % 2 == 1 else cur.right)
        cur = nxt


@given(dyadics(), dyadics())
def test_nested_or_disjoint(I, J):
    overlap = max(I.lo, J.lo) < min(I.hi, J.hi)
    assert overlap == I.intersects(J)
    assert I.contains(J) == (I.lo <= J.lo and J.hi <= I.hi)


@given(dyadics(max_n=10))
def test_ancestors_and_json_round_trip(I):
    chain = list(I.ancestors())
    assert len(chain) == I.n
    assert all(A.contains(I) for A in chain)
    if chain:
        assert chain[0] == I.parent and chain[-1] == DyadicInterval.unit()
    assert DyadicInterval.from_json(I.to_json()) == I
    assert D(I.lo, I.hi) == I


@given(st.fractions(min_value=0, max_value=1).filter(lambda x: x < 1), st.integers(0, 20))
def test_dyadic_containing_contains(x, n):
    I = dyadic_containing(x, n)
    assert I.n == n and I.contains_point(x)


def test_rational_strings():
    assert rat_str(F(2, 3)) == "2/3"
    assert rat_str(1) == "1/1"
    assert parse_rat("13/32") == F(13, 32)
    assert rat("5/16") == F(5, 16)
