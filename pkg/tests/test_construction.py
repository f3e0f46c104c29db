from fractions import Fraction as F

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from dyadic_mw.construction import (ResourceCapError, assign_signs, build, default_stage_count,
                                    model_measure, node_count, stage_measure)
from dyadic_mw.dyadic import DyadicInterval
from dyadic_mw.steps import StepMeasure

D = DyadicInterval.from_endpoints
UNIT = DyadicInterval.unit()


def test_model_measure_examples():
    mu = model_measure(UNIT, 1)
    assert mu.blocks == ((F(1, 3), F(1), F(1)),) and mu.total_mass == F(2, 3)
    assert model_measure(D(F(1, 2), F(5, 8)), 6).blocks == ((F(13, 24), F(5, 8), F(6)),)
    assert model_measure(D(F(1, 2), F(5, 8)), 6).total_mass == F(1, 2)
    assert model_measure(D(F(3, 8), F(13, 32)), 6).total_mass == F(1, 8)
    with pytest.raises(ValueError):
        model_measure(UNIT, 0)


def test_default_stage_count():
    assert [default_stage_count(k) for k in (1, 2, 3)] == [18, 281, 4500]
    for k in (1, 2, 3):
        m = default_stage_count(k) - 1
        a, b = 16**k - 1, 16**k
        assert 3 * a**m >= b**m and 3 * a ** (m + 1) < b ** (m + 1)


def test_build_base_case_and_one_round():
    c0 = build(1, 0)
    assert [nd.interval for nd in c0.nodes] == [UNIT]
    assert c0.weight == model_measure(UNIT, 1)
    c1 = build(1, 1)
    assert [nd.interval for nd in c1.nodes] == [UNIT, D(F(3, 8), F(13, 32)), D(F(1, 2), F(5, 8))]
    assert c1.weight == StepMeasure([(F(1, 3), F(3, 8), 1), (F(37, 96), F(39, 96), 6),
                                     (F(13, 24), F(15, 24), 6)])
    assert c1.weight.total_mass == F(2, 3)


def test_resource_cap():
    with pytest.raises(ResourceCapError) as info:
        build(2, "auto")
    err = info.value
    assert err.required == node_count(2, 281) and err.stages == 281
    assert "4^281" in str(err)
    with pytest.raises(ResourceCapError):
        build(1, 5, node_cap=10)


@pytest.mark.parametrize("k,stages", [(1, 5), (2, 2), (3, 1)])
def test_stage_measures_conserve_mass(k, stages):
    c = build(k, stages)
    assert len(c.nodes) == node_count(k, stages)
    for j in range(stages + 1):
        assert stage_measure(c, j).total_mass == F(2, 3)
    assert stage_measure(c, 0) == model_measure(UNIT, 1)
    assert stage_measure(build(1, 4), 1) == build(1, 1).weight


def test_nodes_are_depth_first_and_sorted():
    c = build(2, 2)
    los = [nd.interval.lo for nd in c.nodes]
    assert los == sorted(los)
    for nd in c.nodes:
        assert nd.index == c.nodes.index(nd)
        for ch in nd.children:
            assert ch.parent is nd and ch.stage == nd.stage + 1 and nd.interval.contains(ch.interval)
        if nd.stage < c.stages:
            assert len(nd.children) == 2 * c.k


def test_truncate_matches_fresh_build():
    c = build(1, 4)
    assert c.truncate(2).weight == build(1, 2).weight
    with pytest.raises(ValueError):
        c.truncate(5)


def test_sign_assignment():
    c = build(1, 2)
    assert set(assign_signs(c, "all_plus").signs) == {1}
    a, b = assign_signs(c, "random", seed=42), assign_signs(c, "random", seed=42)
    assert a.signs == b.signs
    c0 = assign_signs(build(1, 0), "explicit", explicit={UNIT: -1})
    assert c0.signs == (-1,)
    with pytest.raises(ValueError):
        assign_signs(c, "explicit", explicit={UNIT: 1})
    with pytest.raises(ValueError):
        assign_signs(c, "sideways")


def test_forest_json():
    doc = build(1, 1).to_json()
    assert doc["node_count"] == 3 and doc["total_mass"] == "2/3"
    assert [ch["interval"] for ch in doc["forest"]["children"]] == [{"m": "12", "n": 5}, {"m": "4", "n": 3}]


@settings(max_examples=15, deadline=None)
@given(st.integers(1, 3), st.integers(0, 2))
def test_frozen_blocks_never_change(k, stages):
    c = build(k, stages + 1)
    earlier = stage_measure(c, stages)
    later = stage_measure(c, stages + 1)
    for nd in c.nodes:
        if nd.stage < stages:
            T = nd.xi(k).terminal
            jp_block = [b for b in earlier.blocks if b[0] == (3 * nd.interval.m + 1) / F(3 << nd.interval.n)]
            assert jp_block and jp_block[0][1] == T.hi
            assert jp_block[0] in later.blocks
