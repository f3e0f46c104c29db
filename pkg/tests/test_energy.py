from fractions import Fraction as F

import pytest

from dyadic_mw.construction import assign_signs, build, node_count
from dyadic_mw.corona import sigma
from dyadic_mw.energy import (achieved_energy, achieved_energy_direct, derandomize_signs,
                              energy_report, exhaustive_energies, expectation_energy,
                              unit_outputs)
from dyadic_mw.steps import add_functions, integrate_square

from .oracles import sign_patterns

SMALL = [(k, s) for k in (1, 2, 3) for s in range(3) if node_count(k, s) <= 7]


def test_single_block_energy():
    c = build(1, 0)
    assert expectation_energy(c) == F(5, 72)
    signed, report = derandomize_signs(c)
    assert report.achieved_energy == report.expectation_energy == F(5, 72)
    assert report.ratio == F(5, 72) / F(2, 3)


@pytest.mark.parametrize("k,stages", SMALL)
def test_expectation_is_mean_over_all_sign_patterns(k, stages):
    c = build(k, stages)
    sig = sigma(c.weight)
    outputs = unit_outputs(c)
    # independent oracle: square of the explicit signed sum for every pattern
    brute = [integrate_square(add_functions([f if r == 1 else -f for f, r in zip(outputs, rs)]), sig)
             for rs in sign_patterns(len(c.nodes))]
    assert exhaustive_energies(c, sig, outputs) == brute
    assert expectation_energy(c, sig, outputs) == sum(brute, F(0)) / len(brute)
    _, report = derandomize_signs(c, sig, outputs)
    assert report.achieved_energy >= report.expectation_energy
    assert report.achieved_energy in brute


@pytest.mark.parametrize("k,stages,seed", [(1, 3, 1), (1, 4, 7), (2, 2, 3)])
def test_locality_walk_equals_direct_sum(k, stages, seed):
    c = assign_signs(build(k, stages), "random", seed=seed)
    sig = sigma(c.weight)
    outputs = unit_outputs(c)
    assert achieved_energy(c, sig, outputs) == achieved_energy_direct(c, c.signs, sig, outputs)


def test_derandomized_signs_beat_expectation_at_six_stages():
    c = build(1, 6)
    signed, report = derandomize_signs(c)
    assert report.achieved_energy >= report.expectation_energy
    assert energy_report(signed).achieved_energy == report.achieved_energy


def test_empty_and_oversized_inputs():
    with pytest.raises(ValueError):
        exhaustive_energies(build(1, 3), max_nodes=7)
