"""Energies ``∫ |Σ r_L S_L w|^2 dσ`` for signed block multipliers.

For independent fair signs the cross terms average out, so the expected
energy is the sign-free sum ``Σ_L ∫ |S_L w|^2 dσ``. Greedy derandomization
walks the forest depth first and picks each sign so its cross term with the
already-signed part is nonnegative, which keeps the achieved energy at or
above that expectation.

Stopping intervals are nested or disjoint and ``S_L w`` lives on ``L``, so
the only nodes interacting with ``L`` are its ancestors and descendants; the
partial sum of the ancestors is carried down restricted to each node.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable

from .construction import Construction, StoppingNode, with_signs
from .corona import sigma as sigma_of
from .dyadic import rat_str
from .haar import apply_block
from .steps import ZERO, StepFunction, StepMeasure, add_functions, integrate_product, integrate_square


@dataclass(frozen=True)
class EnergyReport:
    k: int
    stages: int
    sign_mode: str
    expectation_energy: Fraction
    achieved_energy: Fraction
    ratio: Fraction

    def to_json(self) -> dict:
        return {
            "k": self.k,
            "stages": self.stages,
            "sign_mode": self.sign_mode,
            "expectation_energy": rat_str(self.expectation_energy),
            "achieved_energy": rat_str(self.achieved_energy),
            "ratio": rat_str(self.ratio),
        }


def unit_outputs(c: Construction) -> list[StepFunction]:
    """``S_{L,+1} w`` for every node, in node order."""
    return [apply_block(nd.interval, c.k, 1, c.weight) for nd in c.nodes]


def expectation_energy(c: Construction, sig: StepMeasure | None = None,
                       outputs: list[StepFunction] | None = None) -> Fraction:
    """Mean energy over independent uniform signs: ``Σ_L ∫ |S_L w|^2 dσ``."""
    if not c.nodes:
        return ZERO
    sig = sigma_of(c.weight) if sig is None else sig
    outputs = unit_outputs(c) if outputs is None else outputs
    return sum((integrate_square(f, sig) for f in outputs), ZERO)


def _walk(c: Construction, sig: StepMeasure, outputs: list[StepFunction], choose) -> tuple[list[int], Fraction]:
    """Depth-first pass carrying the ancestors' signed sum restricted to each node.

    ``choose(node, cross)`` returns the sign of ``node`` given the cross term
    ``<ancestors, S_L w>_σ``; returns the signs and the achieved energy.
    """
    signs = [0] * len(c.nodes)
    energy = ZERO
    stack: list[tuple[StoppingNode, StepFunction]] = [(c.root, StepFunction())]
    while stack:
        nd, above = stack.pop()
        out = outputs[nd.index]
        cross = integrate_product(above, out, sig) if above.pieces else ZERO
        r = choose(nd, cross)
        signs[nd.index] = r
        energy += integrate_square(out, sig) + 2 * r * cross
        if nd.children:
            here = add_functions([above, out if r == 1 else -out])
            for ch in reversed(nd.children):
                iv = ch.interval
                stack.append((ch, here.restrict(iv.lo, iv.hi)))
    return signs, energy


def achieved_energy(c: Construction, sig: StepMeasure | None = None,
                    outputs: list[StepFunction] | None = None) -> Fraction:
    """``∫ |Σ_L r_L S_L w|^2 dσ`` for the signs stored on ``c``."""
    sig = sigma_of(c.weight) if sig is None else sig
    outputs = unit_outputs(c) if outputs is None else outputs
    _, energy = _walk(c, sig, outputs, lambda nd, cross: c.signs[nd.index])
    return energy


def achieved_energy_direct(c: Construction, signs: Iterable[int], sig: StepMeasure,
                           outputs: list[StepFunction]) -> Fraction:
    """Same quantity by summing every signed output into one step function."""
    total = add_functions([f if r == 1 else -f for f, r in zip(outputs, signs)])
    return integrate_square(total, sig)


def derandomize_signs(c: Construction, sig: StepMeasure | None = None,
                      outputs: list[StepFunction] | None = None) -> tuple[Construction, EnergyReport]:
    """Conditional-expectation sign choice in depth-first order.

    Each sign is ``+1`` unless the cross term with the ancestors is negative.
    Returns the signed construction and its energy report.
    """
    sig = sigma_of(c.weight) if sig is None else sig
    outputs = unit_outputs(c) if outputs is None else outputs
    signs, achieved = _walk(c, sig, outputs, lambda nd, cross: 1 if cross >= 0 else -1)
    signed = with_signs(c, tuple(signs), "derandomized")
    expected = expectation_energy(c, sig, outputs)
    return signed, EnergyReport(c.k, c.stages, "derandomized", expected, achieved,
                                achieved / (c.k**2 * c.weight.total_mass))


def energy_report(c: Construction, sig: StepMeasure | None = None,
                  outputs: list[StepFunction] | None = None) -> EnergyReport:
    """Report for whatever signs ``c`` already carries."""
    sig = sigma_of(c.weight) if sig is None else sig
    outputs = unit_outputs(c) if outputs is None else outputs
    achieved = achieved_energy(c, sig, outputs)
    expected = expectation_energy(c, sig, outputs)
    return EnergyReport(c.k, c.stages, c.sign_mode, expected, achieved,
                        achieved / (c.k**2 * c.weight.total_mass))


def exhaustive_energies(c: Construction, sig: StepMeasure | None = None,
                        outputs: list[StepFunction] | None = None,
                        max_nodes: int = 12) -> list[Fraction]:
    """Achieved energy for every sign pattern (brute force, small forests only)."""
    n = len(c.nodes)
    if n > max_nodes:
        raise ValueError(f"{n} nodes is too many for exhaustive sign search")
    sig = sigma_of(c.weight) if sig is None else sig
    outputs = unit_outputs(c) if outputs is None else outputs
    return [achieved_energy_direct(c, signs, sig, outputs)
            for signs in itertools.product((1, -1), repeat=n)]
