"""Plot data for the stage measures: step coordinates and interval markers."""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field
from fractions import Fraction

from .construction import Construction, stage_measure
from .dyadic import jumping_point, rat_str


@dataclass(frozen=True)
class Marker:
    kind: str  # "stopping", "chain", "terminal" or "jump"
    label: str
    lo: Fraction
    hi: Fraction | None = None  # None for point markers


@dataclass
class FigureTable:
    """``steps[i] = (x, y)``: the density is ``y`` on ``[x, next x)``; the last point closes at 1."""

    k: int
    stage: int
    steps: list[tuple[Fraction, Fraction]] = field(default_factory=list)
    markers: list[Marker] = field(default_factory=list)

    def to_json(self) -> dict:
        return {
            "k": self.k,
            "stage": self.stage,
            "steps": [[rat_str(x), rat_str(y)] for x, y in self.steps],
            "markers": [
                {"kind": m.kind, "label": m.label, "lo": rat_str(m.lo),
                 "hi": None if m.hi is None else rat_str(m.hi)}
                for m in self.markers
            ],
        }

    def to_csv(self) -> str:
        buf = io.StringIO()
        out = csv.writer(buf, lineterminator="\n")
        out.writerow(["kind", "label", "x", "x_end", "y"])
        for x, y in self.steps:
            out.writerow(["step", "", rat_str(x), "", rat_str(y)])
        for m in self.markers:
            out.writerow([m.kind, m.label, rat_str(m.lo), "" if m.hi is None else rat_str(m.hi), ""])
        return buf.getvalue()


def export_figure_data(c: Construction, stage: int) -> FigureTable:
    """Step profile of ``μ_stage`` with markers for its nodes' chains and jumping points.

    Markers cover every node of stage ``<= stage``: the stopping interval, its
    chain members, the terminal interval and the jumping point.
    """
    if not 0 <= stage <= c.stages:
        raise ValueError(f"stage {stage} outside 0..{c.stages}")
    mu = stage_measure(c, stage)
    table = FigureTable(c.k, stage)
    x = Fraction(0)
    for lo, hi, h in mu.blocks:
        if lo > x:
            table.steps.append((x, Fraction(0)))
        table.steps.append((lo, h))
        x = hi
    if x < 1:
        table.steps.append((x, Fraction(0)))
    table.steps.append((Fraction(1), table.steps[-1][1]))

    for nd in c.nodes:
        if nd.stage > stage:
            continue
        L = nd.interval
        tag = f"stage {nd.stage} {L}"
        table.markers.append(Marker("stopping", tag, L.lo, L.hi))
        chain = nd.xi(c.k).chain
        for i, I in enumerate(chain[1:-1], start=1):
            table.markers.append(Marker("chain", f"{tag} I_{i}", I.lo, I.hi))
        table.markers.append(Marker("terminal", f"{tag} I(L)", chain[-1].lo, chain[-1].hi))
        table.markers.append(Marker("jump", f"{tag} jp", jumping_point(L)))
    return table
