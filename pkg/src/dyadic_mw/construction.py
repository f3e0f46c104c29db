"""Inductive construction of the stopping forest, the weight and the block signs.

Stage 0 is the single interval [0, 1) carrying the model measure of height 1.
Every stage-``j`` node ``L`` spawns one child ``I--`` for each right child ``I``
in its chain, and its own mass is then frozen on ``[jp(L), rep(I(L)))`` at
height ``6^j`` while the children carry height ``6^(j+1)``.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass, field, replace
from fractions import Fraction
from typing import Iterator, Mapping, Union

from .dyadic import DyadicInterval, jumping_point, left_left_grandchild, rat_str
from .haar import XiCollection, xi
from .steps import Block, StepMeasure

DEFAULT_NODE_CAP = 1 << 21


class ResourceCapError(RuntimeError):
    """A requested construction would exceed the node cap."""

    def __init__(self, required: int, cap: int, k: int, stages: int) -> None:
        self.required = required
        self.cap = cap
        self.k = k
        self.stages = stages
        digits = len(str(required))
        shown = str(required) if digits <= 30 else f"~{(2 * k)}^{stages} ({digits}-digit count)"
        super().__init__(
            f"build(k={k}, stages={stages}) needs {shown} nodes, above the cap of {cap}"
        )


@dataclass(eq=False)
class StoppingNode:
    interval: DyadicInterval
    stage: int
    index: int
    parent: StoppingNode | None = None
    children: list[StoppingNode] = field(default_factory=list)

    def xi(self, k: int) -> XiCollection:
        return xi(self.interval, k)

    def __repr__(self) -> str:
        return f"StoppingNode({self.interval}, stage={self.stage})"


def node_count(k: int, stages: int) -> int:
    """Number of nodes in a forest with ``stages`` rounds: ``Σ_{j<=stages} (2k)^j``."""
    b = 2 * k
    return stages + 1 if b == 1 else (b ** (stages + 1) - 1) // (b - 1)


def default_stage_count(k: int) -> int:
    """``floor(log 3 / -log(1 - 2^-4k)) + 1`` evaluated with integer comparisons.

    ``m <= log 3 / -log q`` iff ``3 (2^4k - 1)^m >= 2^(4km)``; the float
    estimate only seeds the search.
    """
    if k < 1:
        raise ValueError("k must be positive")
    a, b = (1 << 4 * k) - 1, 1 << 4 * k

    def fits(m: int) -> bool:
        return 3 * a**m >= b**m

    m = int(math.log(3) / -math.log1p(-(2.0 ** (-4 * k))))
    while not fits(m):
        m -= 1
    while fits(m + 1):
        m += 1
    return m + 1


@dataclass(frozen=True)
class Construction:
    """The forest ``L_0, ..., L_stages`` with weight ``w = μ_stages`` and signs.

    ``nodes`` is in depth-first order with children left to right, which is
    also increasing order of left endpoints; ``signs[i]`` belongs to
    ``nodes[i]``.
    """

    k: int
    stages: int
    nodes: tuple[StoppingNode, ...]
    weight: StepMeasure
    signs: tuple[int, ...]
    sign_mode: str = "plus"

    @property
    def root(self) -> StoppingNode:
        return self.nodes[0]

    def stage_nodes(self, j: int) -> list[StoppingNode]:
        return [nd for nd in self.nodes if nd.stage == j]

    def stage_intervals(self) -> list[list[DyadicInterval]]:
        out: list[list[DyadicInterval]] = [[] for _ in range(self.stages + 1)]
        for nd in self.nodes:
            out[nd.stage].append(nd.interval)
        return out

    def sign(self, node: StoppingNode) -> int:
        return self.signs[node.index]

    def truncate(self, stages: int) -> Construction:
        """The construction with fewer rounds (same nodes up to ``stages``)."""
        if not 0 <= stages <= self.stages:
            raise ValueError(f"cannot truncate {self.stages} stages to {stages}")
        if stages == self.stages:
            return self
        return build(self.k, stages)

    def to_json(self) -> dict:
        def enc(nd: StoppingNode) -> dict:
            return {
                "interval": nd.interval.to_json(),
                "stage": nd.stage,
                "sign": self.signs[nd.index],
                "children": [enc(ch) for ch in nd.children],
            }

        return {
            "k": self.k,
            "stages": self.stages,
            "sign_mode": self.sign_mode,
            "node_count": len(self.nodes),
            "total_mass": rat_str(self.weight.total_mass),
            "forest": enc(self.root),
        }


def model_measure(J: DyadicInterval, lam: Fraction | int) -> StepMeasure:
    """Height ``lam`` on ``[jp(J), rep(J))``, zero elsewhere."""
    lam = Fraction(lam)
    if lam <= 0:
        raise ValueError("height must be positive")
    return StepMeasure._trusted([(jumping_point(J), J.hi, lam)])


def _children_intervals(L: DyadicInterval, k: int) -> list[DyadicInterval]:
    # left to right: the right children of the chain appear in reverse order
    return [left_left_grandchild(I) for I in reversed(xi(L, k).plus)]


def _dfs(root: StoppingNode) -> Iterator[StoppingNode]:
    stack = [root]
    while stack:
        nd = stack.pop()
        yield nd
        stack.extend(reversed(nd.children))


def _stage_blocks(nodes: tuple[StoppingNode, ...], k: int, j: int) -> list[Block]:
    """Blocks of ``μ_j``: frozen blocks of stages ``< j``, live blocks at stage ``j``."""
    blocks: list[Block] = []
    six = [Fraction(6**i) for i in range(j + 1)]
    for nd in nodes:
        if nd.stage > j:
            continue
        L = nd.interval
        if nd.stage < j:
            hi = xi(L, k).terminal.hi
        else:
            hi = L.hi
        blocks.append((jumping_point(L), hi, six[nd.stage]))
    return blocks


def build(k: int, stages: int | str = "auto", node_cap: int = DEFAULT_NODE_CAP) -> Construction:
    """Run ``stages`` rounds of the recursion starting from [0, 1).

    ``stages="auto"`` uses :func:`default_stage_count`. Raises
    :class:`ResourceCapError` when the forest would exceed ``node_cap`` nodes.
    """
    if k < 1:
        raise ValueError("k must be a positive integer")
    if stages == "auto":
        stages = default_stage_count(k)
    stages = int(stages)
    if stages < 0:
        raise ValueError("stages must be nonnegative")
    required = node_count(k, stages)
    if required > node_cap:
        raise ResourceCapError(required, node_cap, k, stages)

    root = StoppingNode(DyadicInterval.unit(), 0, 0)
    frontier = [root]
    for j in range(1, stages + 1):
        nxt = []
        for nd in frontier:
            for iv in _children_intervals(nd.interval, k):
                ch = StoppingNode(iv, j, -1, nd)
                nd.children.append(ch)
                nxt.append(ch)
        frontier = nxt
    nodes = tuple(_dfs(root))
    for i, nd in enumerate(nodes):
        nd.index = i
    weight = StepMeasure._trusted(_stage_blocks(nodes, k, stages))
    return Construction(k, stages, nodes, weight, (1,) * len(nodes), "plus")


def stage_measure(c: Construction, j: int) -> StepMeasure:
    """``μ_j`` rebuilt from the forest."""
    if not 0 <= j <= c.stages:
        raise ValueError(f"stage {j} outside 0..{c.stages}")
    if j == c.stages:
        return c.weight
    return StepMeasure._trusted(_stage_blocks(c.nodes, c.k, j))


SignMode = Union[str, tuple]


def assign_signs(c: Construction, mode: str = "plus", *, seed: int | None = None,
                 explicit: Mapping[DyadicInterval, int] | None = None) -> Construction:
    """Return ``c`` with signs set by ``mode`` in ``{"plus", "random", "explicit"}``.

    ``random`` draws independent fair signs in node order from ``seed``;
    ``explicit`` must cover every node.
    """
    if mode in ("plus", "all_plus"):
        return replace(c, signs=(1,) * len(c.nodes), sign_mode="plus")
    if mode == "random":
        rng = random.Random(seed)
        return replace(c, signs=tuple(rng.choice((1, -1)) for _ in c.nodes), sign_mode=f"random({seed})")
    if mode == "explicit":
        explicit = explicit or {}
        missing = [nd.interval for nd in c.nodes if nd.interval not in explicit]
        if missing:
            raise ValueError(f"explicit sign map misses {len(missing)} nodes, first {missing[0]}")
        signs = tuple(int(explicit[nd.interval]) for nd in c.nodes)
        if any(s not in (1, -1) for s in signs):
            raise ValueError("signs must be +1 or -1")
        return replace(c, signs=signs, sign_mode="explicit")
    raise ValueError(f"unknown sign mode {mode!r}")


def with_signs(c: Construction, signs: tuple[int, ...], mode: str) -> Construction:
    if len(signs) != len(c.nodes):
        raise ValueError("one sign per node required")
    return replace(c, signs=tuple(signs), sign_mode=mode)
