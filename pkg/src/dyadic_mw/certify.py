"""Exact certificates for the construction's identities and inequalities.

Each ``check_*`` function returns a :class:`Certificate` whose verdict comes
only from exact comparisons of rationals; witnesses are the rationals (or
interval lists) those comparisons were made on.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Callable, Iterable

from .construction import Construction, assign_signs, build, default_stage_count, stage_measure
from .corona import (StageIndex, _difference, average, corona, delta_regions, maximal_on_support, sigma,
                     sigma_lower_bound, verify_corona)
from .dyadic import DyadicInterval, rat_str
from .energy import (EnergyReport, derandomize_signs, energy_report, expectation_energy,
                     exhaustive_energies, unit_outputs)
from .haar import apply_block, block_coefficients, block_from_coefficients, haar_ratio, level_set, xi
from .grid import StageGrid, level_set_mass, profile
from .steps import ZERO, StepFunction, StepMeasure

Interval = tuple[Fraction, Fraction]


def _encode(value: Any) -> Any:
    if isinstance(value, bool) or value is None:
        return value
    if isinstance(value, (Fraction, int)):
        return rat_str(value) if isinstance(value, Fraction) else value
    if isinstance(value, DyadicInterval):
        return [rat_str(value.lo), rat_str(value.hi)]
    if isinstance(value, (list, tuple)):
        return [_encode(v) for v in value]
    return str(value)


@dataclass
class Certificate:
    name: str
    params: dict
    witnesses: list[tuple[str, Any]] = field(default_factory=list)
    verdict: bool = True
    runtime_ms: int | None = None
    failures: list[str] = field(default_factory=list)

    def witness(self, label: str, value: Any) -> None:
        self.witnesses.append((label, value))

    def require(self, label: str, ok: bool, detail: str = "") -> bool:
        """Record a conjunct of the verdict."""
        if not ok:
            self.verdict = False
            self.failures.append(f"{label}: {detail}" if detail else label)
        return ok

    def require_eq(self, label: str, got: Fraction, expected: Fraction) -> bool:
        self.witness(label, got)
        return self.require(label, got == expected, f"{got} != {expected}")

    def require_ge(self, label: str, big: Fraction, small: Fraction) -> bool:
        self.witness(label, [big, small])
        return self.require(label, big >= small, f"{big} < {small}")

    def to_json(self, timings: bool = True) -> dict:
        return {
            "name": self.name,
            "params": self.params,
            "witnesses": [{"label": lab, "value": _encode(v)} for lab, v in self.witnesses],
            "verdict": "pass" if self.verdict else "fail",
            "failures": self.failures,
            "runtime_ms": self.runtime_ms if timings else None,
        }


def _timed(fn: Callable[..., Certificate]) -> Callable[..., Certificate]:
    def wrapper(*args, **kwargs):
        start = time.perf_counter()
        cert = fn(*args, **kwargs)
        cert.runtime_ms = int((time.perf_counter() - start) * 1000)
        return cert

    wrapper.__name__ = fn.__name__
    wrapper.__doc__ = fn.__doc__
    return wrapper


def _params(c: Construction | None = None, **extra) -> dict:
    p: dict[str, Any] = {}
    if c is not None:
        p.update(k=c.k, stages=c.stages, signs=c.sign_mode)
    for key, v in extra.items():
        p[key] = _encode(v)
    return p


def _model(J: DyadicInterval, lam: Fraction) -> StepMeasure:
    from .construction import model_measure

    return model_measure(J, lam)


# -- single-block lemmas -----------------------------------------------------

@_timed
def check_haar_identity(J: DyadicInterval, lam: Fraction | int, k: int) -> Certificate:
    """Every chain member of ``J`` has Haar ratio ``λ/3`` under the model measure."""
    lam = Fraction(lam)
    cert = Certificate("haar_identity", _params(J=J, lam=lam, k=k))
    mu = _model(J, lam)
    for i, I in enumerate(xi(J, k).chain):
        cert.require_eq(f"c(I_{i}) for {I}", haar_ratio(mu, I), lam / 3)
    return cert


@_timed
def check_dist_estimate(J: DyadicInterval, lam: Fraction | int, k: int) -> Certificate:
    """Level set of the model block is ``I(J)-`` with mass ``2^-4k μ(J)/4``."""
    lam = Fraction(lam)
    cert = Certificate("dist_estimate", _params(J=J, lam=lam, k=k))
    mu = _model(J, lam)
    S = apply_block(J, k, 1, mu)
    threshold = k * mu.total_mass / J.length
    ls = level_set(S, threshold)
    term = xi(J, k).terminal
    cert.witness("threshold", threshold)
    cert.witness("level set", ls)
    cert.require("level set is I(J)-", ls == [(term.lo, term.mid)], f"{ls}")
    ls_mass = sum((mu.mass(a, b) for a, b in ls), ZERO)
    cert.require_eq("level-set mass", ls_mass, mu.total_mass / (4 * 16**k))
    cert.require_eq("mass as lambda |J| 2^-4k / 6", ls_mass, lam * J.length / (6 * 16**k))
    plateau = {abs(v) for lo, hi, v in S.pieces if term.lo <= lo and hi <= term.mid}
    cert.witness("plateau |S mu| on I(J)-", sorted(plateau))
    cert.require("plateau equals (2k+1) lambda / 3", plateau == {(2 * k + 1) * lam / 3}, f"{plateau}")
    return cert


# -- stage-to-stage invariants -------------------------------------------------

def _laminar_violations(c: Construction, upto: int) -> tuple[int, list[str]]:
    """Exhaustive overlap check between terminals ``I(L)`` and stopping intervals.

    Dyadic intervals are nested or disjoint, so one sweep in (left end, size)
    order finds, for every interval, the smallest one containing it.
    """
    nodes = [nd for nd in c.nodes if nd.stage <= upto]
    depth = max(xi(nd.interval, c.k).terminal.n for nd in nodes)
    items = []
    for nd in nodes:
        L = nd.interval
        T = xi(L, c.k).terminal
        items.append((L.m << (depth - L.n), L.n, 0, nd.index))
        items.append((T.m << (depth - T.n), T.n, 1, nd.index))
    items.sort()
    problems = []
    stack: list[tuple[int, int, int, int]] = []  # (hi, kind, owner, n)
    for lo, n, kind, owner in items:
        hi = lo + (1 << (depth - n))
        while stack and stack[-1][0] <= lo:
            stack.pop()
        if stack:
            _, top_kind, top_owner, _ = stack[-1]
            if kind == 1 and not (top_kind == 0 and top_owner == owner):
                problems.append(f"I(L) of node {owner} meets {'I(L)' if top_kind else 'stopping interval'} of node {top_owner}")
            if kind == 0 and top_kind == 1:
                problems.append(f"stopping interval of node {owner} sits inside I(L) of node {top_owner}")
        stack.append((hi, kind, owner, n))
    return len(items), problems


@_timed
def check_measure_preserving(c: Construction, j: int, grid: StageGrid | None = None) -> Certificate:
    """Seven exact invariants linking ``μ_j`` and ``μ_(j+1)``.

    children length: each stage-``j`` node's children cover ``(1-2^-4k)|L|/6``,
    certified as an equality per node and summed over the stage.
    terminal disjointness: each ``I(L)`` meets no other stopping interval or terminal.
    unchanged outside: off the stage-``j`` intervals the two measures agree.
    right-child masses: ``μ_(j+1)(I) = μ_(j+1)(I--) = μ_j(I)`` on every right chain child.
    node profile, total mass, level-set mass: compared for every node of stage ``<= j``; the
    node's chain profile (masses between consecutive chain breakpoints) must
    agree, and its level-set mass is recomputed under both measures.
    Pass a shared ``grid`` when checking many ``j`` on one construction.
    """
    if not 0 <= j < c.stages:
        raise ValueError(f"need 0 <= j < stages, got j={j}, stages={c.stages}")
    k = c.k
    grid = grid or StageGrid(c)
    cert = Certificate("measure_preserving", _params(c, j=j))
    mu0, mu1 = grid.measure(j), grid.measure(j + 1)
    a, b = (1 << 4 * k) - 1, 1 << 4 * k  # 1 - 2^-4k = a / b
    stage_j = [nd for nd in c.nodes if nd.stage == j]

    # children length
    bad = 0
    for nd in stage_j:
        n = nd.interval.n
        top = max((ch.interval.n for ch in nd.children), default=n)
        got = sum(1 << (top - ch.interval.n) for ch in nd.children)
        if 6 * b * got != a << (top - n):
            bad += 1
    cert.require("children length per node = (1-2^-4k)|L|/6", bad == 0, f"{bad} nodes")
    for s in (j, j + 1):
        total = sum((nd.interval.length for nd in c.nodes if nd.stage == s), ZERO)
        cert.require_eq(f"children length: sum |L| over stage {s}", total, Fraction(a, b) ** s / 6**s)

    # terminal disjointness
    checked, problems = _laminar_violations(c, j + 1)
    cert.witness("terminal disjointness: intervals swept", checked)
    cert.require("terminal disjointness: I(L) disjoint from other stopping intervals and terminals",
                 not problems, "; ".join(problems[:3]))

    # unchanged outside the stage
    holes = [(grid.point(nd.interval.m, nd.interval.n), grid.point(nd.interval.m + 1, nd.interval.n))
             for nd in stage_j]
    outside0, outside1 = mu0.blocks_outside(holes), mu1.blocks_outside(holes)
    cert.witness("unchanged outside: blocks outside the stage", len(outside0))
    cert.require("unchanged outside: mu_(j+1) = mu_j off the stage-j intervals", outside0 == outside1)

    # right-child masses
    bad = 0
    for pos, nd in enumerate(stage_j):
        for I in xi(nd.interval, k).plus:
            lo, hi = grid.point(I.m, I.n), grid.point(I.m + 1, I.n)
            ll_hi = grid.point(4 * I.m + 1, I.n + 2)
            x, y, z = mu1.mass(lo, hi), mu1.mass(lo, ll_hi), mu0.mass(lo, hi)
            bad += not x == y == z
            if pos == 0:
                cert.witness(f"right-child masses: mu_(j+1)({I}), mu_(j+1)({I.left.left}), mu_j({I})",
                             [grid.to_fraction(v) for v in (x, y, z)])
    cert.require("right-child masses: mu_(j+1)(I) = mu_(j+1)(I--) = mu_j(I)", bad == 0, f"{bad} intervals")

    # node profiles
    bad_profile = bad_level = 0
    n_nodes = 0
    for nd in c.nodes:
        if nd.stage > j:
            continue
        n_nodes += 1
        L = nd.interval
        bad_profile += profile(mu0, L) != profile(mu1, L)
        bad_level += level_set_mass(mu0, L, k)[0] != level_set_mass(mu1, L, k)[0]
    cert.witness("node profile: nodes compared", n_nodes)
    cert.require("node profile: mu(L), mu(I(L)) and Haar ratios on the chain unchanged",
                 bad_profile == 0, f"{bad_profile} nodes")
    cert.require("node profile: level-set mass unchanged", bad_level == 0, f"{bad_level} nodes")

    cert.require_eq("total mass of mu_j", grid.to_fraction(mu0.total), Fraction(2, 3))
    cert.require_eq("total mass of mu_(j+1)", grid.to_fraction(mu1.total), Fraction(2, 3))
    return cert


# -- main estimate -------------------------------------------------------------

def main_estimate_closed_form(k: int, stages: int) -> Fraction:
    q = 1 - Fraction(1, 16**k)
    return (1 - q ** (stages + 1)) / 6


def level_set_masses(c: Construction, stages: int | None = None,
                     grid: StageGrid | None = None) -> tuple[list[Fraction], int]:
    """Per-stage sums of ``w({|S_L w| > k w(L)/|L|})`` for ``w = μ_stages``.

    Also returns how many level sets are exactly ``I(L)-``. ``stages``
    defaults to the full construction; a smaller value evaluates the
    truncated construction on the same forest.
    """
    stages = c.stages if stages is None else stages
    grid = grid or StageGrid(c)
    mu = grid.measure(stages)
    per_stage = [0] * (stages + 1)
    exact = 0
    for nd in c.nodes:
        if nd.stage > stages:
            continue
        got, is_terminal = level_set_mass(mu, nd.interval, c.k)
        per_stage[nd.stage] += got
        exact += is_terminal
    return [grid.to_fraction(v) for v in per_stage], exact


@_timed
def check_main_estimate(c: Construction, stages: int | None = None,
                        grid: StageGrid | None = None) -> Certificate:
    """Sum of level-set masses equals ``(1 - (1-2^-4k)^(M'+1)) / 6``.

    ``M'`` is ``stages`` (default: all of ``c``). At the default stage count
    the sum is also certified to exceed ``w([0,1))/6``.
    """
    M = c.stages if stages is None else stages
    if not 0 <= M <= c.stages:
        raise ValueError(f"stages must lie in 0..{c.stages}")
    cert = Certificate("main_estimate", _params(c, M=M))
    grid = grid or StageGrid(c)
    per_stage, exact = level_set_masses(c, M, grid)
    n_nodes = sum(1 for nd in c.nodes if nd.stage <= M)
    total = sum(per_stage, ZERO)
    cert.witness("per-stage sums", per_stage)
    cert.require("every level set is I(L)-", exact == n_nodes, f"{exact}/{n_nodes}")
    cert.require_eq("sum of level-set masses", total, main_estimate_closed_form(c.k, M))
    if M == default_stage_count(c.k):
        w_total = grid.to_fraction(grid.measure(M).total)
        cert.witness("(1/6) w([0,1))", w_total / 6)
        cert.require("sum > (1/6) w([0,1))", total > w_total / 6, f"{total}")
    return cert


# -- corona ------------------------------------------------------------------------

@_timed
def check_corona_match(c: Construction) -> Certificate:
    """Generic stopping-time corona of ``w`` equals the constructed forest, stage by stage."""
    cert = Certificate("corona_match", _params(c))
    forest = corona(c.weight)
    got = [sorted(s, key=DyadicInterval.sort_key) for s in forest.stage_intervals()]
    want = [sorted(s, key=DyadicInterval.sort_key) for s in c.stage_intervals()]
    cert.witness("corona stage sizes", [len(s) for s in got])
    cert.witness("constructed stage sizes", [len(s) for s in want])
    cert.require("stage-by-stage set equality", got == want)
    cert.witness("intervals matched", sum(len(s) for s in got) if got == want else 0)
    problems = verify_corona(c.weight, forest)
    cert.require("stopping conditions re-verified", not problems, "; ".join(problems[:3]))

    bad = 0
    for l in range(1, c.stages + 1):
        mu = stage_measure(c, l)
        for nd in c.nodes:
            if nd.stage != l - 1:
                continue
            t = 4 * average(mu, nd.interval)
            for I in xi(nd.interval, c.k).plus:
                ll = I.left.left
                d_ll = average(mu, ll)
                ok = (
                    mu.mass(I.mid, I.hi) == 0
                    and average(mu, I.left) < t
                    and mu.mass(I.left.mid, I.left.hi) == 0
                    and d_ll >= t
                    and mu.max_height(ll.lo, ll.hi) < 4 * d_ll
                )
                bad += not ok
    cert.require("density relations on every I in Xi_L+", bad == 0, f"{bad} intervals")
    return cert


# -- maximal function -------------------------------------------------------------

def _pieces_in(Mw: StepFunction, region: Iterable[Interval]):
    los = [p[0] for p in Mw.pieces]
    from bisect import bisect_right

    for a, b in region:
        i = max(bisect_right(los, a) - 1, 0)
        while i < len(Mw.pieces) and Mw.pieces[i][0] < b:
            lo, hi, v = Mw.pieces[i]
            if hi > a:
                yield lo, hi, v
            i += 1


@_timed
def check_maximal_bounds(c: Construction) -> Certificate:
    """``4^(l-1) dens(L) <= Mw <= 8^l dens(L)`` on ``supp(w) ∩ Δ_l L`` and ``σ``
    lower bounds, for every corona node ``L``.

    The stated ``4^l`` lower bound is evaluated and reported, not asserted.
    """
    cert = Certificate("maximal_bounds", _params(c))
    w = c.weight
    Mw = maximal_on_support(w)
    sig = sigma(w, Mw)
    forest = corona(w)
    idx = StageIndex(forest)
    top = w.total_mass
    cert.witness("ancestor of [0,1) average w([0,1))/2 <= w([0,1))", [top / 2, top])
    cert.require("ancestors of [0,1) are dominated", top / 2 <= top)
    up_bad = low_bad = strict_bad = 0
    four_l_fail = 0
    first = None
    count = 0
    for node in forest.nodes():
        L = node.interval
        dens = node.density
        for reg in delta_regions(L, idx):
            l = reg.level
            for lo, hi, v in _pieces_in(Mw, reg.region):
                count += 1
                if first is None:
                    first = (L, l, v, dens)
                up_bad += v > 8**l * dens
                low_bad += v < 4 ** (l - 1) * dens
                strict_bad += not v < 4 * 6 ** (l - 1) * dens
                four_l_fail += v < 4**l * dens
        lb = sigma_lower_bound(w, idx, L)
        s_mass = sig.mass(L.lo, L.hi)
        if not lb <= s_mass:
            cert.require(f"sigma lower bound on {L}", False, f"{lb} > {s_mass}")
    if first:
        L, l, v, dens = first
        cert.witness(f"Mw on Delta_{l} {L}, 8^l dens, 4^(l-1) dens", [v, 8**l * dens, 4 ** (l - 1) * dens])
    cert.witness("Mw pieces checked", count)
    cert.require("Mw <= 8^l w(L)/|L|", up_bad == 0, f"{up_bad} pieces")
    cert.require("Mw >= 4^(l-1) w(L)/|L|", low_bad == 0, f"{low_bad} pieces")
    cert.witness("pieces with Mw >= 4 6^(l-1) w(L)/|L| (sharper bound broken)", strict_bad)
    cert.witness("pieces where Mw < 4^l w(L)/|L| (reported, not asserted)", four_l_fail)
    cert.witness("sigma lower bounds checked", len(forest.nodes()))
    cert.witness("sigma([0,1))", sig.total_mass)
    cert.witness("sigma lower bound on [0,1)", sigma_lower_bound(w, idx, DyadicInterval.unit()))
    return cert


# -- energy chain --------------------------------------------------------------------

def main_lemma_report(k: int, stages: int | str, *, signs: str = "derandomized",
                      seed: int | None = None, node_cap: int | None = None,
                      c: Construction | None = None) -> tuple[EnergyReport, Certificate]:
    """Energy chain ``achieved >= expectation >= Chebyshev >= (k^2/64) Σ w(Δ_1 E_L)``.

    ``E_L`` is the level set of node ``L``; the final sum is compared with the
    closed form of the main estimate scaled by ``k^2/64``.
    """
    start = time.perf_counter()
    if c is None:
        c = build(k, stages) if node_cap is None else build(k, stages, node_cap)
    w = c.weight
    Mw = maximal_on_support(w)
    sig = sigma(w, Mw)
    outputs = unit_outputs(c)
    if signs == "derandomized":
        c, report = derandomize_signs(c, sig, outputs)
    else:
        c = assign_signs(c, signs, seed=seed)
        report = energy_report(c, sig, outputs)

    idx = StageIndex(c)
    cheb = ZERO
    delta_sum = ZERO
    ls_sum = ZERO
    for nd in c.nodes:
        L = nd.interval
        dens = average(w, L)
        f = outputs[nd.index]
        ls = level_set(f, c.k * dens)
        cheb += (c.k * dens) ** 2 * sum((sig.mass(a, b) for a, b in ls), ZERO)
        holes = [(iv.lo, iv.hi) for a, b in ls for iv in idx.inside_span(a, b, nd.stage + 1)]
        region = _difference(ls, holes)
        delta_sum += sum((w.mass(a, b) for a, b in region), ZERO)
        ls_sum += sum((w.mass(a, b) for a, b in ls), ZERO)
    k2 = Fraction(c.k**2, 64)
    link_delta = k2 * delta_sum
    link_ls = k2 * ls_sum

    cert = Certificate("main_lemma", _params(c))
    cert.require_ge("achieved >= expectation", report.achieved_energy, report.expectation_energy)
    cert.require_ge("expectation >= sum (k w(L)/|L|)^2 sigma(E_L)", report.expectation_energy, cheb)
    cert.require_ge("Chebyshev link >= (k^2/64) sum w(Delta_1 E_L)", cheb, link_delta)
    cert.require_eq("(k^2/64) sum w(Delta_1 E_L) = (k^2/64) sum w(E_L)", link_delta, link_ls)
    closed = k2 * main_estimate_closed_form(c.k, c.stages)
    cert.require_eq("(k^2/64) sum w(E_L) = (k^2/64)(1-(1-2^-4k)^(M'+1))/6", link_ls, closed)
    if c.stages == default_stage_count(c.k):
        cert.require("final link > (k^2/64) w([0,1))/6", link_ls > k2 * w.total_mass / 6)
    constant = link_ls / (c.k**2 * w.total_mass)
    cert.witness("explicit constant C = final link / (k^2 w([0,1)))", constant)
    cert.witness("ratio achieved / (k^2 w([0,1)))", report.ratio)
    cert.runtime_ms = int((time.perf_counter() - start) * 1000)
    return report, cert


@_timed
def check_sign_oracle(c: Construction) -> Certificate:
    """Exhaustive signs: expectation equals the mean, derandomized reaches it."""
    cert = Certificate("sign_oracle", _params(c))
    sig = sigma(c.weight)
    outputs = unit_outputs(c)
    energies = exhaustive_energies(c, sig, outputs, max_nodes=7)
    mean = sum(energies, ZERO) / len(energies)
    expected = expectation_energy(c, sig, outputs)
    _, report = derandomize_signs(c, sig, outputs)
    cert.witness("sign patterns", len(energies))
    cert.require_eq("expectation = exhaustive mean", expected, mean)
    cert.require_ge("derandomized >= mean", report.achieved_energy, mean)
    cert.witness("exhaustive maximum", max(energies))
    return cert
