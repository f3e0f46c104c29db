"""Command line front end: build, verify, energy and export.

Exit codes: 0 when every certificate passes, 1 when any fails, 2 on usage or
resource errors (a JSON error object is written to stderr).
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Sequence

from .certify import (Certificate, check_corona_match, check_dist_estimate, check_haar_identity,
                      check_main_estimate, check_maximal_bounds, check_measure_preserving,
                      check_sign_oracle, main_lemma_report)
from .construction import (DEFAULT_NODE_CAP, Construction, ResourceCapError, assign_signs, build,
                           node_count)
from .corona import InfiniteCoronaError, UnsupportedGeometryError, corona, maximal_on_support, sigma
from .dyadic import rat_str
from .energy import derandomize_signs
from .figures import export_figure_data
from .grid import StageGrid

CHECKS = (
    "haar_identity", "dist_estimate", "measure_preserving", "main_estimate",
    "corona_match", "maximal_bounds", "main_lemma", "sign_oracle",
)
WORKERS_ENV = "DYADIC_MW_WORKERS"


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message: str):  # noqa: D401 - argparse hook
        raise UsageError(message)


def _stages(text: str) -> int | str:
    if text == "auto":
        return text
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected an integer or 'auto', got {text!r}")
    if value < 0:
        raise argparse.ArgumentTypeError("stages must be nonnegative")
    return value


def _positive(text: str) -> int:
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError("expected a positive integer")
    return value


def _check_list(text: str) -> list[str]:
    if text == "all":
        return list(CHECKS)
    names = [t.strip() for t in text.split(",") if t.strip()]
    unknown = [n for n in names if n not in CHECKS]
    if unknown or not names:
        raise argparse.ArgumentTypeError(f"unknown checks {unknown}; choose from {', '.join(CHECKS)} or all")
    return names


def make_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="dyadic-mw", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common(p: argparse.ArgumentParser, signs: str, formats: Sequence[str]) -> None:
        p.add_argument("--k", type=_positive, default=1, help="chain half-length k (default 1)")
        p.add_argument("--stages", type=_stages, default="auto", help="number of rounds or 'auto'")
        p.add_argument("--seed", type=int, default=None, help="seed for --signs random")
        p.add_argument("--signs", choices=("plus", "random", "derandomized"), default=signs)
        p.add_argument("--format", choices=formats, default=formats[0])
        p.add_argument("--out", default=None, help="write output here instead of stdout")
        p.add_argument("--node-cap", type=_positive, default=DEFAULT_NODE_CAP)

    p = sub.add_parser("build", help="build the construction and print its forest")
    common(p, "plus", ("json", "csv", "text"))

    p = sub.add_parser("verify", help="run certificate checks")
    common(p, "derandomized", ("json", "text"))
    p.add_argument("--checks", type=_check_list, default=list(CHECKS), help="comma list or 'all'")
    p.add_argument("--timings", action="store_true", help="include runtime_ms (output no longer reproducible)")

    p = sub.add_parser("energy", help="energy report for the chosen signs")
    common(p, "derandomized", ("json", "text"))
    p.add_argument("--growth", type=_positive, default=None, metavar="K",
                   help="table for k = 1..K at the given stage count")

    p = sub.add_parser("export", help="export weight, forest, corona, Mw, sigma or figure data")
    common(p, "plus", ("json", "csv"))
    p.add_argument("--what", choices=("weight", "forest", "corona", "maximal", "sigma", "figure"),
                   default="weight")
    p.add_argument("--stage", type=int, default=None, help="stage for --what figure (default: last)")
    return parser


def _construct(args) -> Construction:
    c = build(args.k, args.stages, args.node_cap)
    if args.signs == "random":
        c = assign_signs(c, "random", seed=args.seed)
    return c


def _signed(c: Construction, args) -> Construction:
    if args.signs == "derandomized":
        c, _ = derandomize_signs(c)
    return c


def _check_plan(c: Construction, names: list[str], args) -> list[Callable[[], Certificate]]:
    plan: list[Callable[[], Certificate]] = []
    stage_heads = []
    seen = set()
    for nd in c.nodes:
        if nd.stage not in seen:
            seen.add(nd.stage)
            stage_heads.append(nd)
    stage_heads.sort(key=lambda nd: nd.stage)
    grid = None
    if "measure_preserving" in names or "main_estimate" in names:
        grid = StageGrid(c)
    for name in names:
        if name in ("haar_identity", "dist_estimate"):
            fn = check_haar_identity if name == "haar_identity" else check_dist_estimate
            for nd in stage_heads:
                plan.append(lambda fn=fn, nd=nd: fn(nd.interval, 6**nd.stage, c.k))
        elif name == "measure_preserving":
            for j in range(c.stages):
                plan.append(lambda j=j: check_measure_preserving(c, j, grid))
        elif name == "main_estimate":
            plan.append(lambda: check_main_estimate(c, None, grid))
        elif name == "corona_match":
            plan.append(lambda: check_corona_match(c))
        elif name == "maximal_bounds":
            plan.append(lambda: check_maximal_bounds(c))
        elif name == "main_lemma":
            plan.append(lambda: main_lemma_report(c.k, c.stages, signs=args.signs, seed=args.seed, c=c)[1])
        elif name == "sign_oracle":
            small = c.stages
            while node_count(c.k, small) > 7:
                small -= 1
            if small >= 0:
                plan.append(lambda s=small: check_sign_oracle(build(c.k, s)))
    return plan


def _run(plan: list[Callable[[], Certificate]]) -> list[Certificate]:
    workers = int(os.environ.get(WORKERS_ENV, "1") or "1")
    if workers <= 1:
        return [task() for task in plan]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(lambda task: task(), plan))


def _text_table(rows: list[list[str]]) -> str:
    widths = [max(len(r[i]) for r in rows) for i in range(len(rows[0]))]
    return "\n".join("  ".join(cell.ljust(w) for cell, w in zip(r, widths)).rstrip() for r in rows) + "\n"


def _emit(text: str, out: str | None) -> None:
    if out:
        with open(out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _dump(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=False) + "\n"


def cmd_build(args) -> int:
    c = _signed(_construct(args), args)
    if args.format == "csv":
        _emit(c.weight.to_csv(), args.out)
    elif args.format == "text":
        rows = [["stage", "nodes", "sum |L|"]]
        for s, ivs in enumerate(c.stage_intervals()):
            rows.append([str(s), str(len(ivs)), rat_str(sum((iv.length for iv in ivs), 0))])
        head = f"k={c.k} stages={c.stages} nodes={len(c.nodes)} blocks={len(c.weight.blocks)} " \
               f"total mass={rat_str(c.weight.total_mass)}\n"
        _emit(head + _text_table(rows), args.out)
    else:
        _emit(_dump(c.to_json()), args.out)
    return 0


def cmd_verify(args) -> int:
    c = _signed(_construct(args), args)
    certs = _run(_check_plan(c, args.checks, args))
    for cert in certs:
        cert.params.setdefault("seed", args.seed)
    if args.format == "text":
        rows = [["check", "params", "verdict", "runtime_ms"]]
        for cert in certs:
            params = " ".join(f"{k}={v}" for k, v in cert.params.items() if v is not None)
            ms = str(cert.runtime_ms) if args.timings else "-"
            rows.append([cert.name, params, "pass" if cert.verdict else "FAIL", ms])
        _emit(_text_table(rows), args.out)
    else:
        _emit(_dump([cert.to_json(timings=args.timings) for cert in certs]), args.out)
    return 0 if all(cert.verdict for cert in certs) else 1


def cmd_energy(args) -> int:
    ks = range(1, args.growth + 1) if args.growth else [args.k]
    reports, ok = [], True
    for k in ks:
        report, cert = main_lemma_report(k, args.stages, signs=args.signs, seed=args.seed,
                                         node_cap=args.node_cap)
        ok &= cert.verdict
        row = report.to_json()
        row["chain_verdict"] = "pass" if cert.verdict else "fail"
        reports.append(row)
    if args.format == "text":
        rows = [["k", "stages", "signs", "expectation", "achieved", "ratio", "ratio ~", "chain"]]
        for r in reports:
            num, _, den = r["ratio"].partition("/")
            rows.append([str(r["k"]), str(r["stages"]), r["sign_mode"], r["expectation_energy"],
                         r["achieved_energy"], r["ratio"], f"{int(num) / int(den or 1):.6f}",
                         r["chain_verdict"]])
        _emit(_text_table(rows), args.out)
    else:
        _emit(_dump(reports if args.growth else reports[0]), args.out)
    return 0 if ok else 1


def cmd_export(args) -> int:
    c = _signed(_construct(args), args)
    what, fmt = args.what, args.format
    if what == "weight":
        obj = c.weight
    elif what == "forest":
        if fmt == "csv":
            raise UsageError("forest export is JSON only")
        _emit(_dump(c.to_json()), args.out)
        return 0
    elif what == "corona":
        if fmt == "csv":
            raise UsageError("corona export is JSON only")
        _emit(_dump(corona(c.weight).to_json()), args.out)
        return 0
    elif what == "maximal":
        obj = maximal_on_support(c.weight)
    elif what == "sigma":
        obj = sigma(c.weight)
    else:
        stage = c.stages if args.stage is None else args.stage
        try:
            obj = export_figure_data(c, stage)
        except ValueError as exc:
            raise UsageError(str(exc))
    _emit(obj.to_csv() if fmt == "csv" else _dump(obj.to_json()), args.out)
    return 0


def _error(kind: str, message: str, **extra) -> int:
    payload = {"error": kind, "message": message, **extra}
    sys.stderr.write(json.dumps(payload) + "\n")
    return 2


def cli_main(argv: Sequence[str] | None = None) -> int:
    parser = make_parser()
    try:
        args = parser.parse_args(argv)
        handler = {"build": cmd_build, "verify": cmd_verify, "energy": cmd_energy, "export": cmd_export}
        return handler[args.command](args)
    except UsageError as exc:
        return _error("usage", str(exc), usage=parser.format_usage().strip())
    except ResourceCapError as exc:
        return _error("resource_cap", str(exc), required=str(exc.required), cap=exc.cap,
                      k=exc.k, stages=exc.stages)
    except (UnsupportedGeometryError, InfiniteCoronaError) as exc:
        return _error("geometry", str(exc))
    except OSError as exc:
        return _error("io", str(exc))


def main() -> None:
    sys.exit(cli_main())
