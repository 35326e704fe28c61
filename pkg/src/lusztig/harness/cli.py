"""Command line entry point: ``lusztig <command> ...`` (or ``python3 -m lusztig``)."""

from __future__ import annotations

import argparse
import logging
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

from .. import __version__
from ..cache import CoefficientCache
from ..chevalley import InvalidForPrime, OrbitTooLarge
from ..coxeter import enumerate_group, parse_datum
from ..counting import FitError, PointCountSeries, count_table_csv, fit_polynomial, fits_to_json
from ..hecke import hecke_table_csv, kawanaka_table
from .config import SUITES, ScenarioError, load_config, with_overrides
from .report import EXIT_FAIL, EXIT_OK, emit_report, merge_reports
from .suites import Context, _all_automorphisms, run_scenario

log = logging.getLogger("lusztig")

QUANTITIES = ("unipotent", "lusztig", "class", "geometric", "centralizer")


def _common() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="scenario file (INI); default: built-in presets")
    common.add_argument("--primes", help="override scenario primes, e.g. 2,3,5")
    common.add_argument("--cap", type=int, help="override orbit and flag caps")
    common.add_argument("--jobs", type=int, default=1, help="scenarios run in parallel processes")
    common.add_argument("--cache-dir", help="Hecke coefficient cache (else $LUSZTIG_CACHE_DIR)")
    common.add_argument("--format", choices=("json", "csv", "text"), default="text")
    common.add_argument("--output", "-o", help="write to this file instead of stdout")
    common.add_argument("--scenario", "-s", action="append", help="scenario id (repeatable)")
    common.add_argument("-v", "--verbose", action="store_true")
    return common


def build_parser() -> argparse.ArgumentParser:
    common = _common()
    parser = argparse.ArgumentParser(prog="lusztig", description=__doc__)
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("hecke-table", parents=[common], help="CSV of Hecke coefficients for a type")
    p.add_argument("type", help="Coxeter type, e.g. A2, B3, D4")
    p.add_argument("--delta", help="diagram automorphism (id, flip, swap13, ...); default: all")

    p = sub.add_parser("count", parents=[common], help="count table (CSV) for one scenario")
    p.add_argument("quantity", choices=QUANTITIES)

    p = sub.add_parser("fit", parents=[common], help="fit count series (JSON)")
    p.add_argument("quantity", choices=QUANTITIES)
    p.add_argument("--degree-bound", type=int, help="default: number of primes minus 2")

    p = sub.add_parser("verify", parents=[common], help="run one suite")
    p.add_argument("suite", choices=SUITES)

    sub.add_parser("report", parents=[common], help="run every suite of the selected scenarios")
    return parser


def _write(args, data: bytes | str) -> None:
    if isinstance(data, str):
        data = data.encode()
    if args.output:
        Path(args.output).write_bytes(data)
    else:
        sys.stdout.buffer.write(data)
        sys.stdout.flush()


def _scenarios(args, suite: str | None = None):
    scenarios = load_config(args.config)
    if args.scenario:
        by_id = {s.id: s for s in scenarios}
        missing = [x for x in args.scenario if x not in by_id]
        if missing:
            raise ScenarioError(f"unknown scenario(s) {missing}; known: {', '.join(by_id)}")
        scenarios = [by_id[x] for x in args.scenario]
    if suite is not None:
        scenarios = [s for s in scenarios if suite in s.suites]
    primes = [int(x) for x in args.primes.replace(",", " ").split()] if args.primes else None
    return [with_overrides(s, primes, args.cap) for s in scenarios]


def _run_one(job):
    scenario, suites, cache_dir = job
    return run_scenario(scenario, CoefficientCache.from_env(cache_dir), suites)


def run_all(scenarios, suites=None, jobs: int = 1, cache_dir=None):
    work = [(s, suites, cache_dir) for s in scenarios]
    if jobs > 1 and len(work) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            reports = list(pool.map(_run_one, work))
    else:
        reports = [_run_one(job) for job in work]
    return merge_reports(reports, __version__)


def _single(args):
    scenarios = _scenarios(args)
    if len(scenarios) != 1:
        raise ScenarioError("select exactly one scenario with --scenario")
    return scenarios[0]


def _series(ctx: Context, quantity: str) -> dict[str, PointCountSeries]:
    """Series keyed by 'quantity|w|w_prime|orbit'."""
    s = ctx.s
    out: dict[str, PointCountSeries] = {}

    def add(key, p, value):
        out.setdefault(key, PointCountSeries(s.id, key)).add(p, value)

    orbit_level = quantity == "class"
    for p in ctx.primes(orbit_level):
        try:
            if quantity == "unipotent":
                for wp in enumerate_group(s.datum):
                    counts = ctx.unipotent(p, wp)
                    for w in s.weyl_elements():
                        add(f"unipotent|{w}|{wp}|", p, counts[w])
            elif quantity == "lusztig":
                for i in range(len(ctx.reps(p))):
                    counts = ctx.lusztig(p, i)
                    for w in s.weyl_elements():
                        add(f"lusztig|{w}||{i}", p, counts[w])
            elif quantity == "class":
                from ..counting import class_cell_counts
                for i in range(len(ctx.reps(p))):
                    counts = class_cell_counts(ctx.orbit(p, i))
                    for w in s.weyl_elements():
                        add(f"class|{w}||{i}", p, counts[w])
            elif quantity == "geometric":
                counts = ctx.geometric(p)
                for w in s.weyl_elements():
                    add(f"geometric|{w}||", p, counts[w])
            else:
                add("centralizer|||0", p, ctx.centralizer(p))
        except (OrbitTooLarge, InvalidForPrime) as exc:
            log.warning("%s: p=%d skipped: %s", s.id, p, exc)
    return out


def cmd_hecke_table(args) -> int:
    datum = parse_datum(args.type)
    cache = CoefficientCache.from_env(args.cache_dir)
    deltas = _all_automorphisms(datum)
    if args.delta:
        deltas = [d for d in deltas if d.name == args.delta]
        if not deltas:
            raise ScenarioError(f"{datum} has no automorphism {args.delta!r}")
    _write(args, hecke_table_csv((d, kawanaka_table(datum, d, cache)) for d in deltas))
    return EXIT_OK


def cmd_count(args) -> int:
    s = _single(args)
    ctx = Context(s, CoefficientCache.from_env(args.cache_dir))
    rows = []
    for key, series in _series(ctx, args.quantity).items():
        quantity, w, wp, orbit = key.split("|")
        label = f"{quantity}[orbit {orbit}]" if orbit and quantity != "centralizer" else quantity
        for p, c in sorted(series.counts.items()):
            rows.append((s.id, label, w, wp, p, c))
    _write(args, count_table_csv(rows))
    return EXIT_OK


def cmd_fit(args) -> int:
    s = _single(args)
    ctx = Context(s, CoefficientCache.from_env(args.cache_dir))
    fits, status = {}, EXIT_OK
    for key, series in _series(ctx, args.quantity).items():
        bound = args.degree_bound if args.degree_bound is not None else len(series.counts) - 2
        try:
            fits[key] = fit_polynomial(series, bound)
        except FitError as exc:
            log.error("%s: %s", key, exc)
            status = EXIT_FAIL
    _write(args, fits_to_json(fits) + "\n")
    return status


def cmd_verify(args) -> int:
    report = run_all(_scenarios(args, args.suite), (args.suite,), args.jobs, args.cache_dir)
    _write(args, emit_report(report, args.format))
    return report.exit_code


def cmd_report(args) -> int:
    report = run_all(_scenarios(args), None, args.jobs, args.cache_dir)
    _write(args, emit_report(report, args.format))
    return report.exit_code


COMMANDS = {
    "hecke-table": cmd_hecke_table,
    "count": cmd_count,
    "fit": cmd_fit,
    "verify": cmd_verify,
    "report": cmd_report,
}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return COMMANDS[args.command](args)
    except ScenarioError as exc:
        print(f"lusztig: {exc}", file=sys.stderr)
        return 2
