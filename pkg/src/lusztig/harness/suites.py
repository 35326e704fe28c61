"""
Verification suites. Each suite turns a scenario into report rows.

Rows carry exact integers (or exact rationals as strings) so a failing row
can be rechecked by hand.
"""

from __future__ import annotations

import logging
import random
import time
from typing import Callable

from .. import __version__
from ..cache import CoefficientCache
from ..chevalley import (
    GroupSpec,
    InvalidForPrime,
    OrbitTooLarge,
    RegularityKind,
    centralizer_order,
    charpoly,
    factor_mod_p,
    fusion_prediction,
    fusion_representatives,
    gl_class_keys,
    group_order,
    is_regular,
    orbit,
    steinberg_representative,
    twisted_regularity,
)
from ..coxeter import (
    CoxeterDatum,
    DiagramAutomorphism,
    enumerate_group,
    parse_datum,
    twisted_support,
)
from ..counting import (
    FitError,
    NotPolynomial,
    PointCountSeries,
    class_cell_counts,
    fit_polynomial,
    geometric_cell_counts,
    kawanaka_check,
    lusztig_counts,
    unipotent_cell_counts,
)
from ..hecke import (
    HeckeElement,
    IntPolynomial,
    dm_sum,
    kawanaka_coefficient,
    specialize,
)
from ..matfq import TwistKind
from .config import Scenario
from .report import FAIL, INFO, PASS, SKIPPED, ReportRow, VerificationReport

log = logging.getLogger(__name__)

ANCHORS = {
    "bridge": "unipotent cell count = [T_w T_{d(w')^-1 w0} : T_{w'^-1 w0}](q) * q^l(w')",
    "cell-partition": "Bruhat cells partition G",
    "unipotent-monic": "U^- cap BwB is irreducible of dimension l(w) when supp_d(w) = S",
    "degree-drop": "dim(w'^-1 U^- d(w') cap BwB) < l(w) + l(w') for w' != 1 when supp_d(w) = S",
    "orbit-identity": "|Y^F| |B^F| |G^F ._d h| = |G^F| |G^F ._d h cap BwB|",
    "orbit-stabilizer": "|G^F ._d h| |Z_{G,d}(h)^F| = |G^F|",
    "fusion": "rational orbits of one geometric class merge under GL_n conjugation",
    "fusion-count": "rational orbits in C^F versus F-classes of the centralizer's component group",
    "lusztig-degree": "Y_{w,h,d} has pure dimension l(w)",
    "class-degree": "C cap BwB has pure dimension dim B + l(w) - dim T^d",
    "centralizer-degree": "regular: dim Z_{G,d}(h) = dim T^d",
    "regularity": "hypothesis: h is d-regular",
    "monic": "leading coefficient b_i of |Y_{w,h_i,d}^F| equals 1 when supp_d(w) = S",
    "orbit-sum": "sum over rational orbits h_i of |G^F ._d h_i cap BwB| = |C^F cap BwB|",
    "steinberg": "every twisted class meets B^-",
    "validity": "template validity at p",
    "associativity": "Hecke algebra multiplication is associative",
    "specialization": "t = 1 recovers the group algebra of W",
    "dm-sum": "sum over w' of [T_w T_{d(w')^-1 w0} : T_{w'^-1 w0}] is monic of degree l(w) when supp_d(w) = S",
}


class Context:
    """Per-scenario memo of elements, orbits and count sweeps shared across suites."""

    def __init__(self, scenario: Scenario, cache: CoefficientCache | None = None):
        self.s = scenario
        self.cache = cache
        self._memo: dict = {}
        self.rows: list[ReportRow] = []

    def memo(self, key, compute: Callable):
        if key not in self._memo:
            try:
                self._memo[key] = (True, compute())
            except (OrbitTooLarge, InvalidForPrime, NotImplementedError, ValueError) as exc:
                self._memo[key] = (False, exc)
        ok, value = self._memo[key]
        if not ok:
            raise value
        return value

    def row(self, suite, check, status, witness=None, detail="", anchor_key=None):
        r = ReportRow(self.s.id, suite, check, ANCHORS[anchor_key or check], status, witness or {}, detail)
        self.rows.append(r)
        return r

    # -- primes ----------------------------------------------------------

    def primes(self, orbit_level: bool = False) -> list[int]:
        candidates = self.s.resolved_orbit_primes() if orbit_level else self.s.resolved_primes()
        if self.s.template is None:
            return list(candidates)
        out = []
        for p in candidates:
            try:
                self.element(p)
                out.append(p)
            except InvalidForPrime:
                continue
        return out

    def element(self, p: int):
        return self.memo(("h", p), lambda: self.s.element(p))

    def skipped_primes(self) -> dict[int, str]:
        out = {}
        if self.s.template is None:
            return out
        for p in sorted(set(self.s.resolved_primes()) | set(self.s.resolved_orbit_primes())):
            try:
                self.element(p)
            except InvalidForPrime as exc:
                out[p] = str(exc)
        return out

    # -- group side ------------------------------------------------------

    def reps(self, p: int):
        return self.memo(("reps", p), lambda: fusion_representatives(self.element(p), self.s.spec(p)))

    def centralizer(self, p: int, i: int = 0) -> int:
        return self.memo(("z", p, i), lambda: centralizer_order(self.reps(p)[i], self.s.spec(p)))

    def orbit_size(self, p: int, i: int = 0) -> int:
        return group_order(self.s.spec(p)) // self.centralizer(p, i)

    def orbit(self, p: int, i: int = 0):
        def compute():
            if self.orbit_size(p, i) > self.s.orbit_cap:
                raise OrbitTooLarge(f"orbit of size {self.orbit_size(p, i)} exceeds cap {self.s.orbit_cap}")
            return orbit(self.reps(p)[i], self.s.spec(p), self.s.orbit_cap)
        return self.memo(("orbit", p, i), compute)

    def lusztig(self, p: int, i: int = 0):
        return self.memo(("Y", p, i), lambda: lusztig_counts(self.s.spec(p), self.reps(p)[i], self.s.flag_cap))

    def geometric(self, p: int):
        return self.memo(("C", p), lambda: geometric_cell_counts(self.s.spec(p), self.element(p)))

    def unipotent(self, p: int, w_prime):
        return self.memo(("U", p, w_prime), lambda: unipotent_cell_counts(self.s.spec(p), w_prime))

    def coefficient(self, w, w_prime, delta) -> IntPolynomial:
        return kawanaka_coefficient(w, w_prime, delta, self.cache)


# -- fitting rows ----------------------------------------------------------------


def _series_witness(series: PointCountSeries) -> list:
    return [[p, c] for p, c in sorted(series.counts.items())]


def fit_row(
    ctx: Context,
    suite: str,
    check: str,
    series: PointCountSeries,
    claimed: int,
    predicate: Callable,
    extra: dict | None = None,
    report_only: bool = False,
    detail: str = "",
):
    """
    Fit with bound claimed + 1 (or as much as the primes allow, never below
    claimed) and judge the fit with ``predicate``. report_only rows never fail.
    """
    witness = dict(extra or {})
    witness["claimed"] = claimed
    witness["series"] = _series_witness(series)
    bound = min(claimed + 1, len(series.counts) - 2)
    if bound < max(claimed, 0):
        status = INFO if report_only else SKIPPED
        return ctx.row(suite, check, status, witness, f"need {claimed + 2} primes, have {len(series.counts)}")
    try:
        fit = fit_polynomial(series, bound)
    except NotPolynomial as exc:
        return ctx.row(suite, check, INFO if report_only else FAIL, witness, str(exc))
    witness.update(
        fit=str(fit), degree=fit.degree, leading=str(fit.leading_coefficient),
        integer=fit.is_integer_coefficients,
    )
    ok = bool(predicate(fit))
    status = INFO if report_only else (PASS if ok else FAIL)
    return ctx.row(suite, check, status, witness, detail)


# -- suites ----------------------------------------------------------------------


def _all_automorphisms(datum: CoxeterDatum) -> list[DiagramAutomorphism]:
    out = [DiagramAutomorphism.identity(datum)]
    if (datum.family == "A" and datum.rank >= 2) or datum.family == "D":
        out.append(DiagramAutomorphism.flip(datum))
    if datum == CoxeterDatum("D", 4):
        out += [DiagramAutomorphism.d4_swap(datum, 1, 3), DiagramAutomorphism.d4_swap(datum, 1, 4)]
    return out


def _random_element(datum, elements, rng: random.Random) -> HeckeElement:
    terms = {}
    for _ in range(rng.randint(1, 3)):
        w = rng.choice(elements)
        terms[w] = IntPolynomial(tuple(rng.randint(-3, 3) for _ in range(rng.randint(1, 3))))
    return HeckeElement(datum, terms)


def suite_hecke_props(ctx: Context) -> None:
    s = ctx.s
    rng = random.Random(s.seed)
    for type_text in s.types:
        datum = parse_datum(type_text)
        elements = enumerate_group(datum)
        bad = 0
        for _ in range(s.triples):
            a, b, c = (_random_element(datum, elements, rng) for _ in range(3))
            if (a * b) * c != a * (b * c):
                bad += 1
        ctx.row("hecke-props", "associativity", FAIL if bad else PASS,
                {"type": str(datum), "triples": s.triples, "seed": s.seed, "failures": bad})
        bad_pairs = []
        for x in elements:
            for y in elements:
                got = (HeckeElement.basis(x) * HeckeElement.basis(y)).specialize(1)
                if got != {x * y: 1}:
                    bad_pairs.append([str(x), str(y)])
        ctx.row("hecke-props", "specialization", FAIL if bad_pairs else PASS,
                {"type": str(datum), "pairs": len(elements) ** 2, "failures": bad_pairs[:10]})
        full = frozenset(datum.simple_set)
        for delta in _all_automorphisms(datum):
            for w in elements:
                total = dm_sum(w, delta, ctx.cache)
                witness = {"type": str(datum), "delta": delta.name, "w": str(w), "length": w.length,
                           "sum": total.to_text(), "degree": total.degree,
                           "leading": total.leading_coefficient}
                if twisted_support(w, delta) == full:
                    ok = total.degree == w.length and total.is_monic()
                    ctx.row("hecke-props", "dm-sum", PASS if ok else FAIL, witness)
                else:
                    ctx.row("hecke-props", "dm-sum", INFO, witness, "supp_d(w) != S: reported only")


def suite_hecke_bridge(ctx: Context) -> None:
    s = ctx.s
    for p in ctx.primes():
        spec = s.spec(p)
        elements = enumerate_group(spec.weyl)
        n_pos = spec.weyl.num_positive_roots
        for wp in elements:
            try:
                counts = ctx.unipotent(p, wp)
            except OrbitTooLarge as exc:
                ctx.row("hecke-bridge", "bridge", SKIPPED, {"p": p, "w_prime": str(wp)}, str(exc))
                continue
            total = sum(counts.values())
            ctx.row("hecke-bridge", "cell-partition", PASS if total == p ** n_pos else FAIL,
                    {"p": p, "w_prime": str(wp), "sum": total, "expected": p ** n_pos})
            for w in s.weyl_elements():
                coeff = ctx.coefficient(w, wp, spec.delta)
                expected = specialize(coeff, p) * p ** wp.length
                ctx.row("hecke-bridge", "bridge", PASS if counts[w] == expected else FAIL, {
                    "p": p, "w": str(w), "w_prime": str(wp), "count": counts[w],
                    "coefficient": coeff.to_text(), "expected": expected,
                })


def suite_unipotent_cells(ctx: Context) -> None:
    s = ctx.s
    primes = ctx.primes()
    spec0 = s.spec(primes[0]) if primes else s.spec(2)
    elements = enumerate_group(spec0.weyl)
    for w in s.weyl_elements():
        full = s.full_support(w)
        for wp in elements:
            series = PointCountSeries(s.id, f"unipotent[{w}|{wp}]")
            for p in primes:
                try:
                    series.add(p, ctx.unipotent(p, wp)[w])
                except OrbitTooLarge:
                    continue
            extra = {"w": str(w), "w_prime": str(wp), "length": w.length, "length_prime": wp.length}
            note = "" if full else "supp_d(w) != S: reported only"
            if wp.is_identity():
                fit_row(ctx, "unipotent-cells", "unipotent-monic", series, w.length,
                        lambda f, w=w: f.degree == w.length and f.is_monic,
                        extra, report_only=not full, detail=note)
            else:
                top = w.length + wp.length
                fit_row(ctx, "unipotent-cells", "degree-drop", series, top - 1,
                        lambda f, top=top: f.degree < top,
                        extra, report_only=not full, detail=note)


def _orbit_identity_at(ctx: Context, p: int) -> None:
    s = ctx.s
    spec = s.spec(p)
    G = group_order(spec)
    reps = ctx.reps(p)
    flags = G // spec.borel_order
    for i, rep in enumerate(reps):
        base = {"p": p, "orbit": i, "h": rep.to_text()}
        try:
            Y = ctx.lusztig(p, i)
        except OrbitTooLarge as exc:
            ctx.row("orbit-identity", "orbit-identity", SKIPPED, base, str(exc))
            continue
        ctx.row("orbit-identity", "cell-partition", PASS if sum(Y.values()) == flags else FAIL,
                {**base, "quantity": "Y", "sum": sum(Y.values()), "expected": flags})
        z = ctx.centralizer(p, i)
        try:
            o = ctx.orbit(p, i)
        except OrbitTooLarge as exc:
            if spec.family == "GL" and spec.twist is TwistKind.TRIVIAL:
                # C^F is the single GL_n(F_p)-orbit; count it cell by cell without listing it
                try:
                    cells = ctx.geometric(p)
                except (OrbitTooLarge, ValueError) as exc2:
                    ctx.row("orbit-identity", "orbit-identity", SKIPPED, base, f"{exc}; {exc2}")
                    continue
                size = G // z
                ctx.row("orbit-identity", "cell-partition",
                        PASS if sum(cells.values()) == size else FAIL,
                        {**base, "quantity": "class", "sum": sum(cells.values()), "expected": size,
                         "method": "algebraic"})
                for w in s.weyl_elements():
                    lhs = Y[w] * spec.borel_order * size
                    rhs = G * cells[w]
                    ctx.row("orbit-identity", "orbit-identity", PASS if lhs == rhs else FAIL, {
                        **base, "w": str(w), "Y": Y[w], "B": spec.borel_order, "orbit_size": size,
                        "G": G, "class_cell": cells[w], "lhs": lhs, "rhs": rhs, "method": "algebraic",
                    })
            else:
                ctx.row("orbit-identity", "orbit-identity", SKIPPED, base, str(exc))
            continue
        ctx.row("orbit-identity", "orbit-stabilizer", PASS if o.size * z == G else FAIL,
                {**base, "orbit_size": o.size, "centralizer": z, "G": G})
        cells = class_cell_counts(o)
        ctx.row("orbit-identity", "cell-partition", PASS if sum(cells.values()) == o.size else FAIL,
                {**base, "quantity": "class", "sum": sum(cells.values()), "expected": o.size})
        for w in s.weyl_elements():
            chk = kawanaka_check(spec, o, w, Y[w])
            ctx.row("orbit-identity", "orbit-identity", PASS if chk.holds else FAIL,
                    {**base, "w": str(w), **chk.witness(), "method": "orbit"})
    if spec.family == "SL" and spec.twist is TwistKind.TRIVIAL:
        _fusion_rows(ctx, p)


def _fusion_rows(ctx: Context, p: int) -> None:
    import numpy as np

    spec = ctx.s.spec(p)
    reps = ctx.reps(p)
    try:
        orbits = [ctx.orbit(p, i) for i in range(len(reps))]
    except OrbitTooLarge as exc:
        ctx.row("orbit-identity", "fusion", SKIPPED, {"p": p}, str(exc))
        return
    keys = np.concatenate([o.keys for o in orbits])
    gl = gl_class_keys(ctx.element(p), cap=max(ctx.s.orbit_cap * len(reps), 1))
    disjoint = len(np.unique(keys)) == len(keys)
    ok = disjoint and np.array_equal(np.sort(keys), gl)
    ctx.row("orbit-identity", "fusion", PASS if ok else FAIL, {
        "p": p, "orbits": len(orbits), "sizes": [o.size for o in orbits], "gl_class": len(gl),
        "disjoint": disjoint,
    })
    pred = fusion_prediction(ctx.element(p), spec)
    ctx.row("orbit-identity", "fusion-count", INFO, {"p": p, "k": len(orbits), "predicted": pred},
            "compared, not asserted")


def suite_orbit_identity(ctx: Context) -> None:
    for p in ctx.primes(orbit_level=True):
        _orbit_identity_at(ctx, p)


def _regular_note(ctx: Context) -> str:
    return "" if ctx.s.expects_regular else "h is not regular: reported only"


def _orbit_series(ctx: Context, i: int, w) -> PointCountSeries:
    series = PointCountSeries(ctx.s.id, f"Y[{w}|orbit {i}]")
    for p in ctx.primes():
        if i >= len(ctx.reps(p)):
            continue
        try:
            series.add(p, ctx.lusztig(p, i)[w])
        except OrbitTooLarge:
            continue
    return series


def _orbit_indices(ctx: Context) -> range:
    return range(max((len(ctx.reps(p)) for p in ctx.primes()), default=0))


def suite_dimensions(ctx: Context) -> None:
    s = ctx.s
    primes = ctx.primes()
    if not primes:
        ctx.row("dimensions", "lusztig-degree", SKIPPED, {}, "no valid primes")
        return
    spec0 = s.spec(primes[0])
    report_only = not s.expects_regular
    note = _regular_note(ctx)
    for i in _orbit_indices(ctx):
        for w in s.weyl_elements():
            fit_row(ctx, "dimensions", "lusztig-degree", _orbit_series(ctx, i, w), w.length,
                    lambda f, w=w: f.degree == w.length,
                    {"w": str(w), "orbit": i}, report_only, note)
    if s.twist is TwistKind.TRIVIAL:
        dim_t = spec0.dim_torus_fixed
        for w in s.weyl_elements():
            claimed = spec0.dim_borel + w.length - dim_t
            series = PointCountSeries(s.id, f"C[{w}]")
            for p in primes:
                try:
                    series.add(p, ctx.geometric(p)[w])
                except (OrbitTooLarge, ValueError):
                    continue
            fit_row(ctx, "dimensions", "class-degree", series, claimed,
                    lambda f, c=claimed: f.degree == c,
                    {"w": str(w), "dim_B": spec0.dim_borel, "dim_T": dim_t}, report_only, note)
        # Z_SL(h) may be disconnected, so its point count need not be a polynomial;
        # Z_GL(h) is connected and Z_GL(h) / G_m has the dimension of Z_SL(h).
        series = PointCountSeries(s.id, "centralizer")
        for p in primes:
            if s.family == "GL":
                series.add(p, ctx.centralizer(p))
            else:
                gl = GroupSpec("GL", s.n, p)
                series.add(p, centralizer_order(ctx.element(p), gl) // (p - 1))
        method = "Z_GL(h)" if s.family == "GL" else "Z_GL(h) / G_m"
        fit_row(ctx, "dimensions", "centralizer-degree", series, dim_t,
                lambda f: f.degree == dim_t, {"dim_T": dim_t, "counted": method}, report_only, note)
    else:
        ctx.row("dimensions", "class-degree", INFO, {"twist": str(s.twist)},
                "geometric class counts are not computed for twisted classes")


def _regularity_rows(ctx: Context) -> None:
    s = ctx.s
    if s.twist is TwistKind.TRIVIAL:
        for p in ctx.primes():
            cert = is_regular(ctx.element(p), s.spec(p))
            expected = s.kind or cert.kind
            status = PASS if cert.kind is expected else FAIL
            if not s.expects_regular:
                status = INFO
            ctx.row("irreducibility", "regularity", status,
                    {"p": p, "kind": str(cert.kind), "evidence": cert.evidence})
        return
    primes = ctx.primes()
    try:
        cert = twisted_regularity(s.template, s.family, s.n, s.twist, primes)
    except ValueError as exc:
        ctx.row("irreducibility", "regularity", SKIPPED, {"primes": primes}, str(exc))
        return
    ok = cert.regular == s.expects_regular
    ctx.row("irreducibility", "regularity", PASS if ok else FAIL,
            {"kind": str(cert.kind), "evidence": cert.evidence})


def _steinberg_rows(ctx: Context, p: int) -> None:
    try:
        orbits = [ctx.orbit(p, i) for i in range(len(ctx.reps(p)))]
    except OrbitTooLarge as exc:
        ctx.row("irreducibility", "steinberg", SKIPPED, {"p": p}, str(exc))
        return
    h = ctx.element(p)
    rational_eigenvalues = all(len(f) == 2 for f, _ in factor_mod_p(charpoly(h), p))
    try:
        res = steinberg_representative(orbits[0], orbits[1:])
        ctx.row("irreducibility", "steinberg", PASS,
                {"p": p, "element": res.element.to_text(), "orbit": res.orbit_index})
    except LookupError as exc:
        if ctx.s.twist is TwistKind.TRIVIAL and not rational_eigenvalues:
            # lower triangular matrices have their eigenvalues on the diagonal
            ctx.row("irreducibility", "steinberg", INFO, {"p": p},
                    "eigenvalues outside F_p: B^- is met only over an extension field")
        else:
            ctx.row("irreducibility", "steinberg", FAIL, {"p": p}, str(exc))


def suite_irreducibility(ctx: Context) -> None:
    s = ctx.s
    _regularity_rows(ctx)
    report_only = not s.expects_regular
    note = _regular_note(ctx)
    for i in _orbit_indices(ctx):
        for w in s.weyl_elements():
            if not s.full_support(w) and s.weyl != "longest":
                continue
            fit_row(ctx, "irreducibility", "monic", _orbit_series(ctx, i, w), w.length,
                    lambda f, w=w: f.degree == w.length and f.is_monic,
                    {"w": str(w), "orbit": i}, report_only or not s.full_support(w), note)
    for p in ctx.primes(orbit_level=True):
        _steinberg_rows(ctx, p)
        if s.twist is not TwistKind.TRIVIAL or not s.expects_regular:
            continue
        try:
            orbits = [ctx.orbit(p, i) for i in range(len(ctx.reps(p)))]
            geo = ctx.geometric(p)
        except OrbitTooLarge as exc:
            ctx.row("irreducibility", "orbit-sum", SKIPPED, {"p": p}, str(exc))
            continue
        for w in s.weyl_elements():
            parts = [class_cell_counts(o)[w] for o in orbits]
            ctx.row("irreducibility", "orbit-sum", PASS if sum(parts) == geo[w] else FAIL,
                    {"p": p, "w": str(w), "orbits": parts, "sum": sum(parts), "geometric": geo[w]})


SUITE_FUNCTIONS = {
    "hecke-props": suite_hecke_props,
    "hecke-bridge": suite_hecke_bridge,
    "unipotent-cells": suite_unipotent_cells,
    "orbit-identity": suite_orbit_identity,
    "dimensions": suite_dimensions,
    "irreducibility": suite_irreducibility,
}


def verify_suite(name: str, scenario: Scenario, ctx: Context | None = None) -> list[ReportRow]:
    if name not in SUITE_FUNCTIONS:
        raise ValueError(f"unknown suite {name!r}")
    ctx = ctx or Context(scenario)
    start = len(ctx.rows)
    SUITE_FUNCTIONS[name](ctx)
    return ctx.rows[start:]


def run_scenario(
    scenario: Scenario,
    cache: CoefficientCache | None = None,
    suites: tuple[str, ...] | None = None,
) -> VerificationReport:
    t0 = time.perf_counter()
    ctx = Context(scenario, cache)
    for p, reason in ctx.skipped_primes().items():
        log.info("%s: p=%d skipped: %s", scenario.id, p, reason)
        ctx.row("setup", "validity", INFO, {"p": p}, f"prime skipped: {reason}")
    for name in suites or scenario.suites:
        verify_suite(name, scenario, ctx)
    seeds = {scenario.id: scenario.seed} if "hecke-props" in (suites or scenario.suites) else {}
    return VerificationReport(ctx.rows, __version__, time.perf_counter() - t0, seeds, [scenario.id])
