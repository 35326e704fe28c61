"""Scenario files: one INI section per scenario."""

from __future__ import annotations

import configparser
import logging
from dataclasses import dataclass, replace
from pathlib import Path

import sympy

from ..chevalley import (
    ElementTemplate,
    GroupSpec,
    InvalidForPrime,
    RegularityKind,
    is_regular,
    parse_template,
)
from ..coxeter import CoxeterDatum, WeylElement, enumerate_group, longest_element, twisted_support
from ..matfq import TwistKind

log = logging.getLogger(__name__)

SUITES = (
    "hecke-props",
    "hecke-bridge",
    "unipotent-cells",
    "orbit-identity",
    "dimensions",
    "irreducibility",
)

SYMBOLIC_SUITES = {"hecke-props"}
GROUP_FREE_SUITES = {"hecke-bridge", "unipotent-cells"}  # need (family, n, twist) but no element

DEFAULT_ORBIT_CAP = 10 ** 6
DEFAULT_FLAG_CAP = 10 ** 6
MAX_PRIME_SEARCH = 1000


class ScenarioError(ValueError):
    pass


@dataclass(frozen=True)
class Scenario:
    id: str
    suites: tuple[str, ...]
    family: str = "GL"
    n: int = 2
    twist: TwistKind = TwistKind.TRIVIAL
    template: ElementTemplate | None = None
    kind: RegularityKind | None = None
    primes: tuple[int, ...] | None = None
    orbit_primes: tuple[int, ...] | None = None
    weyl: str = "all"
    types: tuple[str, ...] = ()
    triples: int = 1000
    seed: int = 0
    orbit_cap: int = DEFAULT_ORBIT_CAP
    flag_cap: int = DEFAULT_FLAG_CAP
    description: str = ""

    def __post_init__(self):
        unknown = [s for s in self.suites if s not in SUITES]
        if unknown:
            raise ScenarioError(f"{self.id}: unknown suite(s) {unknown}; known: {', '.join(SUITES)}")
        if not self.suites:
            raise ScenarioError(f"{self.id}: no suites selected")
        if set(self.suites) - SYMBOLIC_SUITES:
            if self.family not in ("GL", "SL"):
                raise ScenarioError(f"{self.id}: family must be GL or SL")
            if self.template is None and set(self.suites) - SYMBOLIC_SUITES - GROUP_FREE_SUITES:
                raise ScenarioError(f"{self.id}: suites {self.suites} need an element template")
            if self.template is not None and self.template.n != self.n:
                raise ScenarioError(f"{self.id}: template {self.template} is not {self.n}x{self.n}")
            if self.primes is not None and not self.primes:
                raise ScenarioError(f"{self.id}: empty prime list")
            if not self.weyl_elements():
                raise ScenarioError(f"{self.id}: Weyl selection {self.weyl!r} is empty")
        if "hecke-props" in self.suites and not self.types:
            raise ScenarioError(f"{self.id}: hecke-props needs 'types'")

    # -- derived data ----------------------------------------------------

    @property
    def symbolic_only(self) -> bool:
        return set(self.suites) <= SYMBOLIC_SUITES

    def spec(self, p: int) -> GroupSpec:
        return GroupSpec(self.family, self.n, p, self.twist)

    @property
    def datum(self) -> CoxeterDatum:
        return CoxeterDatum("A", self.n - 1)

    @property
    def expects_regular(self) -> bool:
        return self.kind is not RegularityKind.NOT_REGULAR

    def full_support(self, w: WeylElement) -> bool:
        spec = self.spec(2)
        return twisted_support(w, spec.delta) == frozenset(w.datum.simple_set)

    def weyl_elements(self) -> list[WeylElement]:
        elements = enumerate_group(self.datum)
        sel = self.weyl.strip()
        if not sel:
            return []
        if sel == "all":
            return elements
        if sel == "full-support":
            return [w for w in elements if self.full_support(w)]
        if sel == "longest":
            return [longest_element(self.datum)]
        # explicit list: words separated by ';', 'e' for the identity
        return [self.datum.identity() if word.strip() == "e" else self.datum.parse_element(word)
                for word in sel.split(";")]

    def element(self, p: int):
        """The template at p, or raise InvalidForPrime when p fails the validity predicate."""
        spec = self.spec(p)
        h = self.template.for_spec(spec)
        if self.kind is not None:
            cert = is_regular(h, spec)
            if cert.kind is not self.kind:
                raise InvalidForPrime(f"{self.template} mod {p} is {cert.kind}, expected {self.kind}")
        return h

    def valid_primes(self, count: int) -> list[int]:
        out = []
        for p in sympy.primerange(2, MAX_PRIME_SEARCH):
            if len(out) == count:
                break
            if self.template is not None:
                try:
                    self.element(int(p))
                except InvalidForPrime as exc:
                    log.info("%s: skipping p=%d (%s)", self.id, p, exc)
                    continue
            out.append(int(p))
        return out

    def points_needed(self) -> int:
        """Primes needed so every fit in the selected suites gets bound claimed + 1."""
        n_pos = self.datum.num_positive_roots
        need = 3
        spec = self.spec(2)
        if "unipotent-cells" in self.suites:
            need = max(need, 2 * n_pos - 1 + 3)
        if "irreducibility" in self.suites:
            need = max(need, n_pos + 3)
        if "dimensions" in self.suites:
            need = max(need, n_pos + 3, spec.dim_torus_fixed + 3)
            if self.twist is TwistKind.TRIVIAL:
                need = max(need, spec.dim_borel + n_pos - spec.dim_torus_fixed + 3)
        if self.twist is not TwistKind.TRIVIAL and self.template is not None:
            need = max(need, spec.dim_torus_fixed + 3)
        return need

    def resolved_primes(self) -> tuple[int, ...]:
        if self.primes is not None:
            return self.primes
        return tuple(self.valid_primes(self.points_needed()))

    def resolved_orbit_primes(self) -> tuple[int, ...]:
        return self.orbit_primes if self.orbit_primes is not None else self.resolved_primes()


def _ints(text: str) -> tuple[int, ...]:
    return tuple(int(x) for x in text.replace(",", " ").split())


def _words(text: str) -> tuple[str, ...]:
    return tuple(x.strip() for x in text.split(",") if x.strip())


def scenario_from_section(name: str, sec) -> Scenario:
    known = {
        "suites", "family", "n", "twist", "template", "kind", "primes", "orbit_primes", "weyl",
        "types", "triples", "seed", "orbit_cap", "flag_cap", "description",
    }
    extra = {k: v for k, v in sec.items() if k not in known}
    if extra:
        raise ScenarioError(f"{name}: unknown keys {sorted(extra)}")
    try:
        return Scenario(
            id=name,
            suites=_words(sec.get("suites", "")),
            family=sec.get("family", "GL"),
            n=int(sec.get("n", "2")),
            twist=TwistKind(sec.get("twist", "trivial")),
            template=parse_template(sec["template"]) if "template" in sec else None,
            kind=RegularityKind(sec["kind"]) if "kind" in sec else None,
            primes=_ints(sec["primes"]) if "primes" in sec else None,
            orbit_primes=_ints(sec["orbit_primes"]) if "orbit_primes" in sec else None,
            weyl=sec.get("weyl", "all"),
            types=_words(sec.get("types", "")),
            triples=int(sec.get("triples", "1000")),
            seed=int(sec.get("seed", "0")),
            orbit_cap=int(sec.get("orbit_cap", str(DEFAULT_ORBIT_CAP))),
            flag_cap=int(sec.get("flag_cap", str(DEFAULT_FLAG_CAP))),
            description=sec.get("description", ""),
        )
    except (KeyError, ValueError) as exc:
        if isinstance(exc, ScenarioError):
            raise
        raise ScenarioError(f"{name}: {exc}") from exc


def parse_config(text: str) -> list[Scenario]:
    cp = configparser.ConfigParser(interpolation=None)
    cp.read_string(text)
    return [scenario_from_section(name, cp[name]) for name in cp.sections()]


def load_config(path: str | Path | None = None) -> list[Scenario]:
    if path is None:
        return parse_config(PRESETS)
    return parse_config(Path(path).read_text())


def with_overrides(s: Scenario, primes=None, cap=None) -> Scenario:
    changes = {}
    if primes is not None:
        changes["primes"] = tuple(primes)
        if s.orbit_primes is not None:
            changes["orbit_primes"] = tuple(p for p in s.orbit_primes if p in primes) or tuple(primes)
    if cap is not None:
        changes["orbit_cap"] = cap
        changes["flag_cap"] = cap
    return replace(s, **changes) if changes else s


PRESETS = """\
# Built-in scenarios. Primes default to the first ones passing the template's
# validity predicate, enough for every fit to carry one overdetermination point.

[hecke-symbolic]
description = Hecke algebra structure and the sum over w' for small types
suites = hecke-props
types = A1, A2, A3, B2
triples = 1000
seed = 20240917

[gl2-cells]
description = unipotent cells against Hecke coefficients, GL2
suites = hecke-bridge, unipotent-cells
family = GL
n = 2
primes = 2 3 5 7 11

[gl3-cells]
description = unipotent cells against Hecke coefficients, GL3
suites = hecke-bridge, unipotent-cells
family = GL
n = 3

[sl3-flip-cells]
description = twisted unipotent cells, SL3 with the diagram flip
suites = hecke-bridge, unipotent-cells
family = SL
n = 3
twist = flip

[gl2-split]
suites = orbit-identity, dimensions, irreducibility
family = GL
n = 2
template = diag:1,2
kind = regular-semisimple-split

[gl2-split-b]
suites = orbit-identity, dimensions, irreducibility
family = GL
n = 2
template = diag:2,3
kind = regular-semisimple-split

[gl2-nonsplit]
description = x^2 - x - 1, irreducible when p = 2, 3 mod 5
suites = orbit-identity, dimensions, irreducibility
family = GL
n = 2
template = companion:-1,-1,1
kind = regular-semisimple-nonsplit

[gl2-nonsplit-b]
description = x^2 + x + 1, irreducible when p = 2 mod 3
suites = orbit-identity, dimensions, irreducibility
family = GL
n = 2
template = companion:1,1,1
kind = regular-semisimple-nonsplit

[gl2-unipotent]
suites = orbit-identity, dimensions, irreducibility
family = GL
n = 2
template = jordan:2:1
kind = regular-unipotent

[gl2-mixed]
description = a single Jordan block with eigenvalue 2
suites = orbit-identity, dimensions, irreducibility
family = GL
n = 2
template = jordan:2:2
kind = regular-mixed

[gl3-split]
suites = orbit-identity, dimensions, irreducibility
family = GL
n = 3
template = diag:1,2,3
kind = regular-semisimple-split
orbit_primes = 5 7

[gl3-nonsplit]
description = x^3 - 3x + 1, irreducible unless p = 3 or p = 1, 8 mod 9
suites = orbit-identity, dimensions, irreducibility
family = GL
n = 3
template = companion:1,-3,0,1
kind = regular-semisimple-nonsplit
orbit_primes = 2 5 7

[gl3-nonsplit-partial]
description = (x - 1)(x^2 - x - 1), one rational eigenvalue
suites = orbit-identity, dimensions, irreducibility
family = GL
n = 3
template = companion:1,0,-2,1
kind = regular-semisimple-nonsplit
orbit_primes = 2 3 7

[gl3-unipotent]
suites = orbit-identity, dimensions, irreducibility
family = GL
n = 3
template = jordan:3:1
kind = regular-unipotent
orbit_primes = 2 3 5

[gl3-mixed]
description = (x - 1)^2 (x - 2), regular
suites = orbit-identity, dimensions, irreducibility
family = GL
n = 3
template = companion:-2,5,-4,1
kind = regular-mixed
orbit_primes = 3 5 7

[gl3-mixed-b]
suites = orbit-identity, dimensions, irreducibility
family = GL
n = 3
template = jordan:3:2
kind = regular-mixed
orbit_primes = 3 5

[gl4-unipotent]
description = GL4 is limited by the flag and orbit caps; identity checks only
suites = orbit-identity
family = GL
n = 4
template = jordan:4:1
kind = regular-unipotent
primes = 2 3 5

[sl2-unipotent]
description = the class splits into two rational orbits for odd p
suites = orbit-identity, dimensions, irreducibility
family = SL
n = 2
template = jordan:2:1
kind = regular-unipotent

[sl3-unipotent]
description = three rational orbits when p = 1 mod 3
suites = orbit-identity, irreducibility
family = SL
n = 3
template = jordan:3:1
kind = regular-unipotent
primes = 7 13 19 31 37 43
orbit_primes = 7

[sl3-flip]
description = twisted SL3; regularity is certified from centralizer orders
suites = orbit-identity, dimensions, irreducibility
family = SL
n = 3
twist = flip
template = jordan:3:1
kind = regular-twisted
orbit_primes = 2 3 5

[gl2-central]
description = identity element: hypotheses fail, results are reported only
suites = irreducibility
family = GL
n = 2
template = diag:1,1
kind = not-regular
weyl = longest
"""
