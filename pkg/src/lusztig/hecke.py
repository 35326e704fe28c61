"""
Iwahori-Hecke algebra of a finite Weyl group in the standard basis T_w.

Coefficients live in Z[t]. The only relations used are

    T_w T_s = T_{ws}                     if l(ws) > l(w)
    T_w T_s = (t - 1) T_w + t T_{ws}     if l(ws) < l(w)

the second one being the quadratic relation (T_s - t)(T_s + 1) = 0 rewritten
through T_w = T_{ws} T_s. Products are computed by right-multiplying by the
generators along the canonical word of the right factor.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field
from typing import Iterable, Mapping

from .cache import CoefficientCache, content_key
from .coxeter import (
    CoxeterDatum,
    DiagramAutomorphism,
    WeylElement,
    apply_automorphism,
    enumerate_group,
    longest_element,
)

__all__ = [
    "IntPolynomial", "HeckeElement", "ZERO", "ONE", "T_VAR",
    "multiply", "coefficient", "kawanaka_coefficient", "kawanaka_table",
    "dm_sum", "specialize", "hecke_table_csv",
]

ZERO_DEGREE = -1  # degree of the zero polynomial


@dataclass(frozen=True)
class IntPolynomial:
    """Dense polynomial in t with integer coefficients, lowest degree first."""

    coeffs: tuple[int, ...] = ()

    def __post_init__(self):
        c = list(self.coeffs)
        while c and c[-1] == 0:
            c.pop()
        object.__setattr__(self, "coeffs", tuple(int(x) for x in c))

    @classmethod
    def constant(cls, c: int) -> IntPolynomial:
        return cls((c,))

    @classmethod
    def monomial(cls, degree: int, c: int = 1) -> IntPolynomial:
        return cls((0,) * degree + (c,))

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    @property
    def leading_coefficient(self) -> int:
        return self.coeffs[-1] if self.coeffs else 0

    def is_zero(self) -> bool:
        return not self.coeffs

    def is_monic(self) -> bool:
        return self.leading_coefficient == 1

    def __bool__(self):
        return bool(self.coeffs)

    def __add__(self, other):
        other = _as_poly(other)
        n = max(len(self.coeffs), len(other.coeffs))
        a = self.coeffs + (0,) * (n - len(self.coeffs))
        b = other.coeffs + (0,) * (n - len(other.coeffs))
        return IntPolynomial(tuple(x + y for x, y in zip(a, b)))

    __radd__ = __add__

    def __neg__(self):
        return IntPolynomial(tuple(-x for x in self.coeffs))

    def __sub__(self, other):
        return self + (-_as_poly(other))

    def __rsub__(self, other):
        return _as_poly(other) - self

    def __mul__(self, other):
        other = _as_poly(other)
        if not self.coeffs or not other.coeffs:
            return ZERO
        out = [0] * (len(self.coeffs) + len(other.coeffs) - 1)
        for i, a in enumerate(self.coeffs):
            if a:
                for j, b in enumerate(other.coeffs):
                    out[i + j] += a * b
        return IntPolynomial(tuple(out))

    __rmul__ = __mul__

    def __call__(self, q: int) -> int:
        return specialize(self, q)

    def __str__(self):
        if not self.coeffs:
            return "0"
        terms = []
        for k in range(len(self.coeffs) - 1, -1, -1):
            c = self.coeffs[k]
            if not c:
                continue
            mono = "" if k == 0 else ("t" if k == 1 else f"t^{k}")
            if mono and abs(c) == 1:
                body = mono
            else:
                body = f"{abs(c)}{'*' if mono else ''}{mono}"
            terms.append(("- " if c < 0 else "+ ") + body)
        text = " ".join(terms)
        return text[2:] if text.startswith("+ ") else "-" + text[2:]

    def to_text(self) -> str:
        """Space separated coefficients, lowest degree first ('0' for zero)."""
        return " ".join(map(str, self.coeffs)) if self.coeffs else "0"

    @classmethod
    def from_text(cls, text: str) -> IntPolynomial:
        return cls(tuple(int(tok) for tok in text.split()))


def _as_poly(x) -> IntPolynomial:
    if isinstance(x, IntPolynomial):
        return x
    if isinstance(x, int):
        return IntPolynomial((x,))
    return NotImplemented


ZERO = IntPolynomial()
ONE = IntPolynomial((1,))
T_VAR = IntPolynomial((0, 1))
_T_MINUS_ONE = IntPolynomial((-1, 1))


def specialize(p: IntPolynomial, q: int) -> int:
    """Exact evaluation at t = q (Horner)."""
    out = 0
    for c in reversed(p.coeffs):
        out = out * q + c
    return out


@dataclass(frozen=True)
class HeckeElement:
    datum: CoxeterDatum
    terms: Mapping[WeylElement, IntPolynomial] = field(default_factory=dict)

    def __post_init__(self):
        clean = {}
        for w, c in self.terms.items():
            if w.datum != self.datum:
                raise ValueError(f"basis element {w!r} is not in W({self.datum})")
            if c:
                clean[w] = c
        object.__setattr__(self, "terms", clean)

    @classmethod
    def basis(cls, w: WeylElement) -> HeckeElement:
        return cls(w.datum, {w: ONE})

    @classmethod
    def one(cls, datum: CoxeterDatum) -> HeckeElement:
        return cls.basis(datum.identity())

    def __add__(self, other: HeckeElement) -> HeckeElement:
        _check_same(self, other)
        out = dict(self.terms)
        for w, c in other.terms.items():
            out[w] = out.get(w, ZERO) + c
        return HeckeElement(self.datum, out)

    def scale(self, c: IntPolynomial | int) -> HeckeElement:
        c = _as_poly(c)
        return HeckeElement(self.datum, {w: c * v for w, v in self.terms.items()})

    def __mul__(self, other: HeckeElement) -> HeckeElement:
        return multiply(self, other)

    def __eq__(self, other):
        if not isinstance(other, HeckeElement):
            return NotImplemented
        return self.datum == other.datum and self.terms == other.terms

    def __hash__(self):
        return hash((self.datum, frozenset(self.terms.items())))

    def times_generator(self, i: int) -> HeckeElement:
        """Right multiplication by T_{s_i}."""
        out: dict[WeylElement, IntPolynomial] = {}
        for w, c in self.terms.items():
            ws = w.times_simple(i)
            if w.has_right_descent(i):
                out[w] = out.get(w, ZERO) + _T_MINUS_ONE * c
                out[ws] = out.get(ws, ZERO) + T_VAR * c
            else:
                out[ws] = out.get(ws, ZERO) + c
        return HeckeElement(self.datum, out)

    def specialize(self, q: int) -> dict[WeylElement, int]:
        return {w: specialize(c, q) for w, c in self.terms.items() if specialize(c, q)}

    def __repr__(self):
        if not self.terms:
            return "0"
        parts = [f"({c})*T[{w}]" for w, c in sorted(self.terms.items())]
        return " + ".join(parts)


def _check_same(a: HeckeElement, b: HeckeElement):
    if a.datum != b.datum:
        raise ValueError(f"mismatched Coxeter data {a.datum} and {b.datum}")


def multiply(a: HeckeElement, b: HeckeElement) -> HeckeElement:
    _check_same(a, b)
    out = HeckeElement(a.datum)
    for w, c in b.terms.items():
        prod = a
        for i in w.canonical_word:
            prod = prod.times_generator(i)
        out = out + prod.scale(c)
    return out


def coefficient(a: HeckeElement, w: WeylElement) -> IntPolynomial:
    """[A : T_w]"""
    return a.terms.get(w, ZERO)


def _compute_kawanaka(w: WeylElement, w_prime: WeylElement, delta: DiagramAutomorphism) -> IntPolynomial:
    w0 = longest_element(w.datum)
    left = apply_automorphism(delta, w_prime).inverse() * w0
    target = w_prime.inverse() * w0
    prod = multiply(HeckeElement.basis(w), HeckeElement.basis(left))
    return coefficient(prod, target)


def kawanaka_coefficient(
    w: WeylElement,
    w_prime: WeylElement,
    delta: DiagramAutomorphism,
    cache: CoefficientCache | None = None,
) -> IntPolynomial:
    """[T_w T_{delta(w')^{-1} w0} : T_{w'^{-1} w0}]"""
    if not (w.datum == w_prime.datum == delta.datum):
        raise ValueError("w, w' and delta must share one Coxeter datum")
    if cache is None:
        return _compute_kawanaka(w, w_prime, delta)
    key = content_key("kawanaka", w.datum.family, w.datum.rank, delta.images, w, w_prime)
    coeffs = cache.get_or_compute(
        key, lambda: list(_compute_kawanaka(w, w_prime, delta).coeffs)
    )
    return IntPolynomial(tuple(coeffs))


def kawanaka_table(
    datum: CoxeterDatum,
    delta: DiagramAutomorphism,
    cache: CoefficientCache | None = None,
) -> dict[tuple[WeylElement, WeylElement], IntPolynomial]:
    elements = enumerate_group(datum)
    return {
        (w, wp): kawanaka_coefficient(w, wp, delta, cache)
        for w in elements
        for wp in elements
    }


def dm_sum(
    w: WeylElement,
    delta: DiagramAutomorphism,
    cache: CoefficientCache | None = None,
) -> IntPolynomial:
    """Sum over all w' of kawanaka_coefficient(w, w', delta)."""
    total = ZERO
    for wp in enumerate_group(w.datum):
        total = total + kawanaka_coefficient(w, wp, delta, cache)
    return total


def hecke_table_csv(
    tables: Iterable[tuple[DiagramAutomorphism, Mapping[tuple[WeylElement, WeylElement], IntPolynomial]]],
) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["type", "delta", "w", "w_prime", "coefficient"])
    for delta, table in tables:
        for (w, wp), poly in sorted(table.items(), key=lambda kv: (kv[0][0].sort_key(), kv[0][1].sort_key())):
            writer.writerow([str(delta.datum), delta.name, str(w), str(wp), poly.to_text()])
    return buf.getvalue()
