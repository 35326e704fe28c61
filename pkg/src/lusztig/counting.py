"""
Exact point counts over F_p and exact polynomial fits of count series.

Quantities counted (h fixed, w running over the Weyl group of A_{n-1}):

* class cells        |G^F ._d h  cap  BwB|         from an explicit orbit
* Lusztig varieties  |{gB : g^-1 h d(g) in BwB}|  from flag representatives
* unipotent cells    |w'^-1 U^- d(w')  cap  BwB|
* geometric cells    |C^F cap BwB|                 torus-normalized, no orbit needed
"""

from __future__ import annotations

import csv
import io
import itertools
import json
import logging
import math
from collections import Counter
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Mapping, Sequence

import numpy as np

from .chevalley import (
    DEFAULT_FLAG_CAP,
    GroupSpec,
    OrbitTooLarge,
    TwistedClassOrbit,
    _w_rep,
    charpoly,
    factor_mod_p,
    flag_rep_batches,
    group_order,
)
from .coxeter import WeylElement, enumerate_group
from .matfq import (
    MatrixFq,
    TwistKind,
    batch_charpoly,
    batch_det,
    batch_matmul,
    batch_twist_unipotent,
    batch_unipotent_inverse,
    batch_weyl_codes,
    code_of,
    weyl_from_code,
)

log = logging.getLogger(__name__)

__all__ = [
    "PointCountSeries", "FittedPolynomial", "FitError", "InsufficientPoints", "NotPolynomial",
    "fit_polynomial", "class_cell_counts", "count_class_cell", "lusztig_counts", "count_lusztig",
    "unipotent_cell_counts", "count_unipotent_cell", "KawanakaCheck", "kawanaka_check",
    "geometric_cell_counts", "count_table_csv", "fits_to_json", "fits_from_json",
]

DEFAULT_UNIPOTENT_CAP = 10 ** 7
DEFAULT_GEOMETRIC_CAP = 2 * 10 ** 8


# -- series and fits ------------------------------------------------------------------


@dataclass
class PointCountSeries:
    scenario: str
    quantity: str
    counts: dict[int, int] = field(default_factory=dict)

    def add(self, p: int, count: int) -> None:
        if count < 0:
            raise ValueError("counts are nonnegative")
        self.counts[p] = int(count)

    @property
    def primes(self) -> list[int]:
        return sorted(self.counts)


class FitError(ValueError):
    pass


class InsufficientPoints(FitError):
    pass


class NotPolynomial(FitError):
    pass


@dataclass(frozen=True)
class FittedPolynomial:
    coeffs: tuple[Fraction, ...]  # lowest degree first, no trailing zeros
    degree_bound: int
    points: tuple[tuple[int, int], ...] = ()

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    @property
    def leading_coefficient(self) -> Fraction:
        return self.coeffs[-1] if self.coeffs else Fraction(0)

    @property
    def is_integer_coefficients(self) -> bool:
        return all(c.denominator == 1 for c in self.coeffs)

    @property
    def is_monic(self) -> bool:
        return self.leading_coefficient == 1

    def __call__(self, x) -> Fraction:
        out = Fraction(0)
        for c in reversed(self.coeffs):
            out = out * x + c
        return out

    def __str__(self):
        if not self.coeffs:
            return "0"
        terms = []
        for k in range(len(self.coeffs) - 1, -1, -1):
            c = self.coeffs[k]
            if not c:
                continue
            mono = "" if k == 0 else ("q" if k == 1 else f"q^{k}")
            mag = abs(c)
            body = mono if (mono and mag == 1) else (f"{mag}*{mono}" if mono else f"{mag}")
            if mono and mag.denominator != 1:
                body = f"({mag})*{mono}"
            terms.append(("- " if c < 0 else "+ ") + body)
        text = " ".join(terms)
        return text[2:] if text.startswith("+ ") else "-" + text[2:]

    def to_record(self) -> dict:
        return {
            "coefficients": [[str(c.numerator), str(c.denominator)] for c in self.coeffs],
            "degree": self.degree,
            "degree_bound": self.degree_bound,
            "is_integer_coefficients": self.is_integer_coefficients,
            "is_monic": self.is_monic,
            "leading_coefficient": str(self.leading_coefficient),
            "points": [[p, c] for p, c in self.points],
        }

    @classmethod
    def from_record(cls, rec: Mapping) -> FittedPolynomial:
        coeffs = tuple(Fraction(int(n), int(d)) for n, d in rec["coefficients"])
        return cls(coeffs, int(rec["degree_bound"]), tuple((int(p), int(c)) for p, c in rec["points"]))


def _lagrange(points: Sequence[tuple[int, int]]) -> list[Fraction]:
    """Coefficients of the interpolating polynomial, low first."""
    k = len(points)
    out = [Fraction(0)] * k
    for i, (xi, yi) in enumerate(points):
        basis = [Fraction(1)]
        denom = 1
        for j, (xj, _) in enumerate(points):
            if j == i:
                continue
            # multiply basis by (x - xj)
            basis = [Fraction(0)] + basis
            for m in range(len(basis) - 1):
                basis[m] -= xj * basis[m + 1]
            denom *= xi - xj
        scale = Fraction(yi, denom)
        for m, b in enumerate(basis):
            out[m] += scale * b
    while out and out[-1] == 0:
        out.pop()
    return out


def fit_polynomial(series: PointCountSeries, degree_bound: int) -> FittedPolynomial:
    """
    Interpolates the first degree_bound + 1 points (by prime) exactly over Q;
    every further point must lie on the curve. At least one extra point is
    required, so "polynomial of degree <= bound" is a falsifiable claim.
    """
    points = sorted(series.counts.items())
    if len(points) < degree_bound + 2:
        raise InsufficientPoints(
            f"{series.quantity}: need {degree_bound + 2} primes for degree bound {degree_bound}, "
            f"have {len(points)}"
        )
    coeffs = _lagrange(points[: degree_bound + 1])
    fit = FittedPolynomial(tuple(coeffs), degree_bound, tuple(points))
    for p, c in points[degree_bound + 1:]:
        if fit(p) != c:
            raise NotPolynomial(
                f"{series.quantity}: not polynomial of claimed degree <= {degree_bound} at sampled "
                f"primes (fit through {points[: degree_bound + 1]} gives {fit(p)} at p={p}, count {c})"
            )
    return fit


# -- class cells (orbit based) ------------------------------------------------------------


def class_cell_counts(orbit: TwistedClassOrbit) -> dict[WeylElement, int]:
    """Orbit elements tallied by Bruhat cell; every w of W appears (possibly with 0)."""
    if orbit._cell_counts is None:
        n = orbit.spec.n
        tally: Counter = Counter()
        for batch in orbit.matrices():
            codes, counts = np.unique(batch_weyl_codes(batch, orbit.spec.p), return_counts=True)
            tally.update(dict(zip(codes.tolist(), counts.tolist())))
        out = {w: 0 for w in enumerate_group(orbit.spec.weyl)}
        for code, c in tally.items():
            out[weyl_from_code(code, n)] = int(c)
        orbit._cell_counts = out
    return dict(orbit._cell_counts)


def count_class_cell(orbit: TwistedClassOrbit, w: WeylElement) -> int:
    return class_cell_counts(orbit)[w]


# -- Lusztig varieties -----------------------------------------------------------------------


def _twist_rep(wd: np.ndarray, spec: GroupSpec) -> np.ndarray:
    return spec.twist_of(MatrixFq.from_array(wd, spec.p)).to_array()


def _twist_unipotent(u: np.ndarray, spec: GroupSpec, u_inv: np.ndarray) -> np.ndarray:
    if spec.twist is TwistKind.TRIVIAL:
        return u
    return batch_twist_unipotent(u, spec.p, u_inv)


def lusztig_counts(spec: GroupSpec, h: MatrixFq, cap: int = DEFAULT_FLAG_CAP) -> dict[WeylElement, int]:
    """|Y_{w,h,d}^F| for every w, from one sweep over the flag representatives."""
    spec.check(h)
    p, n = spec.p, spec.n
    harr = h.to_array()
    tally: Counter = Counter()
    for _, u, wd in flag_rep_batches(spec, cap):
        u_inv = batch_unipotent_inverse(u, p)
        wd_inv = MatrixFq.from_array(wd, p).inverse().to_array()
        right = batch_matmul(_twist_unipotent(u, spec, u_inv), np.broadcast_to(_twist_rep(wd, spec), u.shape), p)
        x = batch_matmul(np.broadcast_to(harr, u.shape), right, p)
        x = batch_matmul(np.broadcast_to(wd_inv, u.shape), batch_matmul(u_inv, x, p), p)
        codes, counts = np.unique(batch_weyl_codes(x, p), return_counts=True)
        tally.update(dict(zip(codes.tolist(), counts.tolist())))
    out = {w: 0 for w in enumerate_group(spec.weyl)}
    for code, c in tally.items():
        out[weyl_from_code(code, n)] = int(c)
    return out


def count_lusztig(spec: GroupSpec, h: MatrixFq, w: WeylElement, cap: int = DEFAULT_FLAG_CAP) -> int:
    return lusztig_counts(spec, h, cap)[w]


# -- unipotent cells ----------------------------------------------------------------------------


def _lower_unitriangular(n: int, p: int, cap: int, chunk: int = 1 << 16):
    pos = [(i, j) for i in range(n) for j in range(i)]
    if p ** len(pos) > cap:
        raise OrbitTooLarge(f"|U^-| = {p}^{len(pos)} exceeds cap {cap}")
    it = itertools.product(range(p), repeat=len(pos))
    while True:
        rows = list(itertools.islice(it, chunk))
        if not rows:
            return
        vals = np.array(rows, dtype=np.int64).reshape(len(rows), len(pos))
        u = np.broadcast_to(np.eye(n, dtype=np.int64), (len(rows), n, n)).copy()
        for k, (i, j) in enumerate(pos):
            u[:, i, j] = vals[:, k]
        yield u


def unipotent_cell_counts(
    spec: GroupSpec, w_prime: WeylElement, cap: int = DEFAULT_UNIPOTENT_CAP
) -> dict[WeylElement, int]:
    """|(w'^-1 U^- d(w') cap BwB)^F| for every w, one sweep over U^-."""
    p, n = spec.p, spec.n
    wd = _w_rep(w_prime, spec)
    wd_inv = MatrixFq.from_array(wd, p).inverse().to_array()
    tw = _twist_rep(wd, spec)
    tally: Counter = Counter()
    for u in _lower_unitriangular(n, p, cap):
        x = batch_matmul(np.broadcast_to(wd_inv, u.shape), batch_matmul(u, np.broadcast_to(tw, u.shape), p), p)
        codes, counts = np.unique(batch_weyl_codes(x, p), return_counts=True)
        tally.update(dict(zip(codes.tolist(), counts.tolist())))
    out = {w: 0 for w in enumerate_group(spec.weyl)}
    for code, c in tally.items():
        out[weyl_from_code(code, n)] = int(c)
    return out


def count_unipotent_cell(spec: GroupSpec, w: WeylElement, w_prime: WeylElement, cap: int = DEFAULT_UNIPOTENT_CAP) -> int:
    return unipotent_cell_counts(spec, w_prime, cap)[w]


# -- the orbit / flag identity ---------------------------------------------------------------------


@dataclass(frozen=True)
class KawanakaCheck:
    lusztig: int
    borel: int
    orbit: int
    group: int
    class_cell: int

    @property
    def lhs(self) -> int:
        return self.lusztig * self.borel * self.orbit

    @property
    def rhs(self) -> int:
        return self.group * self.class_cell

    @property
    def holds(self) -> bool:
        return self.lhs == self.rhs

    def witness(self) -> dict[str, int]:
        return {
            "Y": self.lusztig, "B": self.borel, "orbit": self.orbit,
            "G": self.group, "class_cell": self.class_cell, "lhs": self.lhs, "rhs": self.rhs,
        }


def kawanaka_check(
    spec: GroupSpec,
    orbit: TwistedClassOrbit,
    w: WeylElement,
    lusztig: int | None = None,
) -> KawanakaCheck:
    """|Y^F| * |B^F| * |orbit| == |G^F| * |orbit cap BwB|"""
    if lusztig is None:
        lusztig = count_lusztig(spec, orbit.base, w)
    return KawanakaCheck(lusztig, spec.borel_order, orbit.size, group_order(spec), count_class_cell(orbit, w))


# -- geometric class cells without the orbit ----------------------------------------------------------


def _poly_eval_batch(coeffs: Sequence[int], x: np.ndarray, p: int) -> np.ndarray:
    """sum c_k x^k for a batch of matrices (Horner), coefficients low first."""
    n = x.shape[-1]
    eye = np.broadcast_to(np.eye(n, dtype=np.int64), x.shape)
    out = np.zeros_like(x)
    for c in reversed(coeffs):
        out = (batch_matmul(out, x, p) + c * eye) % p
    return out


def _poly_div(num: Sequence[int], den: Sequence[int], p: int) -> list[int]:
    """Quotient of monic-divisor polynomial division mod p (exact division assumed)."""
    num = list(num)
    q = [0] * (len(num) - len(den) + 1)
    for k in range(len(q) - 1, -1, -1):
        c = num[k + len(den) - 1] % p
        q[k] = c
        for j, d in enumerate(den):
            num[k + j] = (num[k + j] - c * d) % p
    return q


def _class_predicate(h: MatrixFq):
    """x is GL_n(F_p)-conjugate to the regular element h iff this returns True."""
    p = h.p
    f = charpoly(h)
    repeated = [fac for fac, m in factor_mod_p(f, p) if m > 1]
    cofactors = [_poly_div(f, fac, p) for fac in repeated]
    target = np.array(f[:-1], dtype=np.int64)

    def predicate(x: np.ndarray) -> np.ndarray:
        ok = (batch_charpoly(x, p) == target).all(axis=1)
        for cof in cofactors:
            if ok.any():
                idx = np.flatnonzero(ok)
                val = _poly_eval_batch(cof, x[idx], p)
                ok[idx] = val.reshape(len(idx), -1).any(axis=1)
        return ok

    return predicate


def geometric_cell_counts(
    spec: GroupSpec, h: MatrixFq, cap: int = DEFAULT_GEOMETRIC_CAP, chunk: int = 1 << 15
) -> dict[WeylElement, int]:
    """
    |C^F cap BwB| for the geometric class C of a regular h, trivial twist.

    C^F is the GL_n(F_p)-class of h (also for SL_n, where it is the union of
    the fused SL_n(F_p)-orbits). Since C^F is stable under conjugation by
    U cap wU^-w^{-1}, |C^F cap BwB| = p^l(w) |C^F cap wB|. On wB = w T U,
    torus conjugation scales the superdiagonal of the U factor by the simple
    roots, so those entries are normalized to 0/1 with weight (p-1) per 1;
    scalars normalize the first torus entry to 1.
    """
    from .chevalley import is_regular

    if spec.twist is not TwistKind.TRIVIAL:
        raise NotImplementedError("geometric cell counts are implemented for the trivial twist")
    gl = GroupSpec("GL", spec.n, spec.p)
    if not is_regular(h, gl).regular:
        raise ValueError(f"{h!r} is not regular; the class predicate assumes it is")
    p, n = spec.p, spec.n
    predicate = _class_predicate(h)
    det_h = h.det
    lam_pow = np.array([pow(x, n, p) for x in range(p)], dtype=np.int64)
    inv = np.array([pow(x, -1, p) if x else 0 for x in range(p)], dtype=np.int64)

    sup = [(i, i + 1) for i in range(n - 1)]
    free = [(i, j) for i in range(n) for j in range(i + 2, n)]
    per_w = 2 ** len(sup) * (p - 1) ** (n - 1) * p ** len(free) * (p - 1)
    if per_w * math.factorial(n) > cap:
        raise OrbitTooLarge(f"geometric count work {per_w * math.factorial(n)} exceeds cap {cap}")

    out = {}
    for w in enumerate_group(gl.weyl):
        pw = _w_rep(w, gl)
        total = 0
        space = itertools.product(
            itertools.product((0, 1), repeat=len(sup)),
            itertools.product(range(1, p), repeat=n - 1),
            itertools.product(range(p), repeat=len(free)),
        )
        while True:
            block = list(itertools.islice(space, chunk))
            if not block:
                break
            m = len(block)
            y = np.zeros((m, n, n), dtype=np.int64)
            sup_vals = np.array([b[0] for b in block], dtype=np.int64).reshape(m, len(sup))
            tor = np.array([b[1] for b in block], dtype=np.int64).reshape(m, n - 1)
            fr = np.array([b[2] for b in block], dtype=np.int64).reshape(m, len(free))
            v = np.broadcast_to(np.eye(n, dtype=np.int64), (m, n, n)).copy()
            for k, (i, j) in enumerate(sup):
                v[:, i, j] = sup_vals[:, k]
            for k, (i, j) in enumerate(free):
                v[:, i, j] = fr[:, k]
            t = np.ones((m, n), dtype=np.int64)
            t[:, 1:] = tor
            y = batch_matmul(np.broadcast_to(pw, v.shape), t[:, :, None] * v % p, p)
            weight = (p - 1) ** sup_vals.sum(axis=1)
            need = det_h * inv[batch_det(y, p)] % p  # lambda^n must equal this
            for lam in range(1, p):
                mask = lam_pow[lam] == need
                if not mask.any():
                    continue
                ok = predicate(y[mask] * lam % p)
                total += int(weight[mask][ok].sum())
        out[w] = total * p ** w.length
    return out


# -- serialization -------------------------------------------------------------------------------


def count_table_csv(rows: Iterable[tuple[str, str, str, str, int, int]]) -> str:
    """rows: (scenario, quantity, w, w', prime, count)"""
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["scenario", "quantity", "w", "w_prime", "prime", "count"])
    for row in rows:
        writer.writerow(row)
    return buf.getvalue()


def fits_to_json(fits: Mapping[str, FittedPolynomial]) -> str:
    return json.dumps({k: v.to_record() for k, v in sorted(fits.items())}, indent=2, sort_keys=True)


def fits_from_json(text: str) -> dict[str, FittedPolynomial]:
    return {k: FittedPolynomial.from_record(v) for k, v in json.loads(text).items()}
