"""
GL_n(F_p) and SL_n(F_p): twisted conjugation orbits, centralizers,
regularity, lower-triangular orbit representatives and flag enumeration.

The twisted action is g ._d h = g h d(g)^{-1}, with d the trivial or flip
twist of ``matfq``. Orbits are computed by breadth-first closure over a
small generating set, with matrices hashed through their int64 key.
"""

from __future__ import annotations

import enum
import itertools
import logging
import math
import re
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property, lru_cache
from typing import Iterator, Sequence

import numpy as np
import sympy
from sympy.ntheory import primitive_root

from .coxeter import CoxeterDatum, DiagramAutomorphism, WeylElement, enumerate_group
from .matfq import (
    MatrixFq,
    TwistKind,
    batch_det,
    batch_matmul,
    decode,
    encode,
    flip_matrix,
    permutation_matrix,
    rank_mod_p,
    twist,
)

log = logging.getLogger(__name__)

__all__ = [
    "GroupSpec", "ElementTemplate", "TwistedClassOrbit", "RegularityCertificate",
    "RegularityKind", "InvalidForPrime", "OrbitTooLarge", "NotInGroup",
    "group_order", "twisted_conjugate", "orbit", "geometric_orbits",
    "fusion_representatives", "fusion_prediction", "gl_class_keys",
    "centralizer_order", "is_regular", "lie_centralizer_dim", "twisted_regularity",
    "steinberg_representative", "enumerate_flag_reps", "flag_rep_batches",
    "charpoly", "parse_template",
]

DEFAULT_ORBIT_CAP = 10 ** 7
DEFAULT_FLAG_CAP = 10 ** 6
DEFAULT_CENTRALIZER_CAP = 10 ** 7


class InvalidForPrime(ValueError):
    """A template does not give a valid group element at this prime."""


class OrbitTooLarge(RuntimeError):
    pass


class NotInGroup(ValueError):
    pass


@dataclass(frozen=True)
class GroupSpec:
    family: str  # "GL" or "SL"
    n: int
    p: int
    twist: TwistKind = TwistKind.TRIVIAL

    def __post_init__(self):
        if self.family not in ("GL", "SL"):
            raise ValueError(f"unsupported family {self.family!r}")
        if self.n < 2:
            raise ValueError("n must be at least 2")
        if not sympy.isprime(self.p):
            raise ValueError(f"{self.p} is not prime")
        if isinstance(self.twist, str):
            object.__setattr__(self, "twist", TwistKind(self.twist))

    def __str__(self):
        tw = "" if self.twist is TwistKind.TRIVIAL else f"^{self.twist}"
        return f"{self.family}{self.n}(F{self.p}){tw}"

    @property
    def center_caveat(self) -> bool:
        """The flip twist on GL_n acts by inversion on the center."""
        return self.family == "GL" and self.twist is TwistKind.FLIP

    @property
    def weyl(self) -> CoxeterDatum:
        return CoxeterDatum("A", self.n - 1)

    @property
    def delta(self) -> DiagramAutomorphism:
        if self.twist is TwistKind.FLIP and self.n > 2:
            return DiagramAutomorphism.flip(self.weyl)
        return DiagramAutomorphism.identity(self.weyl)

    @property
    def order(self) -> int:
        return group_order(self)

    @property
    def borel_order(self) -> int:
        n, p = self.n, self.p
        torus = (p - 1) ** n if self.family == "GL" else (p - 1) ** (n - 1)
        return torus * p ** (n * (n - 1) // 2)

    @property
    def dim_borel(self) -> int:
        return self.n * (self.n + 1) // 2 - (self.family == "SL")

    @property
    def dim_torus(self) -> int:
        return self.n - (self.family == "SL")

    @cached_property
    def dim_torus_fixed(self) -> int:
        """dim T^delta, from the action of the twist on cocharacters."""
        n = self.n
        if self.twist is TwistKind.TRIVIAL:
            act = sympy.eye(n)
        else:
            # diag(a_1..a_n) -> diag(a_n^{-1} .. a_1^{-1})
            act = sympy.zeros(n, n)
            for i in range(n):
                act[n - 1 - i, i] = -1
        rows = act - sympy.eye(n)
        if self.family == "SL":
            rows = rows.col_join(sympy.ones(1, n))
        return n - rows.rank()

    def with_prime(self, p: int) -> GroupSpec:
        return GroupSpec(self.family, self.n, p, self.twist)

    def contains(self, g: MatrixFq) -> bool:
        if g.p != self.p or g.n != self.n:
            return False
        return g.det == 1 if self.family == "SL" else g.det != 0

    def check(self, g: MatrixFq) -> MatrixFq:
        if not self.contains(g):
            raise NotInGroup(f"{g!r} is not in {self}")
        return g

    def twist_of(self, g: MatrixFq) -> MatrixFq:
        return twist(g, self.twist)

    @cached_property
    def primitive_root(self) -> int:
        return int(primitive_root(self.p)) if self.p > 2 else 1

    def generators(self) -> list[MatrixFq]:
        """Transvections e_ij(1), plus a diagonal generator built on a primitive root."""
        n, p, z = self.n, self.p, self.primitive_root
        gens = []
        for i in range(n):
            for j in range(n):
                if i != j:
                    rows = [[int(a == b) for b in range(n)] for a in range(n)]
                    rows[i][j] = 1
                    gens.append(MatrixFq(tuple(map(tuple, rows)), p))
        if p > 2:
            if self.family == "GL":
                gens.append(MatrixFq.diagonal([z] + [1] * (n - 1), p))
            else:
                gens.append(MatrixFq.diagonal([z, pow(z, -1, p)] + [1] * (n - 2), p))
        return gens


def group_order(spec: GroupSpec) -> int:
    n, p = spec.n, spec.p
    order = math.prod(p ** n - p ** i for i in range(n))
    return order // (p - 1) if spec.family == "SL" else order


def twisted_conjugate(g: MatrixFq, h: MatrixFq, spec: GroupSpec) -> MatrixFq:
    spec.check(g)
    spec.check(h)
    return g * h * spec.twist_of(g).inverse()


# -- element templates ----------------------------------------------------------


@dataclass(frozen=True)
class ElementTemplate:
    """
    An integer recipe for a matrix, reduced mod p at each prime.

    diag:1,2,3        diagonal matrix
    jordan:3:1        single Jordan block of size 3, eigenvalue 1
    companion:c0,..,1 companion matrix of c0 + c1 x + ... + x^n (low first)
    literal:1 1; 0 1  explicit matrix
    """

    kind: str
    text: str
    entries: tuple[tuple[int, ...], ...]

    def __str__(self):
        return self.text

    @property
    def n(self) -> int:
        return len(self.entries)

    def build(self, p: int) -> MatrixFq:
        return MatrixFq(self.entries, p)

    def for_spec(self, spec: GroupSpec) -> MatrixFq:
        if self.n != spec.n:
            raise ValueError(f"template {self} has size {self.n}, group has n={spec.n}")
        h = self.build(spec.p)
        if not spec.contains(h):
            raise InvalidForPrime(f"{self} mod {spec.p} is not in {spec} (det {h.det})")
        return h


def parse_template(text: str) -> ElementTemplate:
    text = text.strip()
    kind, _, body = text.partition(":")
    if kind == "diag":
        vals = [int(x) for x in body.split(",")]
        n = len(vals)
        rows = tuple(tuple(vals[i] if i == j else 0 for j in range(n)) for i in range(n))
    elif kind == "jordan":
        m = re.fullmatch(r"(\d+):(-?\d+)", body.strip())
        if not m:
            raise ValueError(f"bad jordan template {text!r}")
        n, ev = int(m.group(1)), int(m.group(2))
        rows = tuple(
            tuple(ev if i == j else (1 if j == i + 1 else 0) for j in range(n)) for i in range(n)
        )
    elif kind == "companion":
        coeffs = [int(x) for x in body.split(",")]
        if len(coeffs) < 3 or coeffs[-1] != 1:
            raise ValueError(f"companion template needs a monic polynomial, low degree first: {text!r}")
        n = len(coeffs) - 1
        rows = [[0] * n for _ in range(n)]
        for i in range(1, n):
            rows[i][i - 1] = 1
        for i in range(n):
            rows[i][n - 1] = -coeffs[i]
        rows = tuple(map(tuple, rows))
    elif kind == "literal":
        rows = tuple(tuple(int(x) for x in row.split()) for row in body.strip().split(";"))
        if any(len(r) != len(rows) for r in rows):
            raise ValueError(f"literal template is not square: {text!r}")
    else:
        raise ValueError(f"unknown template kind {kind!r}")
    return ElementTemplate(kind, text, rows)


# -- orbits ------------------------------------------------------------------------


@dataclass
class TwistedClassOrbit:
    """A G^F-orbit under twisted conjugation; elements are stored as sorted int64 keys."""

    spec: GroupSpec
    base: MatrixFq
    keys: np.ndarray = field(repr=False)
    centralizer_order: int
    _cell_counts: dict | None = field(default=None, repr=False)

    def __len__(self):
        return len(self.keys)

    @property
    def size(self) -> int:
        return len(self.keys)

    def __contains__(self, g: MatrixFq) -> bool:
        k = g.key()
        i = np.searchsorted(self.keys, k)
        return bool(i < len(self.keys) and self.keys[i] == k)

    def matrices(self, chunk: int = 1 << 18) -> Iterator[np.ndarray]:
        for start in range(0, len(self.keys), chunk):
            yield decode(self.keys[start:start + chunk], self.spec.n, self.spec.p)

    def elements(self) -> Iterator[MatrixFq]:
        for batch in self.matrices():
            for a in batch:
                yield MatrixFq.from_array(a, self.spec.p)

    @property
    def min_key(self) -> int:
        return int(self.keys[0])


def _sorted_merge_new(visited: np.ndarray, cands: np.ndarray) -> np.ndarray:
    idx = np.searchsorted(visited, cands)
    idx_c = np.minimum(idx, len(visited) - 1)
    return cands[visited[idx_c] != cands]


def _action_pairs(spec: GroupSpec, generators: Sequence[MatrixFq]):
    return [(g.to_array(), spec.twist_of(g).inverse().to_array()) for g in generators]


def _closure(start: np.ndarray, pairs, p: int, cap: int) -> np.ndarray:
    """Sorted keys of the closure of the start batch under x -> g x t."""
    frontier = start
    visited = np.unique(encode(start, p))
    while len(frontier):
        cands = []
        for g, t in pairs:
            cands.append(encode(np.matmul(np.matmul(g, frontier) % p, t) % p, p))
        cands = np.unique(np.concatenate(cands))
        new = _sorted_merge_new(visited, cands)
        if len(visited) + len(new) > cap:
            raise OrbitTooLarge(f"orbit exceeds cap {cap}")
        if len(new):
            visited = np.union1d(visited, new)
        frontier = decode(new, start.shape[1], p)
    return visited


def orbit(h: MatrixFq, spec: GroupSpec, cap: int = DEFAULT_ORBIT_CAP) -> TwistedClassOrbit:
    spec.check(h)
    keys = _closure(h.to_array()[None], _action_pairs(spec, spec.generators()), spec.p, cap)
    order = group_order(spec)
    if order % len(keys):
        raise AssertionError(f"orbit size {len(keys)} does not divide |G| = {order}")
    return TwistedClassOrbit(spec, h, keys, order // len(keys))


def fusion_representatives(h: MatrixFq, spec: GroupSpec) -> list[MatrixFq]:
    """
    One element from each G^F-orbit in the rational points of the geometric
    class of h, in a prime-independent order.

    GL_n: [h] (centralizers are connected). SL_n, trivial twist: the
    SL_n(F_p)-orbits inside the GL_n(F_p)-class of h correspond to the cosets
    of D = det Z_GL(h)^F in F_p^*, and diag(a, 1, ..., 1) h diag(a, 1, ..., 1)^{-1}
    represents the coset of a. Cosets are ordered by their smallest element,
    so index 0 is the orbit of h. Twisted SL_n: only [h] (fusion is not
    computed).
    """
    spec.check(h)
    if spec.family == "GL" or spec.twist is not TwistKind.TRIVIAL:
        return [h]
    p, n = spec.p, spec.n
    dets = _centralizer_dets(h)
    seen: set[int] = set()
    reps = []
    for a in range(1, p):
        if a in seen:
            continue
        seen.update(a * d % p for d in dets)
        d_a = MatrixFq.diagonal([a] + [1] * (n - 1), p)
        reps.append(d_a * h * d_a.inverse())
    return reps


def _centralizer_dets(h: MatrixFq) -> set[int]:
    n, p = h.n, h.p
    basis = _commutant_basis(h)
    arr = np.array(basis, dtype=np.int64).reshape(len(basis), n, n)
    out: set[int] = set()
    coeff_iter = itertools.product(range(p), repeat=len(basis))
    while True:
        rows = list(itertools.islice(coeff_iter, 1 << 16))
        if not rows:
            break
        g = np.tensordot(np.array(rows, dtype=np.int64), arr, axes=(1, 0)) % p
        out.update(int(d) for d in np.unique(batch_det(g, p)) if d)
        if len(out) == p - 1:
            break
    return out


def fusion_prediction(h: MatrixFq, spec: GroupSpec) -> int | None:
    """
    Number of G^F-orbits predicted from the component group of the centralizer.

    For regular h in SL_n the component group is cyclic of order g, the gcd
    of the eigenvalue multiplicities, with Frobenius acting by p-th powers,
    which gives gcd(g, p - 1) classes. None when no prediction is made.
    """
    if spec.family == "GL" and spec.twist is TwistKind.TRIVIAL:
        return 1
    if spec.twist is not TwistKind.TRIVIAL:
        return None
    mults = [m for _, m in factor_mod_p(charpoly(h), spec.p)]
    return math.gcd(math.gcd(*mults), spec.p - 1)


def geometric_orbits(h: MatrixFq, spec: GroupSpec, cap: int = DEFAULT_ORBIT_CAP) -> list[TwistedClassOrbit]:
    """Explicit orbits of ``fusion_representatives``, in the same order."""
    return [orbit(r, spec, cap) for r in fusion_representatives(h, spec)]


def gl_class_keys(h: MatrixFq, cap: int = DEFAULT_ORBIT_CAP) -> np.ndarray:
    """Sorted keys of the GL_n(F_p)-conjugacy class of h; used to cross-check fusion."""
    gl = GroupSpec("GL", h.n, h.p)
    return _closure(h.to_array()[None], _action_pairs(gl, gl.generators()), h.p, cap)


# -- centralizers (linear algebra route) -------------------------------------------


def nullspace_mod_p(rows: list[list[int]], ncols: int, p: int) -> list[list[int]]:
    a = [[x % p for x in row] for row in rows]
    pivots = []
    r = 0
    for c in range(ncols):
        piv = next((i for i in range(r, len(a)) if a[i][c]), None)
        if piv is None:
            continue
        a[r], a[piv] = a[piv], a[r]
        inv = pow(a[r][c], -1, p)
        a[r] = [x * inv % p for x in a[r]]
        for i in range(len(a)):
            if i != r and a[i][c]:
                f = a[i][c]
                a[i] = [(x - f * y) % p for x, y in zip(a[i], a[r])]
        pivots.append(c)
        r += 1
    free = [c for c in range(ncols) if c not in pivots]
    basis = []
    for fcol in free:
        v = [0] * ncols
        v[fcol] = 1
        for i, pc in enumerate(pivots):
            v[pc] = -a[i][fcol] % p
        basis.append(v)
    return basis


def _commutant_basis(a: MatrixFq) -> list[list[int]]:
    """Basis (as flattened n*n vectors) of {X : X a = a X}."""
    n, p = a.n, a.p
    rows = []
    for i in range(n):
        for j in range(n):
            # (X a - a X)_{ij} = sum_k X_ik a_kj - a_ik X_kj
            row = [0] * (n * n)
            for k in range(n):
                row[i * n + k] += a[k, j]
                row[k * n + j] -= a[i, k]
            rows.append(row)
    return nullspace_mod_p(rows, n * n, p)


def centralizer_order(h: MatrixFq, spec: GroupSpec, cap: int = DEFAULT_CENTRALIZER_CAP) -> int:
    """
    |Z_{G,d}(h)^F| without enumerating the orbit.

    Trivial twist: units (det 1 for SL) of the commutant algebra of h.
    Flip twist: g h d(g)^{-1} = h  iff  g M g^T = M  with M = h J; such g
    commute with M M^{-T}, so the candidates are drawn from that commutant.
    """
    spec.check(h)
    n, p = spec.n, spec.p
    if spec.twist is TwistKind.TRIVIAL:
        basis = _commutant_basis(h)
        form = None
    else:
        m = h * flip_matrix(n, p)
        basis = _commutant_basis(m * m.transpose().inverse())
        form = m.to_array()
    d = len(basis)
    if p ** d > cap:
        raise OrbitTooLarge(f"centralizer search space p^{d} exceeds cap {cap}")
    basis_arr = np.array(basis, dtype=np.int64).reshape(d, n, n)
    total = 0
    chunk = max(1, (1 << 20) // max(1, p))
    coeff_iter = itertools.product(range(p), repeat=d)
    while True:
        coeffs = np.array(list(itertools.islice(coeff_iter, chunk)), dtype=np.int64)
        if not len(coeffs):
            break
        g = np.tensordot(coeffs, basis_arr, axes=(1, 0)) % p
        det = batch_det(g, p)
        ok = det == 1 if spec.family == "SL" else det != 0
        if form is not None:
            gm = batch_matmul(batch_matmul(g, np.broadcast_to(form, g.shape), p), g.swapaxes(1, 2), p)
            ok &= (gm == form).all(axis=(1, 2))
        total += int(ok.sum())
    return total


# -- regularity ---------------------------------------------------------------------


class RegularityKind(enum.Enum):
    SPLIT = "regular-semisimple-split"
    NONSPLIT = "regular-semisimple-nonsplit"
    UNIPOTENT = "regular-unipotent"
    MIXED = "regular-mixed"
    TWISTED = "regular-twisted"
    NOT_REGULAR = "not-regular"

    def __str__(self):
        return self.value


@dataclass(frozen=True)
class RegularityCertificate:
    kind: RegularityKind
    evidence: str
    shape: tuple[tuple[int, int], ...] = ()  # sorted (degree, multiplicity) of factors

    @property
    def regular(self) -> bool:
        return self.kind is not RegularityKind.NOT_REGULAR


def charpoly(h: MatrixFq) -> tuple[int, ...]:
    """Coefficients of det(xI - h), low degree first, leading 1 included."""
    from .matfq import batch_charpoly

    c = batch_charpoly(h.to_array()[None], h.p)[0]
    return tuple(int(x) for x in c) + (1,)


def factor_mod_p(coeffs: Sequence[int], p: int) -> list[tuple[tuple[int, ...], int]]:
    """Monic irreducible factors (low-first coefficient tuples) with multiplicities."""
    x = sympy.Symbol("x")
    poly = sympy.Poly(list(reversed(coeffs)), x, modulus=p)
    out = []
    for fac, mult in poly.factor_list()[1]:
        fac = fac.monic()
        out.append((tuple(int(c) % p for c in reversed(fac.all_coeffs())), mult))
    return sorted(out)


def _minpoly_is_charpoly(h: MatrixFq) -> bool:
    n = h.n
    power = MatrixFq.identity(n, h.p)
    vecs = []
    for _ in range(n):
        vecs.append([x for row in power.rows for x in row])
        power = power * h
    return rank_mod_p(vecs, h.p) == n


def _poly_text(coeffs: Sequence[int]) -> str:
    terms = []
    for k in range(len(coeffs) - 1, -1, -1):
        c = coeffs[k]
        if c:
            mono = "" if k == 0 else ("x" if k == 1 else f"x^{k}")
            terms.append(mono if (c == 1 and mono) else f"{c}{mono}")
    return " + ".join(terms) or "0"


def lie_centralizer_dim(h: MatrixFq, spec: GroupSpec) -> int:
    """
    Dimension of {X in Lie(G) : X h = h d(X)}, where d(X) = -J X^T J^{-1} for
    the flip. It contains the Lie algebra of Z_{G,d}(h), so it bounds
    dim Z_{G,d}(h) from above.
    """
    n, p = spec.n, spec.p
    jm = flip_matrix(n, p)
    jinv = jm.inverse()
    images = []
    for k in range(n):
        for l in range(n):
            e = MatrixFq(tuple(tuple(int(i == k and j == l) for j in range(n)) for i in range(n)), p)
            if spec.twist is TwistKind.TRIVIAL:
                img = e * h - h * e
            else:
                img = e * h + h * jm * e.transpose() * jinv
            images.append([x for row in img.rows for x in row])
    # images[c] is column c of the linear map; rows of the system are its transpose
    system = [[images[c][r] for c in range(n * n)] for r in range(n * n)]
    if spec.family == "SL":
        system.append([int(k == l) for k in range(n) for l in range(n)])
    return n * n - rank_mod_p(system, p)


def is_regular(h: MatrixFq, spec: GroupSpec) -> RegularityCertificate:
    """
    Trivial twist: h is regular iff its minimal polynomial is its
    characteristic polynomial.

    Flip twist: h is certified regular when the infinitesimal twisted
    centralizer has dimension dim T^d, since dim T^d <= dim Z <= that
    dimension. A larger value is inconclusive (it happens in bad
    characteristic) and is reported as not regular.
    """
    spec.check(h)
    if spec.twist is not TwistKind.TRIVIAL:
        d = lie_centralizer_dim(h, spec)
        target = spec.dim_torus_fixed
        if d == target:
            return RegularityCertificate(
                RegularityKind.TWISTED,
                f"infinitesimal twisted centralizer has dimension {d} = dim T^delta over F_{spec.p}",
            )
        return RegularityCertificate(
            RegularityKind.NOT_REGULAR,
            f"infinitesimal twisted centralizer has dimension {d} > dim T^delta = {target} "
            f"over F_{spec.p}; regularity not certified",
        )
    p, n = spec.p, spec.n
    cp = charpoly(h)
    factors = factor_mod_p(cp, p)
    shape = tuple(sorted((len(f) - 1, m) for f, m in factors))
    text = " * ".join(f"({_poly_text(f)})" + (f"^{m}" if m > 1 else "") for f, m in factors)
    if not _minpoly_is_charpoly(h):
        return RegularityCertificate(
            RegularityKind.NOT_REGULAR, f"minimal polynomial is a proper divisor of {text} over F_{p}", shape
        )
    evidence = f"minimal polynomial = characteristic polynomial = {text} over F_{p}"
    if factors == [((p - 1, 1), n)]:
        kind = RegularityKind.UNIPOTENT
    elif all(m == 1 for _, m in factors):
        kind = RegularityKind.SPLIT if all(d == 1 for d, _ in shape) else RegularityKind.NONSPLIT
    else:
        kind = RegularityKind.MIXED
    return RegularityCertificate(kind, evidence, shape)


def twisted_regularity(
    template: ElementTemplate,
    family: str,
    n: int,
    kind: TwistKind,
    primes: Sequence[int],
) -> RegularityCertificate:
    """
    Fit |Z_{G,d}(h)^F| over the primes where the template is valid and compare
    the fitted degree with dim T^d. Needs dim T^d + 3 valid primes.
    """
    from .counting import FitError, PointCountSeries, fit_polynomial

    spec0 = GroupSpec(family, n, primes[0], kind)
    target = spec0.dim_torus_fixed
    series = PointCountSeries(f"centralizer:{template}", "centralizer order")
    for p in primes:
        spec = spec0.with_prime(p)
        try:
            h = template.for_spec(spec)
        except InvalidForPrime as exc:
            log.info("skipping p=%d for %s: %s", p, template, exc)
            continue
        series.counts[p] = centralizer_order(h, spec)
    bound = target + 1
    if len(series.counts) < bound + 2:
        raise ValueError(
            f"twisted regularity needs {bound + 2} valid primes, got {len(series.counts)}"
        )
    try:
        fit = fit_polynomial(series, bound)
    except FitError as exc:
        return RegularityCertificate(RegularityKind.NOT_REGULAR, f"centralizer orders: {exc}")
    evidence = (
        f"centralizer orders {dict(series.counts)} fit {fit}, degree {fit.degree}; "
        f"dim T^delta = {target}"
    )
    if fit.degree == target:
        return RegularityCertificate(RegularityKind.TWISTED, evidence)
    return RegularityCertificate(RegularityKind.NOT_REGULAR, evidence)


# -- lower triangular representatives ------------------------------------------------


def _lower_triangular_keys(o: TwistedClassOrbit) -> np.ndarray:
    n = o.spec.n
    iu = np.triu_indices(n, 1)
    hits = []
    for batch in o.matrices():
        mask = (batch[:, iu[0], iu[1]] == 0).all(axis=1)
        hits.append(encode(batch[mask], o.spec.p))
    return np.sort(np.concatenate(hits)) if hits else np.zeros(0, dtype=np.int64)


@dataclass(frozen=True)
class SteinbergResult:
    element: MatrixFq
    orbit_index: int  # 0 = the orbit asked about, otherwise index into siblings + 1


def steinberg_representative(
    o: TwistedClassOrbit, siblings: Sequence[TwistedClassOrbit] = ()
) -> SteinbergResult:
    """
    A lower triangular element of the orbit: the base point if it already
    is one, else the one with smallest key. If the orbit has none, the first sibling orbit of the same geometric class that does is
    reported instead.
    """
    if o.base.is_lower_triangular():
        return SteinbergResult(o.base, 0)
    for index, candidate in enumerate([o, *siblings]):
        keys = _lower_triangular_keys(candidate)
        if len(keys):
            a = decode(keys[:1], o.spec.n, o.spec.p)[0]
            return SteinbergResult(MatrixFq.from_array(a, o.spec.p), index)
    raise LookupError(f"no lower triangular element in the geometric class of {o.base!r}")


# -- flags -------------------------------------------------------------------------------


@lru_cache(maxsize=None)
def _cell_positions(w: WeylElement) -> tuple[tuple[int, int], ...]:
    """Entries (i, j), i < j, of U cap w U^- w^{-1}."""
    winv = w.inverse().permutation()
    n = len(winv)
    return tuple((i, j) for i in range(n) for j in range(i + 1, n) if winv[i] > winv[j])


def _w_rep(w: WeylElement, spec: GroupSpec) -> np.ndarray:
    pw = permutation_matrix(w, spec.p).to_array()
    if spec.family == "SL" and permutation_matrix(w, spec.p).det != 1:
        pw[:, -1] = (-pw[:, -1]) % spec.p
    return pw


def flag_rep_batches(
    spec: GroupSpec, cap: int = DEFAULT_FLAG_CAP, chunk: int = 1 << 16
) -> Iterator[tuple[WeylElement, np.ndarray, np.ndarray]]:
    """
    Yields (w, u, w_dot) with u a batch of elements of U cap w U^- w^{-1};
    the coset representatives of the cell are u @ w_dot. For SL the
    representative w_dot carries a sign so it has determinant 1.
    """
    p, n = spec.p, spec.n
    total = sum(p ** w.length for w in enumerate_group(spec.weyl))
    if total > cap:
        raise OrbitTooLarge(f"{total} flags exceed cap {cap}")
    for w in enumerate_group(spec.weyl):
        pos = _cell_positions(w)
        wd = _w_rep(w, spec)
        it = itertools.product(range(p), repeat=len(pos))
        while True:
            rows = list(itertools.islice(it, chunk))
            if not rows:
                break
            vals = np.array(rows, dtype=np.int64).reshape(len(rows), len(pos))
            u = np.broadcast_to(np.eye(n, dtype=np.int64), (len(vals), n, n)).copy()
            for k, (i, j) in enumerate(pos):
                u[:, i, j] = vals[:, k]
            yield w, u, wd


def enumerate_flag_reps(spec: GroupSpec, cap: int = DEFAULT_FLAG_CAP) -> Iterator[MatrixFq]:
    for _, u, wd in flag_rep_batches(spec, cap):
        for a in batch_matmul(u, np.broadcast_to(wd, u.shape), spec.p):
            yield MatrixFq.from_array(a, spec.p)
