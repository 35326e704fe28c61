"""
Matrices over prime fields, Bruhat decomposition and the flip twist.

Two layers live here. ``FieldElement`` / ``MatrixFq`` / ``bruhat_word`` are the
exact scalar API. The ``batch_*`` functions act on int64 arrays of shape
(m, n, n) holding residues in [0, p) and are what the counting loops use.

Conventions: B is the upper triangular Borel, U its unitriangular radical,
U^- the lower unitriangular matrices. A permutation w of {0..n-1} is
represented by P_w with P_w e_j = e_{w(j)}; a matrix g lies in B P_w B iff the
Weyl component of ``bruhat_word(g)`` is w.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from functools import cached_property, lru_cache
from itertools import permutations
from typing import Iterable, Sequence

import numpy as np
from sympy import isprime

from .coxeter import CoxeterDatum, WeylElement

__all__ = [
    "FieldElement", "MatrixFq", "BruhatFactors", "TwistKind", "SingularMatrix",
    "bruhat_word", "twist", "permutation_matrix", "flip_matrix",
    "batch_weyl_codes", "batch_det", "batch_charpoly", "batch_matmul",
    "batch_unipotent_inverse", "batch_twist_unipotent", "encode", "decode",
    "inverse_table", "weyl_from_code", "code_of",
]


class SingularMatrix(ValueError):
    pass


@lru_cache(maxsize=None)
def _check_prime(p: int) -> int:
    if not isprime(p):
        raise ValueError(f"{p} is not prime")
    return p


@dataclass(frozen=True)
class FieldElement:
    value: int
    p: int

    def __post_init__(self):
        _check_prime(self.p)
        object.__setattr__(self, "value", self.value % self.p)

    def _coerce(self, other) -> int:
        if isinstance(other, FieldElement):
            if other.p != self.p:
                raise ValueError(f"mixing F_{self.p} and F_{other.p}")
            return other.value
        return int(other) % self.p

    def __add__(self, other):
        return FieldElement(self.value + self._coerce(other), self.p)

    __radd__ = __add__

    def __sub__(self, other):
        return FieldElement(self.value - self._coerce(other), self.p)

    def __rsub__(self, other):
        return FieldElement(self._coerce(other) - self.value, self.p)

    def __neg__(self):
        return FieldElement(-self.value, self.p)

    def __mul__(self, other):
        return FieldElement(self.value * self._coerce(other), self.p)

    __rmul__ = __mul__

    def inverse(self) -> FieldElement:
        if self.value == 0:
            raise ZeroDivisionError(f"0 has no inverse in F_{self.p}")
        return FieldElement(pow(self.value, -1, self.p), self.p)

    def __truediv__(self, other):
        return self * FieldElement(self._coerce(other), self.p).inverse()

    def __rtruediv__(self, other):
        return FieldElement(self._coerce(other), self.p) * self.inverse()

    def __pow__(self, k: int):
        if k < 0:
            return self.inverse() ** (-k)
        return FieldElement(pow(self.value, k, self.p), self.p)

    def __eq__(self, other):
        if isinstance(other, FieldElement):
            return self.p == other.p and self.value == other.value
        if isinstance(other, int):
            return self.value == other % self.p
        return NotImplemented

    def __hash__(self):
        return hash((self.value, self.p))

    def __int__(self):
        return self.value

    def __repr__(self):
        return f"{self.value} (mod {self.p})"


Rows = tuple[tuple[int, ...], ...]


@dataclass(frozen=True)
class MatrixFq:
    rows: Rows
    p: int

    def __post_init__(self):
        _check_prime(self.p)
        rows = tuple(tuple(int(x) % self.p for x in row) for row in self.rows)
        if not rows or any(len(row) != len(rows) for row in rows):
            raise ValueError("matrix must be square and nonempty")
        object.__setattr__(self, "rows", rows)

    # -- constructors ---------------------------------------------------

    @classmethod
    def identity(cls, n: int, p: int) -> MatrixFq:
        return cls(tuple(tuple(int(i == j) for j in range(n)) for i in range(n)), p)

    @classmethod
    def diagonal(cls, entries: Sequence[int], p: int) -> MatrixFq:
        n = len(entries)
        return cls(tuple(tuple(entries[i] if i == j else 0 for j in range(n)) for i in range(n)), p)

    @classmethod
    def from_array(cls, a, p: int) -> MatrixFq:
        return cls(tuple(tuple(int(x) for x in row) for row in np.asarray(a)), p)

    @classmethod
    def parse(cls, text: str, p: int) -> MatrixFq:
        """'1 2; 0 1' -> [[1, 2], [0, 1]], entries reduced mod p."""
        rows = [row.split() for row in text.strip().split(";")]
        return cls(tuple(tuple(int(x) for x in row) for row in rows), p)

    # -- basic data -----------------------------------------------------

    @property
    def n(self) -> int:
        return len(self.rows)

    def __getitem__(self, ij: tuple[int, int]) -> int:
        i, j = ij
        return self.rows[i][j]

    def to_array(self) -> np.ndarray:
        return np.array(self.rows, dtype=np.int64)

    def to_text(self) -> str:
        return "; ".join(" ".join(map(str, row)) for row in self.rows)

    def __str__(self):
        return self.to_text()

    def __repr__(self):
        return f"MatrixFq([{self.to_text()}], p={self.p})"

    def key(self) -> int:
        return int(encode(self.to_array()[None], self.p)[0])

    # -- arithmetic -----------------------------------------------------

    def _check(self, other: MatrixFq):
        if other.p != self.p or other.n != self.n:
            raise ValueError("matrices over different fields or of different sizes")

    def __mul__(self, other: MatrixFq) -> MatrixFq:
        if isinstance(other, int):
            return MatrixFq(tuple(tuple(x * other for x in row) for row in self.rows), self.p)
        self._check(other)
        n, p = self.n, self.p
        cols = list(zip(*other.rows))
        return MatrixFq(
            tuple(tuple(sum(a * b for a, b in zip(row, col)) % p for col in cols) for row in self.rows),
            p,
        )

    __rmul__ = __mul__

    def __add__(self, other: MatrixFq) -> MatrixFq:
        self._check(other)
        return MatrixFq(tuple(tuple(a + b for a, b in zip(r, s)) for r, s in zip(self.rows, other.rows)), self.p)

    def __sub__(self, other: MatrixFq) -> MatrixFq:
        self._check(other)
        return MatrixFq(tuple(tuple(a - b for a, b in zip(r, s)) for r, s in zip(self.rows, other.rows)), self.p)

    def transpose(self) -> MatrixFq:
        return MatrixFq(tuple(zip(*self.rows)), self.p)

    def __pow__(self, k: int) -> MatrixFq:
        if k < 0:
            return self.inverse() ** (-k)
        out, base = MatrixFq.identity(self.n, self.p), self
        while k:
            if k & 1:
                out = out * base
            base = base * base
            k >>= 1
        return out

    @cached_property
    def det(self) -> int:
        a = [list(row) for row in self.rows]
        n, p, det = self.n, self.p, 1
        for c in range(n):
            piv = next((r for r in range(c, n) if a[r][c]), None)
            if piv is None:
                return 0
            if piv != c:
                a[c], a[piv] = a[piv], a[c]
                det = -det
            det = det * a[c][c] % p
            inv = pow(a[c][c], -1, p)
            for r in range(c + 1, n):
                f = a[r][c] * inv % p
                if f:
                    a[r] = [(x - f * y) % p for x, y in zip(a[r], a[c])]
        return det % p

    def is_invertible(self) -> bool:
        return self.det != 0

    def inverse(self) -> MatrixFq:
        n, p = self.n, self.p
        a = [list(row) + [int(i == j) for j in range(n)] for i, row in enumerate(self.rows)]
        for c in range(n):
            piv = next((r for r in range(c, n) if a[r][c]), None)
            if piv is None:
                raise SingularMatrix(f"singular matrix {self.to_text()} over F_{p}")
            a[c], a[piv] = a[piv], a[c]
            inv = pow(a[c][c], -1, p)
            a[c] = [x * inv % p for x in a[c]]
            for r in range(n):
                if r != c and a[r][c]:
                    f = a[r][c]
                    a[r] = [(x - f * y) % p for x, y in zip(a[r], a[c])]
        return MatrixFq(tuple(tuple(row[n:]) for row in a), p)

    def rank(self) -> int:
        return rank_mod_p([list(row) for row in self.rows], self.p)

    # -- shape predicates -------------------------------------------------

    def is_upper_triangular(self) -> bool:
        return all(self.rows[i][j] == 0 for i in range(self.n) for j in range(i))

    def is_lower_triangular(self) -> bool:
        return self.transpose().is_upper_triangular()

    def is_diagonal(self) -> bool:
        return self.is_upper_triangular() and self.is_lower_triangular()

    def is_upper_unitriangular(self) -> bool:
        return self.is_upper_triangular() and all(self.rows[i][i] == 1 for i in range(self.n))

    def is_scalar(self) -> bool:
        return self.is_diagonal() and len({self.rows[i][i] for i in range(self.n)}) == 1


def rank_mod_p(a: list[list[int]], p: int) -> int:
    a = [[x % p for x in row] for row in a]
    rank, cols = 0, len(a[0]) if a else 0
    for c in range(cols):
        piv = next((r for r in range(rank, len(a)) if a[r][c]), None)
        if piv is None:
            continue
        a[rank], a[piv] = a[piv], a[rank]
        inv = pow(a[rank][c], -1, p)
        for r in range(rank + 1, len(a)):
            if a[r][c]:
                f = a[r][c] * inv % p
                a[r] = [(x - f * y) % p for x, y in zip(a[r], a[rank])]
        rank += 1
    return rank


# -- Weyl group <-> permutation matrices ---------------------------------


def permutation_matrix(w: WeylElement | Sequence[int], p: int) -> MatrixFq:
    images = w.permutation() if isinstance(w, WeylElement) else tuple(w)
    n = len(images)
    rows = [[0] * n for _ in range(n)]
    for j, i in enumerate(images):
        rows[i][j] = 1
    return MatrixFq(tuple(map(tuple, rows)), p)


def code_of(images: Sequence[int]) -> int:
    n = len(images)
    return sum(int(i) * n ** j for j, i in enumerate(images))


@lru_cache(maxsize=None)
def _code_table(n: int) -> dict[int, WeylElement]:
    datum = CoxeterDatum("A", n - 1)
    return {code_of(perm): datum.from_permutation(perm) for perm in permutations(range(n))}


def weyl_from_code(code: int, n: int) -> WeylElement:
    return _code_table(n)[int(code)]


# -- Bruhat decomposition -----------------------------------------------------


@dataclass(frozen=True)
class BruhatFactors:
    """g = u1 * w_dot * torus * u2 with u2 in U cap w^{-1} U^- w."""

    u1: MatrixFq
    w: WeylElement
    torus: MatrixFq
    u2: MatrixFq

    @property
    def w_dot(self) -> MatrixFq:
        return permutation_matrix(self.w, self.u1.p)

    def product(self) -> MatrixFq:
        return self.u1 * self.w_dot * self.torus * self.u2


def _pivot_rows(a: list[list[int]], p: int):
    """Column elimination shared by bruhat_word; mutates a, returns w and the
    accumulated right factor R^{-1} (a = g R^{-1} afterwards)."""
    n = len(a)
    rinv = [[int(i == j) for j in range(n)] for i in range(n)]
    images = []
    for j in range(n):
        i = next((r for r in range(n - 1, -1, -1) if a[r][j]), None)
        if i is None:
            raise SingularMatrix("singular matrix has no Bruhat decomposition")
        images.append(i)
        inv = pow(a[i][j], -1, p)
        for k in range(j + 1, n):
            c = a[i][k] * inv % p
            if c:
                for r in range(n):
                    a[r][k] = (a[r][k] - c * a[r][j]) % p
                    rinv[r][k] = (rinv[r][k] - c * rinv[r][j]) % p
    return images, rinv


def bruhat_word(g: MatrixFq) -> BruhatFactors:
    n, p = g.n, g.p
    a = [list(row) for row in g.rows]
    images, rinv = _pivot_rows(a, p)
    w = CoxeterDatum("A", n - 1).from_permutation(images) if n > 1 else None
    if w is None:
        raise ValueError("1x1 matrices have a trivial Weyl group; use n >= 2")
    # a = g R^{-1} is now L * monomial with L upper unitriangular
    r = MatrixFq(tuple(map(tuple, rinv)), p).inverse()
    torus = MatrixFq.diagonal([a[images[j]][j] for j in range(n)], p)
    # split R = R1 R2, R1 in U cap w^{-1} U w, R2 in U cap w^{-1} U^- w
    r2 = [list(row) for row in r.rows]
    for j in range(n):
        for i in range(j):
            if images[i] < images[j] and r2[i][j]:
                c = r2[i][j]
                r2[i] = [(x - c * y) % p for x, y in zip(r2[i], r2[j])]
    u2 = MatrixFq(tuple(map(tuple, r2)), p)
    w_dot = permutation_matrix(images, p)
    u1 = g * u2.inverse() * torus.inverse() * w_dot.inverse()
    assert u1.is_upper_unitriangular(), "Bruhat factor u1 is not unitriangular"
    return BruhatFactors(u1, w, torus, u2)


# -- twists ---------------------------------------------------------------------


class TwistKind(enum.Enum):
    TRIVIAL = "trivial"
    FLIP = "flip"

    def __str__(self):
        return self.value


@lru_cache(maxsize=None)
def flip_matrix(n: int, p: int) -> MatrixFq:
    """Antidiagonal J with J[i, n-1-i] = (-1)^i."""
    return MatrixFq(
        tuple(tuple((-1) ** i if j == n - 1 - i else 0 for j in range(n)) for i in range(n)), p
    )


def twist(g: MatrixFq, kind: TwistKind) -> MatrixFq:
    if kind is TwistKind.TRIVIAL:
        return g
    j = flip_matrix(g.n, g.p)
    return j * g.inverse().transpose() * j.inverse()


# -- batch kernels -------------------------------------------------------------


@lru_cache(maxsize=None)
def inverse_table(p: int) -> np.ndarray:
    table = np.zeros(p, dtype=np.int64)
    for x in range(1, p):
        table[x] = pow(x, -1, p)
    return table


def _key_powers(n: int, p: int) -> np.ndarray:
    if (n * n) * np.log2(p) >= 63:
        raise OverflowError(f"{n}x{n} matrices over F_{p} do not fit a 64-bit key")
    return p ** np.arange(n * n, dtype=np.int64)


def encode(a: np.ndarray, p: int) -> np.ndarray:
    """Canonical int64 key of each matrix (base-p digits, row major)."""
    m, n, _ = a.shape
    return a.reshape(m, n * n) @ _key_powers(n, p)


def decode(keys: np.ndarray, n: int, p: int) -> np.ndarray:
    keys = np.asarray(keys, dtype=np.int64)
    digits = (keys[:, None] // _key_powers(n, p)[None, :]) % p
    return digits.reshape(len(keys), n, n)


def batch_matmul(a: np.ndarray, b: np.ndarray, p: int) -> np.ndarray:
    return np.matmul(a, b) % p


def batch_weyl_codes(a: np.ndarray, p: int) -> np.ndarray:
    """Weyl component of each matrix in the batch, as ``code_of`` integers."""
    a = np.array(a, dtype=np.int64, copy=True)
    m, n, _ = a.shape
    inv = inverse_table(p)
    idx = np.arange(m)
    codes = np.zeros(m, dtype=np.int64)
    for j in range(n):
        nonzero = a[:, ::-1, j] != 0
        if not nonzero.any(axis=1).all():
            raise SingularMatrix("batch contains a singular matrix")
        piv_row = n - 1 - nonzero.argmax(axis=1)
        codes += piv_row * n ** j
        if j + 1 < n:
            piv_inv = inv[a[idx, piv_row, j]]
            factors = a[idx, piv_row, j + 1:] * piv_inv[:, None] % p  # (m, n-j-1)
            a[:, :, j + 1:] = (a[:, :, j + 1:] - a[:, :, j:j + 1] * factors[:, None, :]) % p
    return codes


@lru_cache(maxsize=None)
def _signed_perms(k: int):
    out = []
    for perm in permutations(range(k)):
        inversions = sum(1 for i in range(k) for j in range(i + 1, k) if perm[i] > perm[j])
        out.append((perm, -1 if inversions % 2 else 1))
    return tuple(out)


def batch_det(a: np.ndarray, p: int) -> np.ndarray:
    """Leibniz determinant mod p; fine for the n <= 4 this package targets."""
    m, n, _ = a.shape
    total = np.zeros(m, dtype=np.int64)
    for perm, sign in _signed_perms(n):
        term = np.ones(m, dtype=np.int64)
        for i, j in enumerate(perm):
            term = term * a[:, i, j] % p
        total = (total + sign * term) % p
    return total


def batch_charpoly(a: np.ndarray, p: int) -> np.ndarray:
    """
    Coefficients (c_0, ..., c_{n-1}) of det(xI - a) = x^n + c_{n-1} x^{n-1} + ... + c_0,
    computed from sums of principal minors. Returns shape (m, n).
    """
    from itertools import combinations

    m, n, _ = a.shape
    out = np.zeros((m, n), dtype=np.int64)
    for k in range(1, n + 1):
        e_k = np.zeros(m, dtype=np.int64)
        for subset in combinations(range(n), k):
            sub = a[:, subset][:, :, subset]
            e_k = (e_k + batch_det(sub, p)) % p
        # coefficient of x^{n-k} is (-1)^k e_k
        out[:, n - k] = ((-1) ** k * e_k) % p
    return out


def batch_unipotent_inverse(u: np.ndarray, p: int) -> np.ndarray:
    """Inverse of unitriangular matrices: sum_k (I - u)^k, nilpotent series."""
    m, n, _ = u.shape
    eye = np.broadcast_to(np.eye(n, dtype=np.int64), u.shape)
    nil = (eye - u) % p
    out = eye.copy()
    power = eye.copy()
    for _ in range(n - 1):
        power = batch_matmul(power, nil, p)
        out = (out + power) % p
    return out


def flip_conjugate_transpose(x: np.ndarray) -> np.ndarray:
    """J x^T J^{-1} for a batch: entry (a, b) is (-1)^{a+b} x[n-1-b, n-1-a]."""
    n = x.shape[-1]
    signs = np.array([[(-1) ** (a + b) for b in range(n)] for a in range(n)], dtype=np.int64)
    return x[..., ::-1, ::-1].swapaxes(-1, -2) * signs


def batch_twist_unipotent(u: np.ndarray, p: int, u_inv: np.ndarray | None = None) -> np.ndarray:
    """Flip twist J (u^{-1})^T J^{-1} of a batch of unitriangular matrices."""
    if u_inv is None:
        u_inv = batch_unipotent_inverse(u, p)
    return flip_conjugate_transpose(u_inv) % p
