"""
Finite Weyl groups of classical type.

Elements are stored as signed permutations acting on the standard basis
vectors of the ambient space of the root system:

    A_r : permutations of e_1, ..., e_{r+1}
    B_r, C_r, D_r : signed permutations of e_1, ..., e_r

The simple reflections are s_i = (i, i+1) for i < r, and

    A_r : s_r = (r, r+1)
    B_r, C_r : s_r flips the sign of e_r
    D_r : s_r is the reflection in e_{r-1} + e_r

Lengths count positive roots sent to negative roots. The canonical word of an
element is its lexicographically least reduced word.
"""

from __future__ import annotations

import math
import re
from collections import deque
from dataclasses import dataclass, field
from functools import cached_property, lru_cache
from typing import Iterable, Sequence

__all__ = [
    "CoxeterDatum", "WeylElement", "DiagramAutomorphism", "GroupTooLarge",
    "multiply", "longest_element", "apply_automorphism", "support",
    "twisted_support", "enumerate_group", "parse_datum",
]

DEFAULT_GROUP_CAP = 10_000

# signed images: perm[i] = +-(j+1) means e_{i+1} -> +-e_{j+1}
SignedPerm = tuple[int, ...]


class GroupTooLarge(ValueError):
    pass


@dataclass(frozen=True)
class CoxeterDatum:
    family: str
    rank: int

    def __post_init__(self):
        if self.family not in ("A", "B", "C", "D"):
            raise ValueError(f"unsupported family {self.family!r}")
        if self.rank < 1:
            raise ValueError("rank must be positive")
        if self.family in ("B", "C") and self.rank < 2:
            raise ValueError(f"{self.family}{self.rank} is not a valid type")
        if self.family == "D" and self.rank < 4:
            raise ValueError("type D needs rank >= 4 (D2, D3 are A1xA1, A3)")

    def __str__(self):
        return f"{self.family}{self.rank}"

    def __repr__(self):
        return f"CoxeterDatum({self})"

    @property
    def simple_set(self) -> range:
        return range(1, self.rank + 1)

    @property
    def dimension(self) -> int:
        """Number of coordinates of the ambient space."""
        return self.rank + 1 if self.family == "A" else self.rank

    @cached_property
    def coxeter_matrix(self) -> tuple[tuple[int, ...], ...]:
        r = self.rank
        m = [[2] * r for _ in range(r)]
        for i in range(r):
            m[i][i] = 1
        for i in range(r - 1):
            m[i][i + 1] = m[i + 1][i] = 3
        if self.family in ("B", "C"):
            m[r - 2][r - 1] = m[r - 1][r - 2] = 4
        elif self.family == "D":
            # s_{r-1} and s_r both hang off s_{r-2}
            m[r - 2][r - 1] = m[r - 1][r - 2] = 2
            m[r - 3][r - 1] = m[r - 1][r - 3] = 3
        return tuple(tuple(row) for row in m)

    @property
    def order(self) -> int:
        r = self.rank
        if self.family == "A":
            return math.factorial(r + 1)
        if self.family in ("B", "C"):
            return 2 ** r * math.factorial(r)
        return 2 ** (r - 1) * math.factorial(r)

    @property
    def num_positive_roots(self) -> int:
        return len(self.positive_roots)

    @cached_property
    def positive_roots(self) -> tuple[tuple[int, ...], ...]:
        m = self.dimension
        roots = []
        for i in range(m):
            for j in range(i + 1, m):
                v = [0] * m
                v[i], v[j] = 1, -1
                roots.append(tuple(v))
                if self.family != "A":
                    v = [0] * m
                    v[i], v[j] = 1, 1
                    roots.append(tuple(v))
            if self.family in ("B", "C"):
                v = [0] * m
                v[i] = 1
                roots.append(tuple(v))
        return tuple(roots)

    @cached_property
    def simple_perms(self) -> tuple[SignedPerm, ...]:
        m = self.dimension
        ident = list(range(1, m + 1))
        gens = []
        for i in range(self.rank):
            img = ident[:]
            if i < m - 1 and (self.family == "A" or i < self.rank - 1):
                img[i], img[i + 1] = img[i + 1], img[i]
            elif self.family in ("B", "C"):
                img[m - 1] = -m
            else:  # D
                img[m - 2], img[m - 1] = -m, -(m - 1)
            gens.append(tuple(img))
        return tuple(gens)

    # -- element constructors -------------------------------------------

    def identity(self) -> WeylElement:
        return WeylElement(self, tuple(range(1, self.dimension + 1)))

    def s(self, i: int) -> WeylElement:
        if i not in self.simple_set:
            raise ValueError(f"no simple reflection s_{i} in {self}")
        return WeylElement(self, self.simple_perms[i - 1])

    def from_word(self, word: Iterable[int]) -> WeylElement:
        perm = self.identity().perm
        for i in word:
            if i not in self.simple_set:
                raise ValueError(f"no simple reflection s_{i} in {self}")
            perm = _compose(perm, self.simple_perms[i - 1])
        return WeylElement(self, perm)

    def parse_element(self, text: str) -> WeylElement:
        """Inverse of ``str(w)``: comma separated letters, '' is the identity."""
        text = text.strip()
        if not text:
            return self.identity()
        return self.from_word(int(tok) for tok in text.split(","))

    def from_permutation(self, images: Sequence[int]) -> WeylElement:
        """Type A only: ``images[j]`` is the 0-based image of j."""
        if self.family != "A":
            raise ValueError("from_permutation is for type A")
        if sorted(images) != list(range(self.dimension)):
            raise ValueError(f"{images!r} is not a permutation of size {self.dimension}")
        return WeylElement(self, tuple(j + 1 for j in images))


def parse_datum(text: str) -> CoxeterDatum:
    m = re.fullmatch(r"\s*([ABCD])(\d+)\s*", text)
    if not m:
        raise ValueError(f"cannot parse Coxeter type {text!r}")
    return CoxeterDatum(m.group(1), int(m.group(2)))


def _compose(x: SignedPerm, y: SignedPerm) -> SignedPerm:
    # (xy)(e_i) = x(y(e_i))
    out = []
    for img in y:
        j = abs(img) - 1
        out.append(x[j] if img > 0 else -x[j])
    return tuple(out)


def _invert(x: SignedPerm) -> SignedPerm:
    out = [0] * len(x)
    for i, img in enumerate(x):
        out[abs(img) - 1] = (i + 1) if img > 0 else -(i + 1)
    return tuple(out)


def _act(perm: SignedPerm, v: Sequence[int]) -> list[int]:
    out = [0] * len(v)
    for i, c in enumerate(v):
        if c:
            img = perm[i]
            out[abs(img) - 1] += c if img > 0 else -c
    return out


def _is_positive(v: Sequence[int]) -> bool:
    for c in v:
        if c:
            return c > 0
    raise ValueError("zero vector is not a root")


@lru_cache(maxsize=None)
def _length(datum: CoxeterDatum, perm: SignedPerm) -> int:
    return sum(1 for a in datum.positive_roots if not _is_positive(_act(perm, a)))


@lru_cache(maxsize=None)
def _simple_roots(datum: CoxeterDatum) -> tuple[tuple[int, ...], ...]:
    m = datum.dimension
    roots = []
    for i in range(datum.rank):
        v = [0] * m
        if datum.family == "A" or i < datum.rank - 1:
            v[i], v[i + 1] = 1, -1
        elif datum.family in ("B", "C"):
            v[m - 1] = 1
        else:
            v[m - 2], v[m - 1] = 1, 1
        roots.append(tuple(v))
    return tuple(roots)


def _is_left_descent(datum: CoxeterDatum, perm: SignedPerm, i: int) -> bool:
    # l(s_i w) < l(w)  iff  w^{-1}(alpha_i) < 0
    return not _is_positive(_act(_invert(perm), _simple_roots(datum)[i - 1]))


def _is_right_descent(datum: CoxeterDatum, perm: SignedPerm, i: int) -> bool:
    # l(w s_i) < l(w)  iff  w(alpha_i) < 0
    return not _is_positive(_act(perm, _simple_roots(datum)[i - 1]))


@lru_cache(maxsize=None)
def _canonical_word(datum: CoxeterDatum, perm: SignedPerm) -> tuple[int, ...]:
    # the lex-least reduced word starts with the smallest left descent
    word = []
    while True:
        for i in datum.simple_set:
            if _is_left_descent(datum, perm, i):
                word.append(i)
                perm = _compose(datum.simple_perms[i - 1], perm)
                break
        else:
            return tuple(word)


@dataclass(frozen=True)
class WeylElement:
    datum: CoxeterDatum
    perm: SignedPerm = field(repr=False)

    @property
    def canonical_word(self) -> tuple[int, ...]:
        return _canonical_word(self.datum, self.perm)

    word = canonical_word

    @property
    def length(self) -> int:
        return _length(self.datum, self.perm)

    def __mul__(self, other: WeylElement) -> WeylElement:
        return multiply(self, other)

    def inverse(self) -> WeylElement:
        return WeylElement(self.datum, _invert(self.perm))

    def is_identity(self) -> bool:
        return all(img == i + 1 for i, img in enumerate(self.perm))

    def has_right_descent(self, i: int) -> bool:
        return _is_right_descent(self.datum, self.perm, i)

    def has_left_descent(self, i: int) -> bool:
        return _is_left_descent(self.datum, self.perm, i)

    def times_simple(self, i: int) -> WeylElement:
        """w * s_i"""
        return WeylElement(self.datum, _compose(self.perm, self.datum.simple_perms[i - 1]))

    def permutation(self) -> tuple[int, ...]:
        """Type A one-line notation, 0-based: j -> w(j)."""
        if self.datum.family != "A":
            raise ValueError("permutation() is for type A")
        return tuple(img - 1 for img in self.perm)

    def sort_key(self):
        return (self.length, self.canonical_word)

    def __lt__(self, other: WeylElement):
        return self.sort_key() < other.sort_key()

    def __str__(self):
        return ",".join(map(str, self.canonical_word))

    def __repr__(self):
        word = "".join(f"s{i}" for i in self.canonical_word) or "1"
        return f"<{self.datum} {word}>"


@dataclass(frozen=True)
class DiagramAutomorphism:
    datum: CoxeterDatum
    images: tuple[int, ...]  # images[i-1] = delta(i)
    name: str = "custom"

    def __post_init__(self):
        r = self.datum.rank
        if sorted(self.images) != list(range(1, r + 1)):
            raise ValueError(f"{self.images!r} is not a permutation of 1..{r}")
        m = self.datum.coxeter_matrix
        for i in range(r):
            for j in range(r):
                if m[self.images[i] - 1][self.images[j] - 1] != m[i][j]:
                    raise ValueError(f"{self.images!r} does not preserve the Coxeter matrix")

    @classmethod
    def identity(cls, datum: CoxeterDatum) -> DiagramAutomorphism:
        return cls(datum, tuple(datum.simple_set), "id")

    @classmethod
    def flip(cls, datum: CoxeterDatum) -> DiagramAutomorphism:
        """The order-2 flip i -> r+1-i of A_r, or s_{r-1} <-> s_r in D_r."""
        r = datum.rank
        if datum.family == "A" and r >= 2:
            return cls(datum, tuple(r + 1 - i for i in datum.simple_set), "flip")
        if datum.family == "D":
            images = list(datum.simple_set)
            images[r - 2], images[r - 1] = r, r - 1
            return cls(datum, tuple(images), "flip")
        raise ValueError(f"{datum} has no flip automorphism")

    @classmethod
    def d4_swap(cls, datum: CoxeterDatum, a: int, b: int) -> DiagramAutomorphism:
        """Swap two of the outer nodes {1, 3, 4} of D4."""
        if datum != CoxeterDatum("D", 4) or {a, b} - {1, 3, 4} or a == b:
            raise ValueError("d4_swap takes two distinct outer nodes of D4")
        images = [1, 2, 3, 4]
        images[a - 1], images[b - 1] = b, a
        return cls(datum, tuple(images), f"swap{a}{b}")

    @classmethod
    def by_name(cls, datum: CoxeterDatum, name: str) -> DiagramAutomorphism:
        if name in ("id", "trivial"):
            return cls.identity(datum)
        if name == "flip":
            return cls.flip(datum)
        m = re.fullmatch(r"swap(\d)(\d)", name)
        if m:
            return cls.d4_swap(datum, int(m.group(1)), int(m.group(2)))
        raise ValueError(f"unknown diagram automorphism {name!r}")

    def __call__(self, i: int) -> int:
        return self.images[i - 1]

    @property
    def order(self) -> int:
        k, images = 1, self.images
        while any(images[i] != i + 1 for i in range(len(images))):
            images = tuple(self.images[j - 1] for j in images)
            k += 1
        return k

    def power(self, k: int) -> DiagramAutomorphism:
        images = tuple(self.datum.simple_set)
        for _ in range(k % self.order):
            images = tuple(self.images[j - 1] for j in images)
        return DiagramAutomorphism(self.datum, images, f"{self.name}^{k}")

    def is_identity(self) -> bool:
        return self.order == 1

    def is_stable(self, subset: Iterable[int]) -> bool:
        subset = set(subset)
        return {self(i) for i in subset} == subset

    def __str__(self):
        return self.name


def _check_same(x: WeylElement, y: WeylElement):
    if x.datum != y.datum:
        raise ValueError(f"mismatched Coxeter data {x.datum} and {y.datum}")


def multiply(x: WeylElement, y: WeylElement) -> WeylElement:
    _check_same(x, y)
    return WeylElement(x.datum, _compose(x.perm, y.perm))


@lru_cache(maxsize=None)
def longest_element(datum: CoxeterDatum) -> WeylElement:
    # repeatedly extend by any simple reflection that increases length
    w = datum.identity()
    while True:
        for i in datum.simple_set:
            if not w.has_right_descent(i):
                w = w.times_simple(i)
                break
        else:
            return w


def apply_automorphism(delta: DiagramAutomorphism, w: WeylElement) -> WeylElement:
    if delta.datum != w.datum:
        raise ValueError(f"automorphism of {delta.datum} applied to element of {w.datum}")
    return w.datum.from_word(delta(i) for i in w.canonical_word)


def support(w: WeylElement) -> frozenset[int]:
    return frozenset(w.canonical_word)


def twisted_support(w: WeylElement, delta: DiagramAutomorphism) -> frozenset[int]:
    """Smallest delta-stable set of simple reflections whose parabolic contains w."""
    out: set[int] = set()
    for k in range(delta.order):
        out |= support(apply_automorphism(delta.power(k), w))
    return frozenset(out)


def enumerate_group(datum: CoxeterDatum, cap: int = DEFAULT_GROUP_CAP) -> list[WeylElement]:
    if datum.order > cap:
        raise GroupTooLarge(f"|W({datum})| = {datum.order} exceeds cap {cap}")
    return list(_enumerate(datum))


@lru_cache(maxsize=None)
def _enumerate(datum: CoxeterDatum) -> tuple[WeylElement, ...]:
    seen = {datum.identity().perm}
    queue = deque(seen)
    while queue:
        perm = queue.popleft()
        for g in datum.simple_perms:
            nxt = _compose(perm, g)
            if nxt not in seen:
                seen.add(nxt)
                queue.append(nxt)
    return tuple(sorted(WeylElement(datum, perm) for perm in seen))
