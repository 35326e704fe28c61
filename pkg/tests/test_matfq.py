import random

import numpy as np
import pytest
from hypothesis import given, strategies as st

from lusztig.coxeter import CoxeterDatum, enumerate_group, longest_element
from lusztig.matfq import (
    FieldElement,
    MatrixFq,
    SingularMatrix,
    TwistKind,
    batch_charpoly,
    batch_det,
    batch_unipotent_inverse,
    batch_weyl_codes,
    batch_twist_unipotent,
    bruhat_word,
    code_of,
    decode,
    encode,
    flip_matrix,
    permutation_matrix,
    rank_mod_p,
    twist,
)

from oracles import all_invertible, brute_bruhat_cell, det_mod

rngs = st.integers(0, 2**32).map(random.Random)

PRIMES = [2, 3, 5, 7]


def random_invertible(n, p, rng):
    while True:
        g = MatrixFq(tuple(tuple(rng.randrange(p) for _ in range(n)) for _ in range(n)), p)
        if g.det:
            return g


def random_upper(n, p, rng, special=False):
    rows = [[0] * n for _ in range(n)]
    for i in range(n):
        rows[i][i] = rng.randrange(1, p)
        for j in range(i + 1, n):
            rows[i][j] = rng.randrange(p)
    if special:
        rows[n - 1][n - 1] = rows[n - 1][n - 1] * pow(MatrixFq(tuple(map(tuple, rows)), p).det, -1, p) % p
    return MatrixFq(tuple(map(tuple, rows)), p)


def test_field_axioms_small_primes():
    for p in (2, 3, 5, 7):
        elems = [FieldElement(x, p) for x in range(p)]
        for a in elems:
            assert a + 0 == a and a * 1 == a and a - a == 0
            if a.value:
                assert a * a.inverse() == 1 and a / a == 1
            for b in elems:
                assert a + b == b + a and a * b == b * a
                for c in elems:
                    assert a * (b + c) == a * b + a * c


def test_field_rejects_composite():
    with pytest.raises(ValueError):
        FieldElement(1, 4)
    with pytest.raises(ZeroDivisionError):
        FieldElement(0, 5).inverse()


def test_matrix_literal():
    g = MatrixFq.parse("1 2; -1 7", 5)
    assert g.rows == ((1, 2), (4, 2))
    assert MatrixFq.parse(g.to_text(), 5) == g
    assert g.det == (2 - 8) % 5


@pytest.mark.parametrize("n,p", [(2, 2), (2, 3), (3, 2)])
def test_det_and_inverse_against_oracle(n, p):
    for rows in all_invertible(n, p)[:400]:
        g = MatrixFq(rows, p)
        assert g.det == det_mod(rows, p)
        assert g * g.inverse() == MatrixFq.identity(n, p)
    with pytest.raises(SingularMatrix):
        MatrixFq(((1, 1), (1, 1)), p).inverse()


def test_bruhat_examples():
    for n in (2, 3, 4):
        datum = CoxeterDatum("A", n - 1)
        assert bruhat_word(MatrixFq.identity(n, 5)).w == datum.identity()
        anti = MatrixFq(tuple(tuple(int(j == n - 1 - i) for j in range(n)) for i in range(n)), 5)
        assert bruhat_word(anti).w == longest_element(datum)
    with pytest.raises(SingularMatrix):
        bruhat_word(MatrixFq(((1, 2), (2, 4)), 5))


def test_permutation_matrices_map_to_their_element():
    for n in (2, 3, 4):
        for w in enumerate_group(CoxeterDatum("A", n - 1)):
            assert bruhat_word(permutation_matrix(w, 7)).w == w


@pytest.mark.parametrize("n,p", [(2, 3), (3, 2), (3, 3)])
def test_bruhat_matches_rank_oracle(n, p):
    for rows in all_invertible(n, p)[:3000]:
        g = MatrixFq(rows, p)
        assert bruhat_word(g).w.permutation() == brute_bruhat_cell(rows, p)


@pytest.mark.parametrize("n,p", [(2, 2), (2, 3), (3, 2)])
def test_cell_sizes_exhaustive(n, p):
    datum = CoxeterDatum("A", n - 1)
    group = all_invertible(n, p)
    borel = (p - 1) ** n * p ** (n * (n - 1) // 2)
    tally = {}
    for rows in group:
        w = bruhat_word(MatrixFq(rows, p)).w
        tally[w] = tally.get(w, 0) + 1
    for w in enumerate_group(datum):
        assert tally[w] == borel * p ** w.length
    codes = batch_weyl_codes(np.array(group, dtype=np.int64), p)
    assert [code_of(bruhat_word(MatrixFq(r, p)).w.permutation()) for r in group] == codes.tolist()


def _check_factors(g):
    f = bruhat_word(g)
    assert f.product() == g
    assert f.u1.is_upper_unitriangular() and f.u2.is_upper_unitriangular()
    assert f.torus.is_diagonal()
    # u2 in U cap w^{-1} U^- w: conjugating by w_dot lands in lower triangular
    w_dot = f.w_dot
    assert (w_dot * f.u2 * w_dot.inverse()).is_lower_triangular()


@pytest.mark.parametrize("n,p", [(2, 5), (3, 5), (3, 7), (4, 3)])
def test_bruhat_round_trip(n, p):
    rng = random.Random(n * 100 + p)
    for _ in range(1000):
        _check_factors(random_invertible(n, p, rng))


@given(st.sampled_from([(2, 3), (3, 5), (4, 7)]), rngs)
def test_cells_are_borel_bi_invariant(np_, rng):
    n, p = np_
    g = random_invertible(n, p, rng)
    b1, b2 = random_upper(n, p, rng), random_upper(n, p, rng)
    assert bruhat_word(b1 * g * b2).w == bruhat_word(g).w


def test_flip_examples():
    p = 7
    d = MatrixFq.diagonal([2, 3], p)
    assert twist(d, TwistKind.TRIVIAL) == d
    assert twist(d, TwistKind.FLIP) == MatrixFq.diagonal([pow(3, -1, p), pow(2, -1, p)], p)
    j = flip_matrix(3, p)
    assert j.rows == ((0, 0, 1), (0, p - 1, 0), (1, 0, 0))


@given(st.sampled_from([(2, 5), (3, 5), (3, 7), (4, 3)]), rngs)
def test_flip_is_an_automorphism_preserving_borel(np_, rng):
    n, p = np_
    g, h = random_invertible(n, p, rng), random_invertible(n, p, rng)
    assert twist(g * h, TwistKind.FLIP) == twist(g, TwistKind.FLIP) * twist(h, TwistKind.FLIP)
    b = random_upper(n, p, rng)
    assert twist(b, TwistKind.FLIP).is_upper_triangular()
    assert twist(b.transpose(), TwistKind.FLIP).is_lower_triangular()
    s = random_upper(n, p, rng, special=True)
    assert s.det == 1
    assert twist(twist(s, TwistKind.FLIP), TwistKind.FLIP) == s


def test_flip_induces_diagram_flip_on_weyl_group():
    for n in (3, 4):
        datum = CoxeterDatum("A", n - 1)
        for i in datum.simple_set:
            s = permutation_matrix(datum.s(i), 5)
            assert bruhat_word(twist(s, TwistKind.FLIP)).w == datum.s(n - i)


def test_flip_twists_all_of_borel_small():
    for rows in all_invertible(2, 3) + all_invertible(3, 2):
        g = MatrixFq(rows, 3 if len(rows) == 2 else 2)
        if g.is_upper_triangular():
            assert twist(g, TwistKind.FLIP).is_upper_triangular()


@given(st.sampled_from([(2, 3), (3, 5), (4, 3)]), rngs)
def test_batch_kernels_agree_with_scalar(np_, rng):
    n, p = np_
    gs = [random_invertible(n, p, rng) for _ in range(5)]
    arr = np.array([g.rows for g in gs], dtype=np.int64)
    assert (decode(encode(arr, p), n, p) == arr).all()
    assert batch_det(arr, p).tolist() == [g.det for g in gs]
    # charpoly: Cayley-Hamilton
    for g, c in zip(gs, batch_charpoly(arr, p)):
        acc = g ** n
        for k in range(n):
            acc = acc + (g ** k) * int(c[k])
        assert acc == MatrixFq(((0,) * n,) * n, p)
    us = np.array([random_upper(n, p, rng).rows for _ in range(4)], dtype=np.int64)
    for i in range(n):
        us[:, i, i] = 1
    inv = batch_unipotent_inverse(us, p)
    tw = batch_twist_unipotent(us, p)
    for u, ui, t in zip(us, inv, tw):
        m = MatrixFq(tuple(map(tuple, u.tolist())), p)
        assert m.inverse().rows == tuple(map(tuple, ui.tolist()))
        assert twist(m, TwistKind.FLIP).rows == tuple(map(tuple, t.tolist()))


def test_rank():
    assert rank_mod_p([[1, 2], [2, 4]], 5) == 1
    assert rank_mod_p([[1, 2], [2, 4]], 2) == 1
    assert rank_mod_p([[1, 0], [0, 3]], 3) == 1
    assert rank_mod_p([[1, 0], [0, 3]], 5) == 2
