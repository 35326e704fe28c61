import random
from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from lusztig.chevalley import GroupSpec, geometric_orbits, group_order, orbit, parse_template
from lusztig.coxeter import enumerate_group, longest_element
from lusztig.counting import (
    FittedPolynomial,
    InsufficientPoints,
    NotPolynomial,
    PointCountSeries,
    class_cell_counts,
    count_class_cell,
    count_lusztig,
    count_table_csv,
    count_unipotent_cell,
    fit_polynomial,
    fits_from_json,
    fits_to_json,
    geometric_cell_counts,
    kawanaka_check,
    lusztig_counts,
    unipotent_cell_counts,
)
from lusztig.hecke import kawanaka_coefficient, specialize
from lusztig.matfq import MatrixFq, TwistKind, twist

from oracles import all_invertible, brute_bruhat_cell

rngs = st.integers(0, 2**32).map(random.Random)

FLIP = TwistKind.FLIP


def brute_lusztig(spec, h):
    """|Y_w^F| from a sweep over the whole group: each flag is hit |B^F| times."""
    tally = {}
    for rows in all_invertible(spec.n, spec.p, spec.family == "SL"):
        g = MatrixFq(rows, spec.p)
        x = g.inverse() * h * twist(g, spec.twist)
        key = brute_bruhat_cell(x.rows, spec.p)
        tally[key] = tally.get(key, 0) + 1
    out = {}
    for w in enumerate_group(spec.weyl):
        c = tally.get(w.permutation(), 0)
        assert c % spec.borel_order == 0
        out[w] = c // spec.borel_order
    return out


def brute_unipotent(spec, w_prime):
    from itertools import product

    n, p = spec.n, spec.p
    pos = [(i, j) for i in range(n) for j in range(i)]
    images = w_prime.permutation()
    wd = [[int(images[j] == i) for j in range(n)] for i in range(n)]
    wd = MatrixFq(tuple(map(tuple, wd)), p)
    if spec.family == "SL" and wd.det != 1:
        wd = MatrixFq(tuple(r[:-1] + (-r[-1] % p,) for r in wd.rows), p)
    tally = {}
    for vals in product(range(p), repeat=len(pos)):
        u = [[int(i == j) for j in range(n)] for i in range(n)]
        for (i, j), v in zip(pos, vals):
            u[i][j] = v
        x = wd.inverse() * MatrixFq(tuple(map(tuple, u)), p) * twist(wd, spec.twist)
        key = brute_bruhat_cell(x.rows, p)
        tally[key] = tally.get(key, 0) + 1
    return {w: tally.get(w.permutation(), 0) for w in enumerate_group(spec.weyl)}


def test_class_cell_examples():
    spec = GroupSpec("GL", 2, 3)
    o = orbit(MatrixFq.diagonal([1, 2], 3), spec)
    one, s = spec.weyl.identity(), spec.weyl.s(1)
    assert count_class_cell(o, one) == 6
    assert count_class_cell(o, s) == 6
    brute = sum(m.is_upper_triangular() for m in o.elements())
    assert brute == 6


def test_lusztig_examples():
    spec = GroupSpec("GL", 2, 3)
    h = MatrixFq.diagonal([1, 2], 3)
    one, s = spec.weyl.identity(), spec.weyl.s(1)
    assert count_lusztig(spec, h, s) == 2
    assert count_lusztig(spec, h, one) == 2
    central = MatrixFq.diagonal([2, 2], 3)
    assert lusztig_counts(spec, central) == {one: 4, s: 0}


@pytest.mark.parametrize("fam,n,p,tw,text", [
    ("GL", 2, 3, "trivial", "diag:1,2"),
    ("GL", 2, 3, "trivial", "companion:-1,-1,1"),
    ("GL", 2, 5, "trivial", "jordan:2:1"),
    ("GL", 3, 2, "trivial", "companion:1,1,0,1"),
    ("GL", 3, 2, "trivial", "jordan:3:1"),
    ("SL", 2, 3, "trivial", "jordan:2:1"),
    ("GL", 2, 3, "flip", "diag:1,2"),
    ("SL", 3, 2, "flip", "jordan:3:1"),
    ("GL", 3, 2, "flip", "diag:1,1,1"),
])
def test_lusztig_matches_group_sweep(fam, n, p, tw, text):
    spec = GroupSpec(fam, n, p, TwistKind(tw))
    h = parse_template(text).for_spec(spec)
    assert lusztig_counts(spec, h) == brute_lusztig(spec, h)


def test_unipotent_examples():
    spec = GroupSpec("GL", 2, 3)
    one, s = spec.weyl.identity(), spec.weyl.s(1)
    assert count_unipotent_cell(spec, s, one) == 2
    assert count_unipotent_cell(spec, one, one) == 1


@pytest.mark.parametrize("fam,n,p,tw", [("GL", 2, 5, "trivial"), ("GL", 3, 3, "trivial"),
                                        ("SL", 3, 3, "flip"), ("SL", 3, 2, "flip")])
def test_unipotent_matches_direct_sweep(fam, n, p, tw):
    spec = GroupSpec(fam, n, p, TwistKind(tw))
    for wp in enumerate_group(spec.weyl):
        counts = unipotent_cell_counts(spec, wp)
        assert counts == brute_unipotent(spec, wp)
        assert sum(counts.values()) == p ** spec.weyl.num_positive_roots


@pytest.mark.parametrize("fam,n,p,tw", [("GL", 2, 3, "trivial"), ("GL", 3, 2, "trivial"), ("SL", 3, 3, "flip")])
def test_bridge_small(fam, n, p, tw):
    spec = GroupSpec(fam, n, p, TwistKind(tw))
    for wp in enumerate_group(spec.weyl):
        counts = unipotent_cell_counts(spec, wp)
        for w, c in counts.items():
            assert c == specialize(kawanaka_coefficient(w, wp, spec.delta), p) * p ** wp.length


def test_kawanaka_examples():
    spec = GroupSpec("GL", 2, 3)
    o = orbit(MatrixFq.diagonal([1, 2], 3), spec)
    for w in enumerate_group(spec.weyl):
        chk = kawanaka_check(spec, o, w)
        assert (chk.lusztig, chk.borel, chk.orbit, chk.group, chk.class_cell) == (2, 12, 12, 48, 6)
        assert chk.holds and chk.witness()["lhs"] == 2 * 12 * 12
    central = orbit(MatrixFq.diagonal([1, 1], 3), spec)
    chk = kawanaka_check(spec, central, spec.weyl.identity())
    assert chk.lhs == 4 * 12 * 1 == chk.rhs == 48 * 1


def test_fit_examples():
    series = PointCountSeries("x", "t-1", {2: 1, 3: 2, 5: 4})
    fit = fit_polynomial(series, 1)
    assert fit.coeffs == (Fraction(-1), Fraction(1))
    assert fit.is_monic and fit.degree == 1 and fit.is_integer_coefficients
    const = fit_polynomial(PointCountSeries("x", "c", {2: 7, 3: 7, 5: 7, 7: 7}), 2)
    assert const.degree == 0 and const.leading_coefficient == 7
    zero = fit_polynomial(PointCountSeries("x", "0", {2: 0, 3: 0}), 0)
    assert zero.degree == -1 and not zero.is_monic
    half = fit_polynomial(PointCountSeries("x", "t(t-1)/2", {p: p * (p - 1) // 2 for p in (2, 3, 5, 7)}), 2)
    assert half.leading_coefficient == Fraction(1, 2) and not half.is_integer_coefficients


def test_fit_errors():
    with pytest.raises(InsufficientPoints):
        fit_polynomial(PointCountSeries("x", "q", {2: 1, 3: 2}), 1)
    with pytest.raises(NotPolynomial):
        fit_polynomial(PointCountSeries("x", "2^q", {p: 2 ** p for p in (2, 3, 5, 7)}), 2)


def test_fit_gl3_w0_unipotent_is_hecke_coefficient():
    spec = GroupSpec("GL", 3, 2)
    w0, one = longest_element(spec.weyl), spec.weyl.identity()
    series = PointCountSeries("gl3", "unipotent w0")
    for p in (2, 3, 5, 7, 11):
        series.add(p, count_unipotent_cell(spec.with_prime(p), w0, one))
    fit = fit_polynomial(series, w0.length)
    target = kawanaka_coefficient(w0, one, spec.delta)
    assert fit.coeffs == tuple(Fraction(c) for c in target.coeffs)
    assert fit.is_monic and fit.degree == 3


def test_fit_json_round_trip():
    fit = fit_polynomial(PointCountSeries("x", "q", {p: p * (p - 1) // 2 for p in (2, 3, 5, 7)}), 2)
    back = fits_from_json(fits_to_json({"a": fit}))
    assert back["a"] == fit
    assert FittedPolynomial.from_record(fit.to_record()) == fit


def test_count_table_csv():
    text = count_table_csv([("s", "lusztig", "1", "", 3, 2)])
    assert text.splitlines() == ["scenario,quantity,w,w_prime,prime,count", "s,lusztig,1,,3,2"]


@pytest.mark.parametrize("fam,n,p,text", [
    ("GL", 2, 7, "companion:1,1,1"),
    ("GL", 3, 3, "jordan:3:1"),
    ("GL", 3, 5, "diag:1,2,3"),
    ("GL", 3, 5, "companion:-2,5,-4,1"),
    ("SL", 2, 5, "jordan:2:1"),
    ("SL", 3, 7, "jordan:3:1"),
])
def test_geometric_count_matches_orbit_sum(fam, n, p, text):
    spec = GroupSpec(fam, n, p)
    h = parse_template(text).for_spec(spec)
    geo = geometric_cell_counts(spec, h)
    totals = {w: 0 for w in enumerate_group(spec.weyl)}
    for o in geometric_orbits(h, spec):
        for w, c in class_cell_counts(o).items():
            totals[w] += c
    assert geo == totals


def test_geometric_count_preconditions():
    with pytest.raises(NotImplementedError):
        geometric_cell_counts(GroupSpec("SL", 3, 5, FLIP), parse_template("jordan:3:1").build(5))
    with pytest.raises(ValueError):
        geometric_cell_counts(GroupSpec("GL", 2, 5), MatrixFq.identity(2, 5))


SPECS = [GroupSpec("GL", 2, 5), GroupSpec("GL", 3, 3), GroupSpec("SL", 3, 3, FLIP), GroupSpec("SL", 2, 7)]


@given(st.sampled_from(SPECS), rngs)
def test_partitions_and_identity(spec, rng):
    while True:
        g = MatrixFq(tuple(tuple(rng.randrange(spec.p) for _ in range(spec.n)) for _ in range(spec.n)), spec.p)
        if spec.contains(g):
            break
    flags = group_order(spec) // spec.borel_order
    counts = lusztig_counts(spec, g)
    assert sum(counts.values()) == flags
    o = orbit(g, spec)
    assert sum(class_cell_counts(o).values()) == o.size
    for w in enumerate_group(spec.weyl):
        assert kawanaka_check(spec, o, w, counts[w]).holds
