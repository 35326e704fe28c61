from itertools import combinations

import pytest
from hypothesis import given, strategies as st

from lusztig.coxeter import (
    CoxeterDatum,
    DiagramAutomorphism,
    GroupTooLarge,
    apply_automorphism,
    enumerate_group,
    longest_element,
    multiply,
    parse_datum,
    support,
    twisted_support,
)

from oracles import all_reduced_words, weyl_bfs

TYPES = ["A1", "A2", "A3", "B2", "B3", "C3", "D4"]


def automorphisms(datum):
    out = [DiagramAutomorphism.identity(datum)]
    if datum.family == "A" and datum.rank >= 2:
        out.append(DiagramAutomorphism.flip(datum))
    if datum.family == "D" and datum.rank == 4:
        out += [DiagramAutomorphism.d4_swap(datum, a, b) for a, b in ((1, 3), (1, 4), (3, 4))]
    return out


@pytest.mark.parametrize("name", TYPES)
def test_matches_reflection_group(name):
    datum = parse_datum(name)
    table = weyl_bfs(datum.family, datum.rank)
    assert len(table) == datum.order
    elements = {datum.from_word(word) for _, word in table.values()}
    assert len(elements) == datum.order
    for dist, word in table.values():
        w = datum.from_word(word)
        assert w.length == dist == len(w.canonical_word)


@pytest.mark.parametrize("name", ["A2", "A3", "B2", "B3"])
def test_canonical_word_is_lex_least(name):
    datum = parse_datum(name)
    for w in enumerate_group(datum):
        words = all_reduced_words(datum.family, datum.rank, w.canonical_word)
        assert w.canonical_word == min(words)
        # support does not depend on the reduced word
        assert all(set(x) == set(support(w)) for x in words)


def test_multiply_examples():
    a2 = parse_datum("A2")
    one, s1, s2 = a2.identity(), a2.s(1), a2.s(2)
    assert multiply(one, s1 * s2) == s1 * s2
    assert multiply(s1, s1) == one
    x = multiply(s1 * s2, s1)
    assert x.canonical_word == (1, 2, 1) and x.length == 3


def test_multiply_rejects_mixed_data():
    with pytest.raises(ValueError):
        multiply(parse_datum("A2").s(1), parse_datum("B2").s(1))


@pytest.mark.parametrize("name,word,length", [
    ("A1", (1,), 1), ("A2", (1, 2, 1), 3), ("B2", (1, 2, 1, 2), 4), ("A3", None, 6), ("D4", None, 12),
])
def test_longest_element(name, word, length):
    datum = parse_datum(name)
    w0 = longest_element(datum)
    assert w0.length == length == datum.num_positive_roots
    if word:
        assert w0 == datum.from_word(word)
    assert w0 == max(enumerate_group(datum), key=lambda w: w.length)
    assert w0 * w0 == datum.identity()


def test_automorphism_examples():
    a2 = parse_datum("A2")
    flip = DiagramAutomorphism.flip(a2)
    ident = DiagramAutomorphism.identity(a2)
    w0 = longest_element(a2)
    assert apply_automorphism(ident, a2.s(1) * a2.s(2)) == a2.s(1) * a2.s(2)
    assert apply_automorphism(flip, a2.s(1)) == a2.s(2)
    assert apply_automorphism(flip, w0) == w0
    assert flip.order == 2 and ident.order == 1


def test_automorphism_must_preserve_matrix():
    with pytest.raises(ValueError):
        DiagramAutomorphism(parse_datum("B3"), (3, 2, 1))


def test_support_examples():
    a2, a3 = parse_datum("A2"), parse_datum("A3")
    assert support(a2.identity()) == frozenset()
    assert support(a2.s(1) * a2.s(2)) == {1, 2}
    assert support(longest_element(a2)) == {1, 2}
    assert twisted_support(a2.s(1), DiagramAutomorphism.flip(a2)) == {1, 2}
    assert twisted_support(a3.s(2), DiagramAutomorphism.flip(a3)) == {2}
    assert twisted_support(a3.s(1), DiagramAutomorphism.identity(a3)) == {1}


def test_enumeration_examples():
    a1, a2, b2 = parse_datum("A1"), parse_datum("A2"), parse_datum("B2")
    assert [w.canonical_word for w in enumerate_group(a1)] == [(), (1,)]
    assert [w.length for w in enumerate_group(a2)] == [0, 1, 1, 2, 2, 3]
    assert len(enumerate_group(b2)) == 8
    with pytest.raises(GroupTooLarge):
        enumerate_group(parse_datum("A4"), cap=100)


def test_serialization():
    a3 = parse_datum("A3")
    for w in enumerate_group(a3):
        assert a3.parse_element(str(w)) == w
    assert a3.parse_element("") == a3.identity()
    assert str(a3) == "A3" and parse_datum("B3") == CoxeterDatum("B", 3)


@pytest.mark.parametrize("name", TYPES)
def test_poincare_polynomial(name):
    datum = parse_datum(name)
    counts = [0] * (datum.num_positive_roots + 1)
    for w in enumerate_group(datum):
        counts[w.length] += 1
    assert counts == counts[::-1]
    assert sum(counts) == datum.order


@pytest.mark.parametrize("name", TYPES)
def test_length_symmetries(name):
    datum = parse_datum(name)
    deltas = automorphisms(datum)
    for w in enumerate_group(datum):
        assert w.inverse().length == w.length
        for d in deltas:
            assert apply_automorphism(d, w).length == w.length
            assert apply_automorphism(d.power(d.order), w) == w


@pytest.mark.parametrize("name", ["A1", "A2", "A3", "B2", "B3", "D4"])
def test_twisted_support_is_minimal_stable_subset(name):
    datum = parse_datum(name)
    simple = list(datum.simple_set)
    for d in automorphisms(datum):
        stable = [frozenset(c) for k in range(len(simple) + 1) for c in combinations(simple, k)
                  if d.is_stable(c)]
        for w in enumerate_group(datum):
            containing = [j for j in stable if support(w) <= j]
            assert twisted_support(w, d) == min(containing, key=len)
            assert all(twisted_support(w, d) <= j for j in containing)


@pytest.mark.parametrize("name", ["A1", "A2", "A3", "B2"])
def test_group_axioms(name):
    datum = parse_datum(name)
    elements = enumerate_group(datum)
    one = datum.identity()
    for x in elements:
        assert x * one == x == one * x
        assert x * x.inverse() == one
        for y in elements:
            assert (x * y).length <= x.length + y.length
            for z in elements:
                assert (x * y) * z == x * (y * z)


words = st.lists(st.integers(1, 3), max_size=12)


@given(words, words)
def test_multiply_concatenates_words(u, v):
    a3 = parse_datum("A3")
    assert a3.from_word(u) * a3.from_word(v) == a3.from_word(u + v)


@given(words)
def test_descent_changes_length_by_one(u):
    a3 = parse_datum("A3")
    w = a3.from_word(u)
    for i in a3.simple_set:
        ws = w.times_simple(i)
        assert ws.length == w.length + (-1 if w.has_right_descent(i) else 1)
