import itertools

import pytest

from btstrat.coxeter import (CoxElement, SimpleSubset, KindMismatch, identity, simple, compose, word,
                             perm_length, perm_bruhat_le, decompose_k, decompose_chain, chain_word,
                             chain_bounds, enumerate_admissible, pattern_avoids, build_xwy,
                             min_double_coset, bedard, bedard_sequences, reduced_elements,
                             i_reduced, reduced_i, leq_IF, longest, all_elements, cycle_word)


def test_lengths_and_bruhat():
    assert perm_length(longest(4)) == 6
    s1, s2 = simple(1, 3), simple(2, 3)
    assert perm_bruhat_le(s1, compose(s1, s2))
    assert not perm_bruhat_le(compose(s1, s2), compose(s2, s1))
    for u in itertools.permutations(range(1, 5)):
        assert perm_bruhat_le(identity(4), u) and perm_bruhat_le(u, longest(4))


def test_product_kind_is_componentwise():
    a = CoxElement.from_word("fake_unitary", 3, [1], [1, 2])
    assert a.length() == 3
    assert a.frob().frob() == a
    with pytest.raises(KindMismatch):
        a * CoxElement.identity("unitary", 3)


def test_unitary_frobenius_on_simple_reflections():
    I = SimpleSubset.of("unitary", 4, [1])
    assert I.frob() == SimpleSubset.of("unitary", 4, [3])
    w = CoxElement.from_word("unitary", 4, [1])
    assert w.frob() == CoxElement.from_word("unitary", 4, [3])


def test_min_double_coset_is_minimal():
    I = SimpleSubset.of("unitary", 4, [1, 2])
    for w in all_elements("unitary", 4):
        m = min_double_coset(w, I, I.frob())
        assert i_reduced(m, I) and reduced_i(m, I.frob())
        assert m.length() <= w.length()


def test_decompose_k_examples():
    assert decompose_k(identity(3), 1) == (identity(3), identity(3), identity(3))
    assert decompose_k((1, 3, 2), 1) == (identity(3), identity(3), (1, 3, 2))
    assert decompose_k((2, 1, 3), 1) == ((2, 1, 3), identity(3), identity(3))
    with pytest.raises(ValueError):
        decompose_k((3, 1, 2), 1)


@pytest.mark.parametrize("n", range(1, 6))
def test_decompose_k_exhaustive(n):
    for k in range(n):
        hits = {}
        for x in [None] + list(range(1, k + 1)):
            tau = identity(n) if x is None else _transp(x, k + 1, n)
            for a in itertools.permutations(range(1, k + 1)):
                s1 = tuple(a) + tuple(range(k + 1, n + 1))
                for b in itertools.permutations(range(k + 1, n + 1)):
                    s2 = tuple(range(1, k + 1)) + tuple(b)
                    sig = compose(tau, compose(s1, s2))
                    hits.setdefault(sig, []).append((tau, s1, s2))
        for sig in itertools.permutations(range(1, n + 1)):
            ok = set(sig[:k]) <= set(range(1, k + 2))
            assert (sig in hits) == ok
            if ok:
                assert hits[sig] == [decompose_k(sig, k)]


def _transp(a, b, n):
    p = list(range(1, n + 1))
    p[a - 1], p[b - 1] = b, a
    return tuple(p)


def test_decompose_chain_examples():
    assert decompose_chain(identity(3), (1,)) == (0,)
    assert decompose_chain(simple(2, 3), (1,)) == (1,)
    assert decompose_chain(compose(simple(1, 4), simple(3, 4)), (0, 2)) == (1, 1)


@pytest.mark.parametrize("d", range(1, 6))
def test_decompose_chain_exhaustive(d):
    for r in range(d):
        for gaps in itertools.combinations(range(d - 1), r):
            bounds = chain_bounds(gaps, d - 1)
            words = {}
            for ts in enumerate_admissible(gaps, bounds):
                words.setdefault(chain_word(gaps, ts, d), []).append(ts)
            I = SimpleSubset.from_gaps("unitary", d, gaps)
            for w in reduced_elements(I):
                sig = w.perm
                got = decompose_chain(sig, gaps, I)
                assert got == (words[sig][0] if sig in words else None)
                assert len(words.get(sig, [])) <= 1


def test_enumerate_admissible():
    assert enumerate_admissible((), ()) == [()]
    assert enumerate_admissible((0,), (1,)) == [(0,), (1,)]


def test_patterns():
    assert pattern_avoids(identity(5))
    assert not pattern_avoids((3, 4, 1, 2))
    assert not pattern_avoids((4, 2, 3, 1))


def test_build_xwy_hyperspecial():
    J = SimpleSubset.from_gaps("unitary", 3, (1,))
    w = min_double_coset(CoxElement.from_word("unitary", 3, [2]), J, J.frob())
    x = build_xwy(J, w)
    assert pattern_avoids(x.perm)


def test_bedard_trivial_cases():
    d = 4
    empty = SimpleSubset.empty("unitary", d)
    w = CoxElement.from_word("unitary", d, [1, 2])
    assert bedard(empty, w)[0] == empty
    full = SimpleSubset.full("unitary", d)
    assert bedard(full, CoxElement.identity("unitary", d))[0] == full


@pytest.mark.parametrize("d", [3, 4])
def test_bedard_bijection(d):
    for r in range(d):
        for js in itertools.combinations(range(1, d), r):
            I = SimpleSubset.of("unitary", d, js)
            ends = sorted((w.perm for w, _ in bedard_sequences(I)))
            assert ends == sorted(w.perm for w in reduced_elements(I))
            for w in reduced_elements(I):
                Iinf, seq = bedard(I, w)
                assert conj_fixed(Iinf, seq[-1][1])


def conj_fixed(I, w):
    from btstrat.coxeter import conj_intersect
    return conj_intersect(I, w, I.frob()) == I


def test_twisted_order_respects_length():
    I = SimpleSubset.of("unitary", 4, [2])
    red = reduced_elements(I)
    for w in red:
        for v in red:
            if leq_IF(v, w, I):
                assert v.length() <= w.length()


def test_cycle_word():
    assert cycle_word(2, 2, 4) == word([2, 3], 4)
    assert cycle_word(1, 0, 3) == identity(3)
