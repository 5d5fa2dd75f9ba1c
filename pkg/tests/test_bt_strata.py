import pytest

from btstrat.bt_strata import (ParahoricTuple, AbstractBTIndex, ConcreteBTIndex, InvalidTuple, InfeasibleIndex,
                               TupleMismatch, Undefined, admissible_tuples, enumerate_abstract,
                               validate_abstract, abstract_violations, orbit_key, ambient_for, realize,
                               certify_abstract, irreducible_components, orbit_count_formula,
                               orbit_count_enumerated, stratum_descriptor, fine_decomposition, open_selection,
                               closed_count_flags, open_count_flags, enumerate_points, point_violations,
                               type_index, in_closed, leq_index, intersect_index, complete_index,
                               minimize_types, point_map, condition_star, window_L0, window_indices,
                               smoothness_check, validate_concrete)
from btstrat.coxeter import CoxElement


def test_tuple_validation():
    with pytest.raises(InvalidTuple):
        ParahoricTuple(3, (0, 1))
    with pytest.raises(InvalidTuple):
        ParahoricTuple(3, (2, 0))
    with pytest.raises(InvalidTuple):
        ParahoricTuple(3, (5,))
    tup = ParahoricTuple(4, (1, 3))
    assert (tup.m, tup.dh(1), tup.t_min, tup.t_max, tup.eps) == (2, 1, 0, 4, 2)
    assert tup.allowed() == [0, 1, 2]
    assert ParahoricTuple(4, (0, 4)).allowed() == [1]


def test_admissible_tuple_count():
    # every nonempty subset of the evens plus every nonempty subset of the odds
    assert len(admissible_tuples(3)) == 3 + 3
    assert len(admissible_tuples(4)) == 7 + 3


def test_abstract_enumeration_hyperspecial():
    out = enumerate_abstract(ParahoricTuple(3, (0,)))
    assert [a.type_vector() for a in out] == [(1,), (3,)]
    assert all(a.I == (1,) for a in out)


def test_abstract_validation():
    tup = ParahoricTuple(4, (1, 3))
    a = AbstractBTIndex.from_types(tup, (0, 1, 2), (4, 2, 2, 4))
    assert validate_abstract(a)
    bad = AbstractBTIndex.from_types(tup, (1,), (2, 4))
    assert abstract_violations(bad)
    assert orbit_key(a) == ((0, 1, 2), (4, 2, 2, 4))


@pytest.mark.parametrize("n,h", [(3, (0,)), (3, (1,)), (3, (0, 2)), (3, (1, 3)), (4, (1, 3)), (4, (0, 2, 4))])
def test_every_abstract_index_is_realized(n, h):
    assert certify_abstract(ParahoricTuple(n, h)) == []


@pytest.mark.parametrize("n,h,dims,count", [
    (3, (0, 2), [1, 2], 2),
    (4, (0, 2, 4), [2, 2], 2),
    (4, (1, 3), [2, 3, 3], 3),
])
def test_component_fixtures(n, h, dims, count):
    tup = ParahoricTuple(n, h)
    comps = irreducible_components(tup)
    assert sorted(c.dim for c in comps) == dims
    assert orbit_count_enumerated(tup) == count == orbit_count_formula(tup)


def test_maximal_orbits_carry_the_component_dimension():
    tup = ParahoricTuple(4, (1, 3))
    for c in irreducible_components(tup):
        for I, types in c.enumerated:
            a = AbstractBTIndex.from_types(tup, I, types)
            assert stratum_descriptor(a).dim == c.dim


def test_hyperspecial_descriptor():
    a = AbstractBTIndex.from_types(ParahoricTuple(3, (0,)), (1,), (3,))
    desc = stratum_descriptor(a)
    (b,) = desc.blocks
    assert (b.role, b.d, desc.dim) == ("head", 3, 1)
    assert b.top == CoxElement.from_word("unitary", 3, [2])
    assert len(fine_decomposition(a)) == 2
    assert len(open_selection(a)) == 1
    assert closed_count_flags(a) == 28
    assert open_count_flags(a) == 0


def test_smoothness_check_on_blocks():
    for n in range(1, 6):
        for tup in admissible_tuples(n):
            for a in enumerate_abstract(tup):
                for b in stratum_descriptor(a).blocks:
                    _, xwy, avoids, dim_ok = smoothness_check(b)
                    assert avoids and dim_ok


def test_hyperspecial_point_bijection():
    tup = ParahoricTuple(3, (0,))
    a = AbstractBTIndex.from_types(tup, (1,), (3,))
    idx = realize(a, ambient_for(tup))
    pts = enumerate_points(idx)
    assert len(pts) == 28 == closed_count_flags(a)
    keys = set()
    for p in pts:
        assert not point_violations(p)
        assert not condition_star(p)
        (bf,) = point_map(p, idx)
        keys.add(bf.key)
        assert bf.classify().is_identity()
    assert len(keys) == 28


def test_even_parity_fixture():
    tup = ParahoricTuple(2, (0,))
    for a in enumerate_abstract(tup):
        idx = realize(a, ambient_for(tup))
        assert len(enumerate_points(idx)) == closed_count_flags(a)


def test_point_types_are_below_the_index():
    tup = ParahoricTuple(3, (1, 3))
    a = enumerate_abstract(tup)[-1]
    idx = realize(a, ambient_for(tup))
    for p in enumerate_points(idx)[:200]:
        T = type_index(p)
        assert validate_concrete(T)
        assert in_closed(p, T) and leq_index(T, idx)


def test_complete_and_minimize():
    tup = ParahoricTuple(3, (0, 2))
    a = AbstractBTIndex.from_types(tup, (2,), (3,))
    idx = realize(a, ambient_for(tup))
    c = complete_index(idx)
    assert c.I == (1, 2) and leq_index(c, idx)
    hyp = ParahoricTuple(3, (0,))
    m = minimize_types(realize(AbstractBTIndex.from_types(hyp, (1,), (3,)), ambient_for(hyp)))
    assert m.abstract.type_vector() == (1,)


def test_intersection_law_small_window():
    tup = ParahoricTuple(2, (1,))
    amb = ambient_for(tup)
    idxs = window_indices(tup, amb)
    pts = {i: set(enumerate_points(i)) for i in idxs}
    for x in idxs:
        for y in idxs:
            z = intersect_index(x, y)
            common = pts[x] & pts[y]
            if isinstance(z, Undefined):
                assert not common
            else:
                assert leq_index(z, x) and leq_index(z, y)
                assert set(enumerate_points(z)) == common
            assert leq_index(x, y) == (pts[x] <= pts[y])


def test_tuple_mismatch():
    t1, t2 = ParahoricTuple(3, (0,)), ParahoricTuple(3, (2,))
    x = realize(enumerate_abstract(t1)[0], ambient_for(t1))
    y = realize(enumerate_abstract(t2)[0], ambient_for(t2))
    with pytest.raises(TupleMismatch):
        leq_index(x, y)


def test_window_census_hyperspecial():
    tup = ParahoricTuple(3, (0,))
    amb = ambient_for(tup)
    L0s = window_L0(amb)
    assert len(L0s) == 29
    assert len(window_indices(tup, amb, L0s)) == 29
