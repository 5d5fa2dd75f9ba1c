import numpy as np
import pytest

from btstrat.core_algebra import FieldSpec
from btstrat.coxeter import CoxElement, SimpleSubset, reduced_elements, leq_IF
from btstrat.dl_varieties import (DLDescriptor, Flag, census, count_points, dim_coarse,
                                  relative_position, relative_position_by_solving, classify_partial_flag,
                                  f_stable_subsets, is_irreducible, flag_type_of, SizeGuard,
                                  complete_flag_count, complete_flags)


def test_complete_flag_counts():
    assert complete_flag_count(9, 3) == 10 * 91
    assert len(complete_flags(9, 2)) == 10


def test_two_relative_position_algorithms_agree():
    spec = FieldSpec(3)
    rng = np.random.default_rng(1)
    F = spec.gf
    from btstrat.core_algebra import rank
    done = 0
    while done < 30:
        X1, X2 = rng.integers(0, 9, (2, 4, 4))
        if rank(F, X1) < 4 or rank(F, X2) < 4:
            continue
        a = relative_position(Flag.from_basis(X1, spec), Flag.from_basis(X2, spec))
        b = relative_position_by_solving(X1, X2, spec)
        assert a == b
        done += 1


@pytest.mark.parametrize("kind,d", [("unitary", 2), ("unitary", 3), ("linear", 3), ("fake_unitary", 2)])
def test_fine_strata_partition(kind, d):
    C = census(kind, d, 3)
    for J in _all_subsets(kind, d):
        ng, missing, multiple = C.partition_report(J)
        assert missing == 0 and multiple == 0
        total = sum(C.fine_count(J, w) for w in reduced_elements(J))
        assert total == ng


@pytest.mark.parametrize("kind,d", [("unitary", 3), ("fake_unitary", 2)])
def test_closure_is_union_of_fine_strata(kind, d):
    C = census(kind, d, 3)
    for J in _all_subsets(kind, d):
        red = reduced_elements(J)
        for w in red:
            below = sum(C.fine_count(J, v) for v in red if leq_IF(v, w, J))
            assert C.closed_count(J, w) == below


def _all_subsets(kind, d):
    import itertools
    full = sorted(SimpleSubset.full(kind, d).members)
    for r in range(len(full) + 1):
        for c in itertools.combinations(full, r):
            yield SimpleSubset(kind, d, frozenset(c))


def test_hyperspecial_counts():
    J = SimpleSubset.of("unitary", 3, [1])
    w = CoxElement.from_word("unitary", 3, [2])
    assert count_points(DLDescriptor("unitary", J, w), closed=True) == 28
    assert count_points(DLDescriptor("unitary", J, CoxElement.identity("unitary", 3))) == 28
    assert count_points(DLDescriptor("unitary", J, w)) == 0
    # the coarse variety of the minimal representative has the same dimension
    assert dim_coarse(J, CoxElement.identity("unitary", 3), strict=True) == w.length() == 1


def test_coxeter_type_irreducible():
    w = CoxElement.from_word("unitary", 3, [1, 2])
    assert is_irreducible(SimpleSubset.empty("unitary", 3), w)
    assert not is_irreducible(SimpleSubset.empty("unitary", 3), CoxElement.identity("unitary", 3))


def test_f_stable_subsets():
    assert len(f_stable_subsets("unitary", 4)) == 4
    assert len(f_stable_subsets("linear", 3)) == 4


def test_flag_type():
    assert flag_type_of(SimpleSubset.of("unitary", 4, [1])) == (2, 1, 1)


def test_classify_partial_flag_hyperspecial():
    C = census("unitary", 3, 3)
    spec = FieldSpec(3)
    J = SimpleSubset.of("unitary", 3, [1])
    seen = {}
    for X in C.X[:200]:
        piece = Flag.from_basis(X, spec, dims=[2]).steps[0]
        w = classify_partial_flag("unitary", spec, [piece])
        seen[w] = seen.get(w, 0) + 1
    assert set(seen) <= set(reduced_elements(J))


def test_census_guard():
    with pytest.raises(SizeGuard):
        census("fake_unitary", 4, 3)
    with pytest.raises(SizeGuard):
        census("unitary", 5, 3)
