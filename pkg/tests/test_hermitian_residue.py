import numpy as np
import pytest

from btstrat.core_algebra import FieldSpec
from btstrat.lattices import AmbientSpace, vertex_recognize, contains
from btstrat.hermitian_residue import (residue_space, enumerate_coisotropic, count_coisotropic,
                                       coisotropic_count_formula, lift_to_vertex, residue_of, orth,
                                       vertex_lattices_by_scan, HermSpace, DegenerateForm, SizeGuard)


def std_vertex(n, vstar, q=3):
    amb = AmbientSpace(n, FieldSpec(q), 3, vstar=vstar)
    return vertex_recognize(amb.std(), 0)


def min_vertex(n, vstar, q=3):
    lam = std_vertex(n, vstar, q)
    V = residue_space(lam, 0)
    k = (V.dim + 1) // 2
    U = enumerate_coisotropic(V, k)[0]
    return lift_to_vertex(lam, U, "sub", 2 * k - V.dim)


@pytest.mark.parametrize("n,vstar", [(2, 0), (3, 0), (3, 1), (4, 1)])
def test_residue_dims(n, vstar):
    lam = std_vertex(n, vstar)
    assert residue_space(lam, 0).dim == lam.type_t
    assert residue_space(lam, 1).dim == n - lam.type_t


def test_coisotropic_counts_hyperspecial():
    V = residue_space(std_vertex(3, 0), 0)
    assert count_coisotropic(V, 2) == 28 == coisotropic_count_formula(3, 2, 3)
    assert count_coisotropic(V, 1) == 0
    assert count_coisotropic(V, 3) == 1


def test_coisotropic_subspaces_contain_their_orthogonal():
    V = residue_space(std_vertex(4, 0), 0)
    for U in enumerate_coisotropic(V, 3)[:20]:
        assert U.contains(orth(U))


@pytest.mark.parametrize("n,vstar", [(3, 0), (3, 1), (4, 1)])
def test_sub_lifts_are_vertex_lattices(n, vstar):
    lam = std_vertex(n, vstar)
    V = residue_space(lam, 0)
    for k in range((V.dim + 1) // 2, V.dim + 1):
        t = 2 * k - V.dim
        lifts = [lift_to_vertex(lam, U, "sub", t).lattice for U in enumerate_coisotropic(V, k)]
        assert len(set(lifts)) == len(lifts)
        assert sorted(lifts, key=lambda L: L.key) == vertex_lattices_by_scan(lam, "sub", t)
        for L in lifts[:5]:
            assert contains(lam.lattice, L)
            assert residue_of(lam, L).dim == k


@pytest.mark.parametrize("n,vstar", [(3, 0), (4, 1)])
def test_over_lifts_match_scan(n, vstar):
    lam = min_vertex(n, vstar)
    V = residue_space(lam, 1)
    for k in range((V.dim + 1) // 2, V.dim + 1):
        t = lam.type_t + 2 * (V.dim - k)
        lifts = {lift_to_vertex(lam, U, "over", t).lattice for U in enumerate_coisotropic(V, k)}
        assert len(lifts) == coisotropic_count_formula(V.dim, k, 3)
        assert sorted(lifts, key=lambda L: L.key) == vertex_lattices_by_scan(lam, "over", t)


def test_lift_rejects_bad_dimension():
    lam = std_vertex(3, 0)
    V = residue_space(lam, 0)
    U = enumerate_coisotropic(V, 2)[0]
    with pytest.raises(ValueError):
        lift_to_vertex(lam, U, "sub", 3)
    with pytest.raises(ValueError):
        lift_to_vertex(lam, U, "over", 1)


def test_degenerate_gram_rejected():
    with pytest.raises(DegenerateForm):
        HermSpace(2, FieldSpec(3), np.array([[1, 1], [1, 1]]))


def test_size_guard():
    V = HermSpace(5, FieldSpec(3), np.eye(5, dtype=np.int64))
    with pytest.raises(SizeGuard):
        enumerate_coisotropic(V, 3)
