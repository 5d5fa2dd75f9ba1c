import numpy as np
import pytest

from btstrat.core_algebra import FieldSpec
from btstrat.lattices import (AmbientSpace, contains, index_in, lattice_sum, lattice_intersection,
                              tau_closure, vertex_recognize, vertex_type, type_parity, from_vectors,
                              NotContained, WindowOverflow)


@pytest.fixture(params=[0, 1])
def amb(request):
    return AmbientSpace(3, FieldSpec(3), 3, vstar=request.param)


def test_dual_is_an_involution(amb):
    for exps in ([0, 0, 0], [0, 1, 1], [-1, 0, 2], [1, 1, 1]):
        L = amb.diagonal(exps)
        assert L.dual().dual() == L
        assert L.dual().vol == amb.vstar - L.vol


def test_index_additivity(amb):
    A = amb.diagonal([1, 1, 0])
    B = amb.diagonal([1, 0, 0])
    C = amb.diagonal([0, 0, 0])
    assert index_in(A, C) == index_in(A, B) + index_in(B, C)
    with pytest.raises(NotContained):
        index_in(C, A)


def test_sum_and_intersection(amb):
    A = amb.diagonal([1, 0, 0])
    B = amb.diagonal([0, 1, 0])
    S, T = lattice_sum(A, B), lattice_intersection(A, B)
    assert S == amb.std() and T == amb.diagonal([1, 1, 0])
    assert contains(S, A) and contains(A, T)


def test_standard_lattice_is_a_vertex(amb):
    lam = vertex_recognize(amb.std(), 0)
    assert lam.type_t == amb.n - amb.vstar
    assert lam.type_t % 2 == type_parity(amb, 0)
    assert vertex_type(amb.diagonal([-1, 0, 0]), 0) is None


def test_tau_closure_of_a_nonrational_lattice():
    amb = AmbientSpace(2, FieldSpec(3, 1, 2), 2)
    F = amb.F
    a = int(np.flatnonzero(~F.in_subfield(np.arange(F.Q), 2))[0])
    vecs = np.zeros((3, 2, 2), dtype=np.int64)
    vecs[0, 0] = [1, a]
    vecs[1, 1, 0] = 1
    vecs[2, 1, 1] = 1
    L = from_vectors(amb, vecs, 0)
    assert not L.is_rational()
    c, T = tau_closure(L)
    assert c == 2 and T == amb.std() and T.is_rational()


def test_window_overflow():
    amb = AmbientSpace(2, FieldSpec(3), 1)
    with pytest.raises(WindowOverflow):
        amb.diagonal([0, 0]).scale(2)
