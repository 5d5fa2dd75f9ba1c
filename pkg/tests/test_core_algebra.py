import numpy as np
import pytest

from btstrat.core_algebra import (GF, FieldSpec, TruncSeries, field, embed, conway_modulus,
                                  rref, rank, nullspace, matmul, intersect_rows, FieldError,
                                  WindowMismatch)


@pytest.mark.parametrize("p,e", [(3, 1), (3, 2), (3, 4), (5, 2), (7, 2)])
def test_field_axioms(p, e):
    F = field(p, e)
    x = np.arange(F.Q)
    assert np.all(F.add(x, F.neg[x]) == 0)
    assert np.all(F.mul(x[1:], F.inv[x[1:]]) == 1)
    a, b, c = x[:, None, None], x[None, :, None], x[None, None, :]
    if F.Q <= 25:
        assert np.array_equal(F.mul(a, F.add(b, c)), F.add(F.mul(a, b), F.mul(a, c)))


def test_frobenius_is_additive_and_fixes_subfield():
    F = field(3, 4)
    fr = F.frob_table(9)
    x = np.arange(F.Q)
    assert np.array_equal(fr[F.add(x[:, None], x[None, :])], F.add(fr[x][:, None], fr[x][None, :]))
    assert len(F.subfield_elements(2)) == 9


def test_conway_compatibility():
    small, big = field(3, 2), field(3, 4)
    x = np.arange(9)
    y = embed(small, big, x)
    assert len(set(y.tolist())) == 9
    assert np.array_equal(embed(small, big, small.mul(x[:, None], x[None, :])),
                          big.mul(y[:, None], y[None, :]))
    assert np.array_equal(embed(small, big, small.add(x[:, None], x[None, :])),
                          big.add(y[:, None], y[None, :]))
    assert conway_modulus(3, 1) == (1, 1)


def test_bad_fields():
    with pytest.raises(FieldError):
        GF(4, 1)
    with pytest.raises(FieldError):
        GF(3, 2, modulus=(1, 0, 1, 1))


def test_fieldspec_tower():
    s = FieldSpec(3, 1, 2)
    assert (s.q, s.e, s.Q) == (3, 4, 81)
    assert s.is_rational(s.rational_elements())
    assert not s.is_rational(np.arange(81))


def test_linear_algebra():
    F = field(3, 2)
    rng = np.random.default_rng(0)
    for _ in range(20):
        A = rng.integers(0, 9, size=(3, 5))
        R, piv = rref(F, A)
        K = nullspace(F, A)
        assert rank(F, A) == len(piv)
        assert K.shape[0] == 5 - len(piv)
        if len(K):
            assert not matmul(F, A, K.T).any()
    A = np.array([[1, 0, 0], [0, 1, 0]])
    B = np.array([[0, 1, 0], [0, 0, 1]])
    assert intersect_rows(F, A, B).tolist() == [[0, 1, 0]]


def test_trunc_series():
    s = FieldSpec(3)
    pi = TruncSeries.pi(s, 2)
    one = TruncSeries.one(s, 2)
    assert (pi * pi).val() == 2
    assert (pi * pi * pi * pi).val() == 4    # truncated to zero
    assert (one + pi).is_unit() and not pi.is_unit()
    assert (one - one).val() == 4
    with pytest.raises(WindowMismatch):
        one + TruncSeries.one(s, 3)
