"""Residue hermitian spaces of vertex lattices and their coisotropic subspaces."""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field as dc_field

import numpy as np

from .core_algebra import FieldSpec, rref, nullspace, batch_rank, matmul
from .lattices import (VertexLattice, WindowLattice, _make, _normalize,
                       vertex_recognize)


class SizeGuard(RuntimeError):
    pass


class DegenerateForm(ValueError):
    pass


MAX_DIM = 4
MAX_Q = 5


def pairing_coeffs(amb, X, Y, lo_x, lo_y):
    """Laurent coefficients of {x_a, y_b} = x^T G sigma(y).

    X: (a, Px, n), Y: (b, Py, n).  Returns (lowest power, array (a, b, L))."""
    F = amb.F
    fr = amb.spec.frob()
    G = amb.gram_coeffs
    n = amb.n
    X = np.asarray(X, dtype=np.int64)
    sY = fr[np.asarray(Y, dtype=np.int64)]
    Px, Py = X.shape[1], sY.shape[1]
    L = Px + Py + 1
    out = np.zeros((X.shape[0], sY.shape[0], L), dtype=np.int64)
    for g in range(2):
        GY = np.zeros_like(sY)
        for j in range(n):
            for jj in range(n):
                c = G[j, jj, g]
                if c:
                    GY[:, :, j] = F.add(GY[:, :, j], F.mul(c, sY[:, :, jj]))
        if not GY.any():
            continue
        for k in range(Px):
            for kk in range(Py):
                prod = np.zeros((X.shape[0], sY.shape[0]), dtype=np.int64)
                for j in range(n):
                    prod = F.add(prod, F.mul(X[:, k, j][:, None], GY[:, kk, j][None, :]))
                out[:, :, k + kk + g] = F.add(out[:, :, k + kk + g], prod)
    return lo_x + lo_y, out


class Quotient:
    """T / S for lattices S <= T with pi T <= S, as an F-vector space."""

    def __init__(self, S: WindowLattice, T: WindowLattice):
        amb = S.ambient
        self.S, self.T, self.amb = S, T, amb
        F = amb.F
        self.lo, self.hi = min(S.lo, T.lo), max(S.hi, T.hi)
        self.RS = S.frame(self.lo, self.hi)
        RT = T.frame(self.lo, self.hi)
        red = self.reduce(RT)
        red = red[red.any(axis=1)]
        if len(red):
            B, piv = rref(F, red)
        else:
            B, piv = np.zeros((0, RT.shape[1]), dtype=np.int64), []
        self.basis = B
        self.piv = piv
        self.dim = len(piv)

    def reduce(self, X):
        F = self.amb.F
        X = np.array(X, dtype=np.int64, copy=True)
        R = self.RS
        if R.shape[0] == 0 or X.shape[0] == 0:
            return X
        lead = (R != 0).argmax(axis=1)
        for i, c in enumerate(lead):
            f = X[:, c]
            nz = np.flatnonzero(f)
            if nz.size:
                X[nz] = F.sub(X[nz], F.mul(f[nz][:, None], R[i][None, :]))
        return X

    def coords(self, X):
        """Coordinates of vectors of T (frame rows) in the quotient basis."""
        return self.reduce(X)[:, self.piv]

    def vectors(self, U):
        """Frame rows for the combinations U (rows) of the basis."""
        U = np.asarray(U, dtype=np.int64)
        if U.shape[0] == 0:
            return np.zeros((0, self.basis.shape[1]), dtype=np.int64)
        return matmul(self.amb.F, U, self.basis)

    def lift(self, U) -> WindowLattice:
        """Preimage of the span of U in T."""
        rows = np.concatenate([self.RS, self.vectors(U)])
        return _make(self.amb, self.lo, self.hi, rows)

    def lattice_coords(self, L: WindowLattice):
        """RREF basis of L / S for S <= L <= T."""
        X = L.frame(self.lo, self.hi)
        C = self.coords(X)
        C = C[C.any(axis=1)]
        if len(C) == 0:
            return np.zeros((0, self.dim), dtype=np.int64)
        return rref(self.amb.F, C)[0]

    def as_vecs(self, rows):
        P = self.hi - self.lo
        return np.asarray(rows).reshape(len(rows), P, self.amb.n)


@dataclass(eq=False)
class HermSpace:
    dim: int
    spec: FieldSpec
    gram: np.ndarray
    provenance: dict | None = dc_field(default=None, repr=False)

    def __post_init__(self):
        self.gram = np.asarray(self.gram, dtype=np.int64).reshape(self.dim, self.dim)
        F = self.spec.gf
        fr = self.spec.frob()
        if not np.array_equal(self.gram, fr[self.gram].T):
            raise DegenerateForm("gram is not hermitian")
        if self.dim and batch_rank(F, self.gram[None])[0] != self.dim:
            raise DegenerateForm("induced form is degenerate")

    @property
    def q(self):
        return self.spec.q

    @property
    def F(self):
        return self.spec.gf

    def whole(self):
        return Subspace(self, np.eye(self.dim, dtype=np.int64))

    def zero(self):
        return Subspace(self, np.zeros((0, self.dim), dtype=np.int64))

    def span(self, rows):
        rows = np.asarray(rows, dtype=np.int64).reshape(-1, self.dim)
        if rows.shape[0] == 0:
            return self.zero()
        R, _ = rref(self.F, rows)
        return Subspace(self, R)

    def form(self, x, y):
        F = self.F
        fr = self.spec.frob()
        return int(matmul(F, matmul(F, np.asarray(x)[None], self.gram), fr[np.asarray(y)][:, None])[0, 0])


class Subspace:
    __slots__ = ("space", "basis", "_key")

    def __init__(self, space: HermSpace, basis):
        self.space = space
        basis = np.asarray(basis, dtype=np.int64)
        self.basis = basis.reshape(-1, space.dim) if space.dim else np.zeros((0, 0), dtype=np.int64)
        self._key = (self.basis.shape[0], self.basis.tobytes())

    @property
    def dim(self):
        return self.basis.shape[0]

    def __eq__(self, other):
        return isinstance(other, Subspace) and self._key == other._key

    def __hash__(self):
        return hash(self._key)

    def __repr__(self):
        return f"Subspace(dim={self.dim}, basis={self.basis.tolist()})"

    def contains(self, other) -> bool:
        F = self.space.F
        if other.dim == 0:
            return True
        return batch_rank(F, np.concatenate([self.basis, other.basis])[None])[0] == self.dim

    def sort_key(self):
        return tuple(self.basis.reshape(-1).tolist())


def orth(U: Subspace) -> Subspace:
    V = U.space
    if U.dim == 0:
        return V.whole()
    F = V.F
    fr = V.spec.frob()
    # v^T G sigma(u) = 0  <=>  (sigma(u)^T G^T) v = 0
    A = matmul(F, fr[U.basis], V.gram.T)
    return Subspace(V, nullspace(F, A))


def residue_space(lam: VertexLattice, which: int) -> HermSpace:
    L, i = lam.lattice, lam.rank_i
    D = L.dual()
    if which == 0:
        S, T, power = D.scale(i + 1), L, i
    elif which == 1:
        S, T, power = L, D.scale(i), i - 1
    else:
        raise ValueError("which must be 0 or 1")
    quo = Quotient(S, T)
    amb = L.ambient
    if quo.dim == 0:
        gram = np.zeros((0, 0), dtype=np.int64)
    else:
        X = quo.as_vecs(quo.basis)
        low, C = pairing_coeffs(amb, X, X, quo.lo, quo.lo)
        k = power - low
        gram = C[:, :, k] if 0 <= k < C.shape[2] else np.zeros((quo.dim, quo.dim), dtype=np.int64)
        if 0 < k and C[:, :, :k].any():
            raise DegenerateForm("pairing is not integral on the residue lattice")
    return HermSpace(quo.dim, amb.spec, gram,
                     provenance={"vertex": lam, "which": which, "quotient": quo})


def _cells(dim, k):
    for piv in itertools.combinations(range(dim), k):
        free = [(r, c) for r in range(k) for c in range(piv[r] + 1, dim) if c not in piv]
        yield piv, free


def grassmannian(values, dim: int, k: int):
    """Yield batches (B, k, dim) of RREF bases of all k-dim subspaces with
    entries from `values` (which must contain 0 and 1), cell by cell."""
    values = np.asarray(values, dtype=np.int64)
    for piv, free in _cells(dim, k):
        f = len(free)
        B = len(values) ** f
        out = np.zeros((B, k, dim), dtype=np.int64)
        for r, c in enumerate(piv):
            out[:, r, c] = 1
        if f:
            idx = np.indices((len(values),) * f).reshape(f, -1)
            for a, (r, c) in enumerate(free):
                out[:, r, c] = values[idx[a]]
        yield out


def grassmannian_size(Qr: int, dim: int, k: int) -> int:
    num = den = 1
    for a in range(k):
        num *= Qr ** (dim - a) - 1
        den *= Qr ** (a + 1) - 1
    return num // den


def coisotropic_mask(V: HermSpace, batch) -> np.ndarray:
    """U^perp <= U for each basis in the batch, via rank(h|_U) = 2k - dim."""
    F = V.F
    fr = V.spec.frob()
    k = batch.shape[1]
    if 2 * k < V.dim:
        return np.zeros(batch.shape[0], dtype=bool)
    if k == 0:
        return np.full(batch.shape[0], V.dim == 0)
    gram_u = matmul(F, matmul(F, batch, V.gram[None]), np.transpose(fr[batch], (0, 2, 1)))
    return batch_rank(F, gram_u) == 2 * k - V.dim


def _guard(V: HermSpace):
    if V.dim > MAX_DIM or V.spec.q > MAX_Q:
        raise SizeGuard(f"Grassmannian scan refused: dim {V.dim}, q {V.spec.q}")


def enumerate_coisotropic(V: HermSpace, k: int):
    if not 0 <= k <= V.dim:
        raise ValueError("dimension out of range")
    if 2 * k < V.dim:
        return []
    _guard(V)
    vals = V.spec.rational_elements()
    out = []
    for batch in grassmannian(vals, V.dim, k):
        ok = coisotropic_mask(V, batch)
        out.extend(Subspace(V, b) for b in batch[ok])
    out.sort(key=Subspace.sort_key)
    return out


def count_coisotropic(V: HermSpace, k: int) -> int:
    if 2 * k < V.dim:
        return 0
    _guard(V)
    vals = V.spec.rational_elements()
    return int(sum(coisotropic_mask(V, b).sum() for b in grassmannian(vals, V.dim, k)))


def lift_to_vertex(lam: VertexLattice, U: Subspace, direction: str, t_target: int) -> VertexLattice:
    n, t, i = lam.n, lam.type_t, lam.rank_i
    V = U.space
    prov = V.provenance or {}
    if prov.get("vertex") is not lam and prov.get("vertex") != lam:
        raise ValueError("subspace does not live in a residue space of this lattice")
    if (t - t_target) % 2:
        raise ValueError("type parity mismatch")
    if direction == "sub":
        if prov["which"] != 0 or U.dim != (t + t_target) // 2 or t_target > t:
            raise ValueError("dimension mismatch for a sub vertex lattice")
        L = prov["quotient"].lift(U.basis)
    elif direction == "over":
        if prov["which"] != 1 or U.dim != n - (t + t_target) // 2 or t_target < t:
            raise ValueError("dimension mismatch for an over vertex lattice")
        L = prov["quotient"].lift(orth(U).basis)
    else:
        raise ValueError("direction must be 'sub' or 'over'")
    out = vertex_recognize(L, i)
    if out is None or out.type_t != t_target:
        raise ValueError("subspace is not coisotropic")
    return out


def residue_of(lam: VertexLattice, L: WindowLattice, which: int = 0) -> Subspace:
    """The subspace of V^which corresponding to a lattice in the residue interval."""
    V = residue_space(lam, which)
    return Subspace(V, V.provenance["quotient"].lattice_coords(L))


def coisotropic_count_formula(dim: int, k: int, q: int) -> int:
    """Number of k-dim coisotropic subspaces of a nondegenerate hermitian space
    of dimension `dim` over F_{q^2}, via U -> U^perp and the isotropic count."""
    r = dim - k
    if r < 0 or 2 * r > dim:
        return 0
    num = den = 1
    for i in range(r):
        a = dim - 2 * i
        num *= (q ** a - (-1) ** a) * (q ** (a - 1) - (-1) ** (a - 1))
        den *= q ** (2 * (i + 1)) - 1
    return num // den


LATTICE_SCAN_LIMIT = 50_000


def _neighbours(lam: VertexLattice, direction: str):
    """Vertex lattices at index one below (sub) or above (over) lam, found by
    scanning every such lattice; the residue form is never consulted."""
    which = 0 if direction == "sub" else 1
    V = residue_space(lam, which)
    quo = V.provenance["quotient"]
    k = V.dim - 1 if direction == "sub" else 1
    if k < 0 or k > V.dim or V.dim == 0:
        return []
    if grassmannian_size(V.spec.Q, V.dim, k) > LATTICE_SCAN_LIMIT:
        raise SizeGuard(f"lattice scan refused: Gr({k},{V.dim}) over F_{V.spec.Q}")
    want = lam.type_t - 2 if direction == "sub" else lam.type_t + 2
    out = []
    for batch in grassmannian(V.spec.rational_elements(), V.dim, k):
        for b in batch:
            v = vertex_recognize(quo.lift(b), lam.rank_i)
            if v is not None and v.type_t == want:
                out.append(v)
    return out


def vertex_lattices_by_scan(lam: VertexLattice, direction: str, t_target: int):
    """Lattice-side oracle for the sub/over vertex lattices of type t_target,
    by descending (or ascending) one index step at a time."""
    if direction not in ("sub", "over"):
        raise ValueError("direction must be 'sub' or 'over'")
    t = lam.type_t
    if (t - t_target) % 2 or (t_target > t if direction == "sub" else t_target < t):
        return []
    layer = {lam.lattice: lam}
    while next(iter(layer.values())).type_t != t_target:
        nxt = {}
        for v in layer.values():
            for w in _neighbours(v, direction):
                nxt.setdefault(w.lattice, w)
        if not nxt:
            return []
        layer = nxt
    return sorted(layer, key=lambda L: L.key)
