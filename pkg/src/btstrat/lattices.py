"""Window lattices in the hermitian space C = F((pi))^n.

A lattice L with pi^hi Lambda_std <= L <= pi^lo Lambda_std is stored as the
RREF basis of L / pi^hi Lambda_std inside pi^lo Lambda_std / pi^hi Lambda_std,
an F-vector space with coordinates (k, j) for lo <= k < hi, ordered power
first.  The frame (lo, hi) is kept tight, which makes the stored data a
canonical form: two lattices are equal iff their keys agree.
"""

from __future__ import annotations

from dataclasses import dataclass, field as dc_field

import numpy as np

from .core_algebra import FieldSpec, TruncSeries, rref, nullspace, intersect_rows, in_rowspace


class WindowOverflow(ValueError):
    pass


class NotContained(ValueError):
    pass


class RankDeficient(ValueError):
    pass


@dataclass(eq=False)
class AmbientSpace:
    """C with a diagonal hermitian gram diag(1, ..., 1, pi^vstar).

    vstar = 0 or 1 selects the parity regime (`parity_tag`)."""
    n: int
    spec: FieldSpec
    N: int
    vstar: int = 0
    gram_coeffs: np.ndarray = dc_field(default=None, repr=False)

    def __post_init__(self):
        if self.vstar not in (0, 1):
            raise ValueError("det valuation must be 0 or 1")
        if self.gram_coeffs is None:
            g = np.zeros((self.n, self.n, 2), dtype=np.int64)
            for j in range(self.n):
                g[j, j, 0] = 1
            if self.vstar:
                g[self.n - 1, self.n - 1] = [0, 1]
            self.gram_coeffs = g
        self.F = self.spec.gf
        self._duals = {}
        self._incl = {}

    @classmethod
    def for_tuple(cls, n, h1, spec, N):
        """Fixture whose type parities match a parahoric tuple starting at h1."""
        return cls(n, spec, N, vstar=0 if (n - h1) % 2 else 1)

    @property
    def parity_tag(self):
        return self.vstar

    @property
    def gram(self):
        """Gram matrix as TruncSeries entries."""
        return [[TruncSeries.from_list(self.spec, self.gram_coeffs[a, b], self.N)
                 for b in range(self.n)] for a in range(self.n)]

    def std(self):
        return WindowLattice(self, 0, 0, np.zeros((0, 0), dtype=np.int64))

    def diagonal(self, exps):
        """The lattice spanned by pi^{exps[j]} e_j."""
        lo, hi = min(exps), max(exps)
        cols = self.n * (hi - lo)
        rows = []
        for k in range(lo, hi):
            for j in range(self.n):
                if k >= exps[j]:
                    r = np.zeros(cols, dtype=np.int64)
                    r[(k - lo) * self.n + j] = 1
                    rows.append(r)
        M = np.array(rows, dtype=np.int64).reshape(len(rows), cols)
        return _make(self, lo, hi, M)

    def __repr__(self):
        return f"AmbientSpace(n={self.n}, q={self.spec.q}, d={self.spec.d}, N={self.N}, vstar={self.vstar})"


# per-ambient caches of duals and inclusions are dropped past this size
MEMO_LIMIT = 200_000


class WindowLattice:
    __slots__ = ("ambient", "lo", "hi", "M", "_key", "_hash", "_dual")

    def __init__(self, ambient, lo, hi, M):
        self.ambient = ambient
        self.lo, self.hi = lo, hi
        self.M = M
        self.M.setflags(write=False)
        self._key = (lo, hi, M.shape[0], M.tobytes())
        self._hash = hash(self._key)
        self._dual = None
        N = ambient.N
        if lo < -N or hi > N:
            raise WindowOverflow(f"lattice leaves the window [pi^{N}, pi^-{N}]: frame ({lo},{hi})")

    @property
    def key(self):
        return self._key

    def __eq__(self, other):
        return isinstance(other, WindowLattice) and self._key == other._key

    def __hash__(self):
        return self._hash

    def __repr__(self):
        return f"WindowLattice(frame=({self.lo},{self.hi}), vol={self.vol})"

    @property
    def n(self):
        return self.ambient.n

    @property
    def vol(self):
        """[L : Lambda_std] as a signed length."""
        return self.M.shape[0] - self.n * self.hi

    def frame(self, lo, hi):
        """Basis of L / pi^hi in coordinates of pi^lo / pi^hi."""
        if lo > self.lo or hi < self.hi:
            raise ValueError("frame too small")
        n = self.n
        cols = n * (hi - lo)
        out = np.zeros((self.M.shape[0] + n * (hi - self.hi), cols), dtype=np.int64)
        off = n * (self.lo - lo)
        r = self.M.shape[0]
        out[:r, off:off + self.M.shape[1]] = self.M
        for k in range(self.hi, hi):
            for j in range(n):
                out[r, (k - lo) * n + j] = 1
                r += 1
        return out

    def scale(self, c: int):
        """pi^c L."""
        if c == 0:
            return self
        return WindowLattice(self.ambient, self.lo + c, self.hi + c, self.M)

    def hermite_vectors(self):
        """(lo, array (n, hi-lo, n)) with row j the basis vector pivoting on e_j."""
        n, lo, hi = self.n, self.lo, self.hi
        P = hi - lo
        out = np.zeros((n, P, n), dtype=np.int64)
        lead = {}
        for r in range(self.M.shape[0]):
            c = int(np.flatnonzero(self.M[r])[0])
            k, j = divmod(c, n)
            if j not in lead:
                lead[j] = r
        for j in range(n):
            if j in lead:
                out[j] = self.M[lead[j]].reshape(P, n)
            else:
                # e_j itself lies in pi^hi ... only if hi == lo; then pi^hi e_j
                pass
        vec_lo = lo
        if len(lead) < n:
            # some coordinates start at power hi: extend the frame by one
            ext = np.zeros((n, P + 1, n), dtype=np.int64)
            ext[:, :P] = out
            for j in range(n):
                if j not in lead:
                    ext[j, P, j] = 1
            out = ext
        return vec_lo, out

    @property
    def basis(self):
        """Hermite basis as an n x n matrix of TruncSeries (columns = generators),
        coefficient index k standing for pi^{k-N}."""
        spec, N = self.ambient.spec, self.ambient.N
        lo, vecs = self.hermite_vectors()
        cols = []
        for j in range(self.n):
            col = []
            for a in range(self.n):
                c = [0] * (2 * N)
                for k in range(vecs.shape[1]):
                    if vecs[j, k, a]:
                        c[lo + k + N] = int(vecs[j, k, a])
                col.append(TruncSeries(spec, tuple(c)))
            cols.append(col)
        return [[cols[j][a] for j in range(self.n)] for a in range(self.n)]

    def is_rational(self):
        return self.ambient.spec.is_rational(self.M) if self.M.size else True

    def dual(self):
        if self._dual is None:
            memo = self.ambient._duals
            D = memo.get(self)
            if D is None:
                if len(memo) > MEMO_LIMIT:
                    memo.clear()
                D = memo[self] = _dual(self)
                memo.setdefault(D, self)
            self._dual = D
        return self._dual

    def __le__(self, other):
        return contains(other, self)


def _normalize(amb, lo, hi, M):
    """Tighten the frame of an RREF basis of a pi-stable L containing pi^hi."""
    n = amb.n
    if M.shape[0] == 0:
        return WindowLattice(amb, hi, hi, np.zeros((0, 0), dtype=np.int64))
    cols = M.shape[1]
    P = hi - lo
    nz = M != 0
    lead = nz.argmax(axis=1)
    unit = np.zeros(cols, dtype=bool)
    rowcount = nz.sum(axis=1)
    unit[lead[rowcount == 1]] = True
    unit2 = unit.reshape(P, n).all(axis=1)
    newhi = hi
    while newhi > lo and unit2[newhi - lo - 1]:
        newhi -= 1
    anycol = nz.any(axis=0).reshape(P, n).any(axis=1)
    first = int(np.argmax(anycol)) + lo if anycol.any() else hi
    newlo = min(first, newhi)
    keep = lead < (newhi - lo) * n
    M2 = M[keep][:, (newlo - lo) * n:(newhi - lo) * n]
    return WindowLattice(amb, newlo, newhi, np.ascontiguousarray(M2))


def _make(amb, lo, hi, rows):
    F = amb.F
    R, _ = rref(F, rows) if len(rows) else (np.zeros((0, amb.n * (hi - lo)), dtype=np.int64), [])
    return _normalize(amb, lo, hi, R)


def _shift_closure(n, lo, hi, vecs):
    """Rows for the O-span of vectors (count, P, n) at power offset lo, mod pi^hi."""
    P = hi - lo
    rows = []
    for v in vecs:
        for s in range(P):
            r = np.zeros((P, n), dtype=np.int64)
            r[s:] = v[:P - s]
            if r.any():
                rows.append(r.reshape(-1))
    return rows


def from_vectors(amb: AmbientSpace, vecs, lo: int):
    """O-span of coefficient vectors; vecs has shape (count, P, n), entry
    [c, k, j] the coefficient of pi^{lo+k} e_j.  Must have full rank inside the
    window."""
    vecs = np.asarray(vecs, dtype=np.int64)
    n, N = amb.n, amb.N
    hi = N + 1
    if lo > hi:
        raise RankDeficient("generators too deep")
    P = hi - lo
    v = np.zeros((vecs.shape[0], P, n), dtype=np.int64)
    k = min(P, vecs.shape[1])
    v[:, :k] = vecs[:, :k]
    rows = _shift_closure(n, lo, hi, v)
    if not rows:
        raise RankDeficient("no generators")
    R, piv = rref(amb.F, np.array(rows))
    top = set(range((N - lo) * n, (hi - lo) * n))
    if not top <= set(piv):
        raise RankDeficient("generators do not span a full-rank lattice inside the window")
    return _normalize(amb, lo, hi, R)


def canonicalize(amb: AmbientSpace, generators):
    """Lattice spanned by columns of TruncSeries vectors (coefficient k <-> pi^{k-N})."""
    N = amb.N
    vecs = []
    for col in generators:
        v = np.zeros((2 * N, amb.n), dtype=np.int64)
        for a, s in enumerate(col):
            v[:, a] = s.coeffs
        vecs.append(v)
    return from_vectors(amb, np.array(vecs), -N)


def _common(*Ls):
    lo = min(L.lo for L in Ls)
    hi = max(L.hi for L in Ls)
    return lo, hi


def contains(B: WindowLattice, A: WindowLattice) -> bool:
    """A <= B."""
    if A.vol > B.vol or A.lo < B.lo or A.hi < B.hi:
        return False
    memo = A.ambient._incl
    k = (B._key, A._key)
    r = memo.get(k)
    if r is None:
        if len(memo) > MEMO_LIMIT:
            memo.clear()
        lo, hi = _common(A, B)
        r = memo[k] = in_rowspace(A.ambient.F, B.frame(lo, hi), A.frame(lo, hi))
    return r


def index_in(A: WindowLattice, B: WindowLattice) -> int:
    """[B : A] for A <= B."""
    if not contains(B, A):
        raise NotContained("first lattice is not contained in the second")
    return B.vol - A.vol


def lattice_sum(A, B):
    lo, hi = _common(A, B)
    return _make(A.ambient, lo, hi, np.concatenate([A.frame(lo, hi), B.frame(lo, hi)]))


def lattice_sum_many(Ls):
    lo, hi = _common(*Ls)
    return _make(Ls[0].ambient, lo, hi, np.concatenate([L.frame(lo, hi) for L in Ls]))


def lattice_intersection(A, B):
    lo, hi = _common(A, B)
    R = intersect_rows(A.ambient.F, A.frame(lo, hi), B.frame(lo, hi))
    return _normalize(A.ambient, lo, hi, R)


def sum_intersect(A, B):
    return lattice_sum(A, B), lattice_intersection(A, B)


def _dual(L: WindowLattice) -> WindowLattice:
    amb = L.ambient
    F, n = amb.F, amb.n
    fr = amb.spec.frob()
    lo_b, vecs = L.hermite_vectors()          # (n, Pb, n)
    Pb = vecs.shape[1]
    # c_j = G sigma(b_j): coefficients at powers lo_b .. lo_b+Pb (gram degree <= 1)
    G = amb.gram_coeffs
    sb = fr[vecs]
    C = np.zeros((n, Pb + 1, n), dtype=np.int64)
    for a in range(n):
        for b in range(n):
            for g in range(2):
                if G[a, b, g]:
                    C[:, g:g + Pb, a] = F.add(C[:, g:g + Pb, a], F.mul(G[a, b, g], sb[:, :, b]))
    lo_d, hi_d = -L.hi - 1, -L.lo
    Pd = hi_d - lo_d
    # coefficient of pi^s in sum_{k,a} x_{k,a} C[j, s-k-lo_b, a], for s < 0
    s_vals = list(range(lo_d + lo_b, 0))
    A = np.zeros((n * len(s_vals), Pd * n), dtype=np.int64)
    for k in range(Pd):
        pk = lo_d + k
        for si, s in enumerate(s_vals):
            idx = s - pk - lo_b
            if 0 <= idx < Pb + 1:
                A[si * n:(si + 1) * n, k * n:(k + 1) * n] = C[:, idx, :]
    K = nullspace(F, A)
    return _normalize(amb, lo_d, hi_d, K)


def dual(L: WindowLattice) -> WindowLattice:
    return L.dual()


def tau_apply(L: WindowLattice, times: int = 1) -> WindowLattice:
    """Coefficientwise q^2-Frobenius, applied `times` times."""
    if L.M.size == 0:
        return L
    tab = L.ambient.spec.gf.frob_table(L.ambient.spec.q ** (2 * times))
    return WindowLattice(L.ambient, L.lo, L.hi, np.ascontiguousarray(tab[L.M]))


def tau_closure(L: WindowLattice):
    """(c, T_c(L)) with c minimal such that T_c(L) is tau-stable."""
    T, c = L, 1
    while True:
        tT = tau_apply(T)
        if tT == T:
            return c, T
        T = lattice_sum(L, tT)
        c += 1
        if c > 64:
            raise WindowOverflow("tau closure did not stabilize")


def tau_chain(L: WindowLattice):
    """[T_1, ..., T_c]."""
    out = [L]
    while True:
        nxt = lattice_sum(L, tau_apply(out[-1]))
        if nxt == out[-1]:
            return out
        out.append(nxt)


@dataclass(frozen=True)
class VertexLattice:
    lattice: WindowLattice
    rank_i: int
    type_t: int

    @property
    def n(self):
        return self.lattice.n


def type_parity(amb: AmbientSpace, i: int) -> int:
    """Parity of vertex-lattice types in L_i for this gram fixture."""
    return (amb.n - amb.vstar) % 2 if i % 2 == 0 else amb.vstar % 2


def vertex_type(L: WindowLattice, i: int):
    """t with L in L_i of type t, or None."""
    D = L.dual()
    low = D.scale(i + 1)
    if not contains(L, low) or not contains(D.scale(i), L):
        return None
    return L.vol - low.vol


def vertex_recognize(L: WindowLattice, i: int):
    if not L.is_rational():
        return None
    t = vertex_type(L, i)
    if t is None:
        return None
    amb = L.ambient
    if not 0 <= t <= amb.n or t % 2 != type_parity(amb, i):
        raise AssertionError(f"vertex lattice of type {t} violates the parity rule")
    td = vertex_type(L.dual(), -i - 1)
    if td != amb.n - t:
        raise AssertionError("dual vertex lattice has the wrong type")
    return VertexLattice(L, i, t)
