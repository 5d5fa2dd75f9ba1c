"""Deligne-Lusztig descriptors and brute-force point counts in flag models.

Three flag models, matching the Coxeter kinds:

* linear: flags G in k^d, compared with the Frobenius image sigma(G);
* unitary: flags G in k^d with a hermitian gram H, compared with G^perp,
  where (G^perp)_j = (G_{d-j})^perp and U^perp = {v : v^T H sigma(u) = 0};
* fake_unitary: pairs (G1, G2) in k^d x k^d with a pairing
  B(x, y) = x^T M sigma(y); G1 is compared with (G2)^perp and G2 with (G1)^perp.

Relative position: w with dim(G_i ∩ G'_j) = #{a <= j : w(a) <= i}, i.e. a
basis adapted to G whose w-permutation is adapted to G'.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from numba import njit

from .core_algebra import FieldSpec, rref, batch_rank, matmul
from .coxeter import (CoxElement, SimpleSubset, i_reduced, reduced_i, leq_IF, bedard,
                      longest_element, conj_intersect, perm_length, parabolic_order,
                      min_double_coset, all_elements, perm_bruhat_le, identity)

MAX_D = 4
MAX_Q = 81
FLAG_LIMIT = 2_000_000


class SizeGuard(RuntimeError):
    pass


@dataclass(frozen=True)
class DLDescriptor:
    kind: str
    I: SimpleSubset
    w: CoxElement
    fine: bool = True

    def __post_init__(self):
        if self.I.kind != self.kind or self.w.kind != self.kind:
            raise ValueError("kind mismatch")
        if self.fine and not i_reduced(self.w, self.I):
            raise ValueError("fine descriptor needs an I-reduced w")

    @property
    def d(self):
        return self.I.d


@dataclass(frozen=True)
class Flag:
    """A partial flag: `steps` are RREF bases of the proper nonzero pieces."""
    d: int
    spec: FieldSpec
    steps: tuple

    @property
    def type(self):
        dims = [0] + [s.shape[0] for s in self.steps] + [self.d]
        return tuple(b - a for a, b in zip(dims, dims[1:]))

    @classmethod
    def from_basis(cls, X, spec, dims=None):
        """Flag spanned by the leading rows of X; complete unless dims given."""
        X = np.asarray(X, dtype=np.int64)
        d = X.shape[1]
        dims = range(1, d) if dims is None else dims
        F = spec.gf
        return cls(d, spec, tuple(rref(F, X[:k])[0] for k in dims))

    def is_complete(self):
        return len(self.steps) == self.d - 1


# -- combinatorial operations ------------------------------------------------------

def flag_type_of(I: SimpleSubset):
    """d_I; a pair of tuples for the product kind."""
    out = []
    for s in range(I.sides):
        dims = [0] + [k + 1 for k in I.gaps(s)] + [I.d]
        out.append(tuple(b - a for a, b in zip(dims, dims[1:])))
    return out[0] if I.sides == 1 else tuple(out)


def dim_coarse(I: SimpleSubset, w: CoxElement, strict: bool = False) -> int:
    """l(w) + l(W_F(I)) - l(W_{I ∩ wF(I)w^-1})."""
    FI = I.frob()
    if strict and not (i_reduced(w, I) and reduced_i(w, FI)):
        raise ValueError("w must lie in ^I W ^F(I)")
    K = conj_intersect(I, w, FI)
    return w.length() + longest_element(FI).length() - longest_element(K).length()


def f_stable_subsets(kind, d):
    base = SimpleSubset.full(kind, d)
    mem = sorted(base.members)
    out = []
    for r in range(len(mem) + 1):
        for c in itertools.combinations(mem, r):
            J = SimpleSubset(kind, d, frozenset(c))
            if J.frob() == J:
                out.append(J)
    return out


def in_parabolic(w: CoxElement, J: SimpleSubset) -> bool:
    for s in range(J.sides):
        p = w.perms[s]
        for k in J.gaps(s):
            if set(p[:k + 1]) != set(range(1, k + 2)):
                return False
    return True


def is_irreducible(I: SimpleSubset, w: CoxElement) -> bool:
    full = SimpleSubset.full(I.kind, I.d)
    for J in f_stable_subsets(I.kind, I.d):
        if J == full or not I <= J:
            continue
        if in_parabolic(w, J):
            return False
    return True


def closure_fine(I: SimpleSubset, w: CoxElement):
    from .coxeter import reduced_elements
    return [v for v in reduced_elements(I) if leq_IF(v, w, I)]


def fine_to_parabolic(I: SimpleSubset, w: CoxElement):
    Iinf, seq = bedard(I, w)
    return Iinf, seq[-1][1]


# -- numeric kernels ---------------------------------------------------------------

@njit(cache=True)
def _profile(P, add_t, mul_t, neg, inv, out):
    """Leftmost-pivot row profile of P (destroyed); out[a] = pivot column of row a."""
    d = P.shape[0]
    cols = P.shape[1]
    for a in range(d):
        c = -1
        for j in range(cols):
            if P[a, j] != 0:
                c = j
                break
        out[a] = c
        if c < 0:
            continue
        ia = inv[P[a, c]]
        for r in range(a + 1, d):
            f = P[r, c]
            if f != 0:
                m = neg[mul_t[f, ia]]
                for j in range(cols):
                    if P[a, j] != 0:
                        P[r, j] = add_t[P[r, j], mul_t[m, P[a, j]]]


@njit(cache=True)
def _perm_code(prof, d, adapted):
    # relative position from the pivot profile pi of P' (0-based):
    # adapted-basis convention w = pi^{-1} w0, the other one w0 pi.  Code = base-d digits.
    code = 0
    base = 1
    if adapted:
        pinv = np.empty(d, np.int64)
        for a in range(d):
            pinv[prof[a]] = a
        for x in range(d):
            code += pinv[d - 1 - x] * base
            base *= d
    else:
        for x in range(d):
            code += (d - 1 - prof[x]) * base
            base *= d
    return code


@njit(cache=True)
def _unitary_codes(X, H, frob, add_t, mul_t, neg, inv, adapted):
    B, d, _ = X.shape
    out = np.empty(B, np.int64)
    P = np.zeros((d, d), np.int64)
    HS = np.zeros((d, d), np.int64)
    prof = np.empty(d, np.int64)
    for b in range(B):
        # HS = H sigma(X)^T  (d x d, column bb = H sigma(x_bb))
        for i in range(d):
            for bb in range(d):
                acc = 0
                for j in range(d):
                    h = H[i, j]
                    if h != 0:
                        x = frob[X[b, bb, j]]
                        if x != 0:
                            acc = add_t[acc, mul_t[h, x]]
                HS[i, bb] = acc
        for a in range(d):
            for bb in range(d):
                acc = 0
                for i in range(d):
                    x = X[b, a, i]
                    if x != 0 and HS[i, bb] != 0:
                        acc = add_t[acc, mul_t[x, HS[i, bb]]]
                P[a, bb] = acc
        _profile(P, add_t, mul_t, neg, inv, prof)
        out[b] = _perm_code(prof, d, adapted)
    return out


@njit(cache=True)
def _solve_rows(A, Y, add_t, mul_t, neg, inv):
    """Return Z with Z A = Y for invertible A (rows), via Gauss-Jordan on A^T."""
    d = A.shape[0]
    m = Y.shape[0]
    # solve A^T z^T = y^T for each row y
    M = np.zeros((d, d + m), np.int64)
    for i in range(d):
        for j in range(d):
            M[i, j] = A[j, i]
        for r in range(m):
            M[i, d + r] = Y[r, i]
    for c in range(d):
        k = -1
        for i in range(c, d):
            if M[i, c] != 0:
                k = i
                break
        if k != c:
            for j in range(d + m):
                t = M[c, j]
                M[c, j] = M[k, j]
                M[k, j] = t
        a = inv[M[c, c]]
        for j in range(d + m):
            M[c, j] = mul_t[M[c, j], a]
        for i in range(d):
            if i != c and M[i, c] != 0:
                f = neg[M[i, c]]
                for j in range(d + m):
                    if M[c, j] != 0:
                        M[i, j] = add_t[M[i, j], mul_t[f, M[c, j]]]
    Z = np.zeros((m, d), np.int64)
    for r in range(m):
        for i in range(d):
            Z[r, i] = M[i, d + r]
    return Z


@njit(cache=True)
def _linear_codes(X, frob, add_t, mul_t, neg, inv, adapted):
    B, d, _ = X.shape
    out = np.empty(B, np.int64)
    S = np.zeros((d, d), np.int64)
    prof = np.empty(d, np.int64)
    P = np.zeros((d, d), np.int64)
    for b in range(B):
        for i in range(d):
            for j in range(d):
                S[i, j] = frob[X[b, i, j]]
        Z = _solve_rows(S, X[b].astype(np.int64), add_t, mul_t, neg, inv)
        for a in range(d):
            for c in range(d):
                P[a, c] = Z[a, d - 1 - c]
        _profile(P, add_t, mul_t, neg, inv, prof)
        out[b] = _perm_code(prof, d, adapted)
    return out


@njit(cache=True)
def _pair_matrix(X, Y, M, frob, add_t, mul_t, P):
    # P[a, b] = x_a^T M sigma(y_b)
    d = X.shape[0]
    for a in range(d):
        for b in range(d):
            acc = 0
            for i in range(d):
                xi = X[a, i]
                if xi == 0:
                    continue
                for j in range(d):
                    if M[i, j] != 0:
                        y = frob[Y[b, j]]
                        if y != 0:
                            acc = add_t[acc, mul_t[xi, mul_t[M[i, j], y]]]
            P[a, b] = acc


@njit(cache=True)
def _fake_codes(X, Y, M, MT2, frob, add_t, mul_t, neg, inv, adapted):
    """Codes of (w1, w2) for all pairs (X[i], Y[j]); MT2 = sigma(M)^T."""
    n1 = X.shape[0]
    n2 = Y.shape[0]
    d = X.shape[1]
    out1 = np.empty(n1 * n2, np.int64)
    out2 = np.empty(n1 * n2, np.int64)
    P = np.zeros((d, d), np.int64)
    prof = np.empty(d, np.int64)
    k = 0
    for i in range(n1):
        for j in range(n2):
            _pair_matrix(X[i], Y[j], M, frob, add_t, mul_t, P)
            _profile(P, add_t, mul_t, neg, inv, prof)
            out1[k] = _perm_code(prof, d, adapted)
            _pair_matrix(Y[j], X[i], MT2, frob, add_t, mul_t, P)
            _profile(P, add_t, mul_t, neg, inv, prof)
            out2[k] = _perm_code(prof, d, adapted)
            k += 1
    return out1, out2


@njit(cache=True)
def _prefix_rref(X, add_t, mul_t, neg, inv):
    """RREF of X[:k] for k = 1..d-1, padded to d x d, as uint8."""
    B, d, _ = X.shape
    out = np.zeros((B, max(d - 1, 0), d, d), np.uint8)
    M = np.zeros((d, d), np.int64)
    for b in range(B):
        for k in range(1, d):
            for i in range(k):
                for j in range(d):
                    M[i, j] = X[b, i, j]
            r = 0
            for c in range(d):
                if r == k:
                    break
                p = -1
                for i in range(r, k):
                    if M[i, c] != 0:
                        p = i
                        break
                if p < 0:
                    continue
                if p != r:
                    for j in range(d):
                        t = M[r, j]
                        M[r, j] = M[p, j]
                        M[p, j] = t
                a = inv[M[r, c]]
                for j in range(d):
                    M[r, j] = mul_t[M[r, j], a]
                for i in range(k):
                    if i != r and M[i, c] != 0:
                        f = neg[M[i, c]]
                        for j in range(d):
                            if M[r, j] != 0:
                                M[i, j] = add_t[M[i, j], mul_t[f, M[r, j]]]
                r += 1
            for i in range(k):
                for j in range(d):
                    out[b, k - 1, i, j] = M[i, j]
    return out


# -- flag enumeration -----------------------------------------------------------------

def complete_flag_count(Qk: int, d: int) -> int:
    out = 1
    for k in range(1, d + 1):
        out *= sum(Qk ** i for i in range(k))
    return out


def complete_flags(Qk: int, d: int) -> np.ndarray:
    """All complete flags of k^d (|k| = Qk) as normal-form adapted bases, (B, d, d)."""
    chunks = []
    vals = np.arange(Qk, dtype=np.int64)
    for p in itertools.permutations(range(d)):
        free = []
        for a in range(d):
            earlier = set(p[:a])
            free += [(a, c) for c in range(p[a] + 1, d) if c not in earlier]
        f = len(free)
        X = np.zeros((Qk ** f, d, d), dtype=np.uint8)
        for a in range(d):
            X[:, a, p[a]] = 1
        if f:
            idx = np.indices((Qk,) * f, dtype=np.int64).reshape(f, -1)
            for t, (a, c) in enumerate(free):
                X[:, a, c] = vals[idx[t]]
        chunks.append(X)
    return np.concatenate(chunks) if chunks else np.zeros((1, 0, 0), dtype=np.uint8)


RELPOS_ADAPTED = True


def _tables(F):
    return F.add_t, F.mul_t, F.neg, F.inv


def _code_to_perm(code, d):
    out = []
    for _ in range(d):
        out.append(code % d + 1)
        code //= d
    return tuple(out)


def relative_position(F1: Flag, F2: Flag) -> CoxElement:
    """Relative position of two complete flags via the intersection-dimension table."""
    if F1.d != F2.d or not (F1.is_complete() and F2.is_complete()):
        raise ValueError("complete flags of the same dimension expected")
    d = F1.d
    F = F1.spec.gf
    A = [np.zeros((0, d), dtype=np.int64)] + list(F1.steps) + [np.eye(d, dtype=np.int64)]
    Bs = [np.zeros((0, d), dtype=np.int64)] + list(F2.steps) + [np.eye(d, dtype=np.int64)]
    D = np.zeros((d + 1, d + 1), dtype=np.int64)
    for i in range(d + 1):
        for j in range(d + 1):
            stack = np.concatenate([A[i], Bs[j]])
            r = batch_rank(F, stack[None])[0] if stack.shape[0] else 0
            D[i, j] = i + j - r
    return CoxElement("linear", (_perm_from_table(D, d),))


def _perm_from_table(D, d):
    # D[i, j] = #{a <= j : w(a) <= i}
    w = [0] * d
    for a in range(1, d + 1):
        for i in range(1, d + 1):
            if D[i, a] - D[i, a - 1] - D[i - 1, a] + D[i - 1, a - 1] == 1:
                w[a - 1] = i
    return tuple(w)


def relative_position_by_solving(X1, X2, spec: FieldSpec) -> CoxElement:
    """Second algorithm: express X1 in the basis X2 and read the pivot profile."""
    F = spec.gf
    X1 = np.asarray(X1, dtype=np.int64)
    X2 = np.asarray(X2, dtype=np.int64)
    d = X1.shape[0]
    Z = _solve_rows(X2, X1, *_tables(F))
    P = np.ascontiguousarray(Z[:, ::-1])
    prof = np.empty(d, np.int64)
    _profile(P, *_tables(F), prof)
    return CoxElement("linear", (_code_to_perm(_perm_code(prof, d, True), d),))


def twist_flag(G: Flag, kind: str, gram=None) -> Flag:
    """Kind-specific Frobenius-orthogonal flag: sigma(G) or G^perp."""
    F = G.spec.gf
    fr = G.spec.frob()
    d = G.d
    if kind == "linear":
        return Flag(d, G.spec, tuple(rref(F, fr[s])[0] for s in G.steps))
    H = np.eye(d, dtype=np.int64) if gram is None else np.asarray(gram)
    from .core_algebra import nullspace
    steps = []
    for s in reversed(G.steps):
        A = matmul(F, fr[s], H.T)
        steps.append(nullspace(F, A))
    return Flag(d, G.spec, tuple(steps))


# -- the census: every complete flag (pair) with its relative position -------------

class FlagCensus:
    def __init__(self, kind, d, q, e=1, gram=None):
        if d > MAX_D or q ** (2 * e) > MAX_Q:
            raise SizeGuard(f"flag census refused: d={d}, q^(2e)={q ** (2 * e)}")
        p = _prime_of(q)
        f = round(np.log(q) / np.log(p))
        self.spec = FieldSpec(p, f, e)
        self.kind, self.d, self.q, self.e = kind, d, q, e
        Qk = self.spec.Q
        N = complete_flag_count(Qk, d)
        total = N * N if kind == "fake_unitary" else N
        if total > FLAG_LIMIT:
            raise SizeGuard(f"flag census refused: {total} complete flags (pairs)")
        F = self.spec.gf
        tabs = _tables(F)
        fr = self.spec.frob()
        self.X = complete_flags(Qk, d)
        X64 = self.X.astype(np.int64)
        adapted = RELPOS_ADAPTED
        if kind == "unitary":
            H = np.eye(d, dtype=np.int64) if gram is None else np.asarray(gram, dtype=np.int64)
            self.codes = (_unitary_codes(X64, H, fr, *tabs, adapted),)
        elif kind == "linear":
            self.codes = (_linear_codes(X64, fr, *tabs, adapted),)
        else:
            M = np.eye(d, dtype=np.int64) if gram is None else np.asarray(gram, dtype=np.int64)
            MT2 = np.ascontiguousarray(fr[M].T)
            self.codes = _fake_codes(X64, X64, M, MT2, fr, *tabs, adapted)
        self.N = len(self.X)
        self.prefix = _prefix_rref(X64, *tabs) if d > 1 else np.zeros((self.N, 0, d, d), np.uint8)
        self.perms = [_code_to_perm(c, d) for c in range(d ** d)]
        self._groups = {}

    def element_of(self, idx):
        """CoxElement for flag (pair) number idx."""
        if self.kind == "fake_unitary":
            return CoxElement(self.kind, (self.perms[self.codes[0][idx]], self.perms[self.codes[1][idx]]))
        return CoxElement(self.kind, (self.perms[self.codes[0][idx]],))

    def _side_groups(self, gaps):
        key = tuple(gaps)
        if key in self._groups:
            return self._groups[key]
        if not gaps:
            g = np.zeros(self.N, dtype=np.int64)
            out = (g, 1)
        else:
            parts = self.prefix[:, list(gaps)].reshape(self.N, -1)
            v = np.ascontiguousarray(parts).view(np.dtype((np.void, parts.shape[1])))
            _, inv = np.unique(v, return_inverse=True)
            inv = inv.reshape(-1)
            out = (inv.astype(np.int64), int(inv.max()) + 1)
        self._groups[key] = out
        return out

    def groups(self, I: SimpleSubset):
        """(group id per flag (pair), number of groups): flags with the same coarsening."""
        if self.kind == "fake_unitary":
            g1, n1 = self._side_groups(I.gaps(0))
            g2, n2 = self._side_groups(I.gaps(1))
            gid = (g1[:, None] * n2 + g2[None, :]).reshape(-1)
            return gid, n1 * n2
        return self._side_groups(I.gaps(0))

    def element_ids(self):
        """Per flag (pair), an index into `self.elements()`."""
        if self.kind == "fake_unitary":
            return self.codes[0] * (self.d ** self.d) + self.codes[1]
        return self.codes[0]

    def element_from_id(self, k):
        if self.kind == "fake_unitary":
            a, b = divmod(int(k), self.d ** self.d)
            return CoxElement(self.kind, (self.perms[a], self.perms[b]))
        return CoxElement(self.kind, (self.perms[int(k)],))

    def element_id(self, w: CoxElement):
        def code(p):
            return sum((x - 1) * self.d ** i for i, x in enumerate(p))
        if self.kind == "fake_unitary":
            return code(w.perms[0]) * self.d ** self.d + code(w.perms[1])
        return code(w.perms[0])

    @lru_cache(maxsize=None)
    def incidence(self, I: SimpleSubset):
        """Unique (group, element id) pairs realized by refinements."""
        gid, ng = self.groups(I)
        eid = self.element_ids()
        base = int(eid.max()) + 1
        pairs = np.unique(gid * base + eid)
        return pairs // base, pairs % base, ng

    def fine_count(self, I: SimpleSubset, w: CoxElement) -> int:
        g, e, _ = self.incidence(I)
        return int(np.unique(g[e == self.element_id(w)]).size)

    def closed_count(self, I: SimpleSubset, w: CoxElement) -> int:
        g, e, _ = self.incidence(I)
        ok = np.array([self.element_from_id(k).le(w) for k in range(int(e.max()) + 1)])
        return int(np.unique(g[ok[e]]).size)

    def coarse_count(self, I: SimpleSubset, w: CoxElement) -> int:
        g, e, _ = self.incidence(I)
        FI = I.frob()
        uniq = np.unique(e)
        rep = {int(k): min_double_coset(self.element_from_id(k), I, FI) for k in uniq}
        hit = np.array([rep[int(k)] == w for k in e])
        return int(np.unique(g[hit]).size)

    def partition_report(self, I: SimpleSubset):
        """(flags of type d_I, flags in no fine stratum, flags in two or more)."""
        g, e, ng = self.incidence(I)
        red = np.array([i_reduced(self.element_from_id(k), I) for k in range(int(e.max()) + 1)])
        counts = np.bincount(g[red[e]], minlength=ng)
        return ng, int((counts == 0).sum()), int((counts > 1).sum())


def _prime_of(q):
    for p in range(2, q + 1):
        if q % p == 0:
            return p
    raise ValueError("bad q")


@lru_cache(maxsize=16)
def census(kind, d, q, e=1):
    return FlagCensus(kind, d, q, e)


def count_points(desc: DLDescriptor, ext_e: int = 1, q: int = 3, closed: bool = False) -> int:
    """Number of k-points, k = F_{q^{2e}}, of X_I{w} (fine), X_I(w) (coarse), or
    of the closure of the fine stratum when closed=True."""
    d = desc.d
    if d == 0 or (d == 1):
        return 1 if desc.w.is_identity() else 0
    C = census(desc.kind, d, q, ext_e)
    if closed:
        return C.closed_count(desc.I, desc.w)
    if desc.fine:
        return C.fine_count(desc.I, desc.w)
    return C.coarse_count(desc.I, desc.w)


# -- classifying a single partial flag ---------------------------------------------

REFINE_LIMIT = 200_000


def _complement_rows(F, low, high):
    """Rows of `high` extending a basis of `low` to a basis of `high`."""
    rows = list(low)
    out = []
    r = len(rows)
    for v in high:
        cand = np.array(rows + [v], dtype=np.int64)
        if batch_rank(F, cand[None])[0] > r:
            rows.append(v)
            out.append(v)
            r += 1
    return np.array(out, dtype=np.int64).reshape(len(out), high.shape[1])


def refinements(pieces, d, spec: FieldSpec, limit=REFINE_LIMIT):
    """Adapted bases (B, d, d) of all complete flags refining a chain of
    subspaces (RREF bases of strictly increasing dimension)."""
    F = spec.gf
    Qk = spec.Q
    chain = [np.zeros((0, d), dtype=np.int64)] + [np.asarray(p, dtype=np.int64) for p in pieces] \
        + [np.eye(d, dtype=np.int64)]
    total = 1
    for a, b in zip(chain, chain[1:]):
        total *= complete_flag_count(Qk, b.shape[0] - a.shape[0])
    if total > limit:
        raise SizeGuard(f"{total} refinements exceed the limit {limit}")
    parts = []
    for a, b in zip(chain, chain[1:]):
        C = _complement_rows(F, a, b)
        g = C.shape[0]
        if g == 0:
            continue
        Y = complete_flags(Qk, g).astype(np.int64)
        parts.append(matmul(F, Y, np.broadcast_to(C, (len(Y), g, d)).copy()))
    if not parts:
        return np.zeros((1, 0, 0), dtype=np.int64)
    grids = np.indices(tuple(len(p) for p in parts)).reshape(len(parts), -1)
    return np.concatenate([p[g] for p, g in zip(parts, grids)], axis=1)


def classify_partial_flag(kind, spec: FieldSpec, pieces, form=None, limit=REFINE_LIMIT):
    """The J-reduced w with the partial flag in X_J{w}, J read off the piece
    dimensions.  `pieces` is a chain of RREF bases, or a pair of chains for
    the product kind; `form` is the hermitian gram (unitary) or the pairing
    matrix M (fake_unitary)."""
    F = spec.gf
    fr = spec.frob()
    tabs = _tables(F)
    if kind == "fake_unitary":
        p1, p2 = pieces
        d = (form.shape[0] if form is not None else
             np.asarray(p1[0]).shape[1] if p1 else np.asarray(p2[0]).shape[1])
        X1 = refinements(p1, d, spec, limit)
        X2 = refinements(p2, d, spec, limit)
        if len(X1) * len(X2) > limit:
            raise SizeGuard("too many refinement pairs")
        M = np.eye(d, dtype=np.int64) if form is None else np.asarray(form, dtype=np.int64)
        MT2 = np.ascontiguousarray(fr[M].T)
        c1, c2 = _fake_codes(X1, X2, M, MT2, fr, *tabs, RELPOS_ADAPTED)
        elems = {CoxElement(kind, (_code_to_perm(a, d), _code_to_perm(b, d)))
                 for a, b in zip(c1.tolist(), c2.tolist())}
        J = SimpleSubset.from_gaps(kind, d, [np.asarray(p).shape[0] - 1 for p in p1],
                                   [np.asarray(p).shape[0] - 1 for p in p2])
    else:
        if form is not None:
            d = np.asarray(form).shape[0]
        else:
            d = np.asarray(pieces[0]).shape[1]
        if d == 0:
            return CoxElement.identity(kind, 0)
        X = refinements(pieces, d, spec, limit)
        if kind == "unitary":
            H = np.eye(d, dtype=np.int64) if form is None else np.asarray(form, dtype=np.int64)
            codes = _unitary_codes(X, H, fr, *tabs, RELPOS_ADAPTED)
        else:
            codes = _linear_codes(X, fr, *tabs, RELPOS_ADAPTED)
        elems = {CoxElement(kind, (_code_to_perm(c, d),)) for c in np.unique(codes).tolist()}
        J = SimpleSubset.from_gaps(kind, d, [np.asarray(p).shape[0] - 1 for p in pieces])
    red = [w for w in elems if i_reduced(w, J)]
    if len(red) != 1:
        raise ValueError(f"partial flag meets {len(red)} fine strata")
    return red[0]
