"""Bruhat-Tits indices, their strata, and the points of unitary RZ spaces.

Notation.  A parahoric tuple h = (h_1 < ... < h_m) of one parity in [0, n].
A Bruhat-Tits index is a nonempty I in {0..m} with vertex lattices
Lambda_0^i in L_0 (i in I, i != 0) and Lambda_1^j in L_1 (j in I, j != m).
Writing M^j = pi Lambda_1^j^vee (a lattice in L_0 of type n - t(Lambda_1^j)),
the index is the chain

    Lambda_0^{i_1} <= M^{i_1} <= Lambda_0^{i_2} <= M^{i_2} <= ...

with t(Lambda_0^i) >= h_i + 1 and t(M^j) <= h_{j+1} - 1.  A point over
k = F_{q^2d} is a chain A_m <= ... <= A_1 <= B_1 <= ... <= B_m.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .core_algebra import FieldSpec, embed, batch_rank, matmul
from .coxeter import (SimpleSubset, CoxElement, chain_bounds, chain_word,
                      enumerate_admissible, cycle_word, min_double_coset, build_xwy,
                      pattern_avoids)
from .dl_varieties import DLDescriptor, count_points, classify_partial_flag, dim_coarse
from .hermitian_residue import (Quotient, HermSpace, Subspace, orth, residue_space,
                                grassmannian, grassmannian_size, enumerate_coisotropic,
                                pairing_coeffs, lift_to_vertex, SizeGuard)
from .lattices import (AmbientSpace, WindowLattice, VertexLattice, contains,
                       lattice_sum, lattice_intersection, tau_closure, vertex_recognize,
                       _make)


class InvalidTuple(ValueError):
    pass


class InfeasibleIndex(ValueError):
    pass


class TupleMismatch(ValueError):
    pass


POINT_LIMIT = 250_000


# -- parahoric tuples -----------------------------------------------------------------

@dataclass(frozen=True)
class ParahoricTuple:
    n: int
    h: tuple

    def __post_init__(self):
        h = tuple(int(x) for x in self.h)
        object.__setattr__(self, "h", h)
        if self.n < 1:
            raise InvalidTuple("n must be positive")
        if not h:
            raise InvalidTuple("empty tuple")
        if any(b <= a for a, b in zip(h, h[1:])):
            raise InvalidTuple("h must be strictly increasing")
        if h[0] < 0 or h[-1] > self.n:
            raise InvalidTuple("entries must lie in [0, n]")
        if len({x % 2 for x in h}) > 1:
            raise InvalidTuple("entries must share one parity")

    @property
    def m(self):
        return len(self.h)

    def hh(self, i):
        """h_i, 1-based."""
        return self.h[i - 1]

    def dh(self, i):
        """Delta h_i = (h_{i+1} - h_i) / 2."""
        return (self.h[i] - self.h[i - 1]) // 2

    @property
    def t_min(self):
        return 0 if self.h[0] % 2 else 1

    @property
    def t_max(self):
        return self.n if (self.n - self.h[0]) % 2 else self.n - 1

    @property
    def eps(self):
        return int(self.h[0] != 0) + int(self.h[-1] != self.n)

    def allowed(self):
        """Elements that may appear in I."""
        out = list(range(self.m + 1))
        if self.h[0] == 0:
            out.remove(0)
        if self.h[-1] == self.n:
            out.remove(self.m)
        return out

    def t0_range(self, i):
        return range(self.hh(i) + 1, self.n + 1, 2)

    def t1_range(self, j):
        return range(self.n - self.hh(j + 1) + 1, self.n + 1, 2)

    def vstar(self):
        """Valuation of the gram determinant in the standard fixture."""
        return 0 if (self.n - self.h[0]) % 2 else 1

    def vol_B(self, i):
        return (self.vstar() + self.hh(i) - self.n + 1) // 2

    def vol_A(self, i):
        return self.vol_B(i) - self.hh(i)


def admissible_tuples(n):
    """Every parahoric tuple for this n."""
    out = []
    for par in (0, 1):
        vals = [x for x in range(n + 1) if x % 2 == par]
        for r in range(1, len(vals) + 1):
            for c in itertools.combinations(vals, r):
                out.append(ParahoricTuple(n, c))
    return out


# -- abstract indices ----------------------------------------------------------------------

@dataclass(frozen=True)
class AbstractBTIndex:
    tuple: ParahoricTuple
    I: tuple
    t0: tuple = ()      # ((i, type), ...) for i in I, i != 0
    t1: tuple = ()      # ((j, type), ...) for j in I, j != m

    def __post_init__(self):
        object.__setattr__(self, "I", tuple(sorted(self.I)))
        object.__setattr__(self, "t0", tuple(sorted((int(a), int(b)) for a, b in dict(self.t0).items())))
        object.__setattr__(self, "t1", tuple(sorted((int(a), int(b)) for a, b in dict(self.t1).items())))

    @classmethod
    def from_types(cls, tup, I, types):
        """Types listed in chain order: for each i in I, t0(i) then t1(i)."""
        I = sorted(I)
        it = iter(types)
        t0, t1 = {}, {}
        for i in I:
            if i != 0:
                t0[i] = next(it)
            if i != tup.m:
                t1[i] = next(it)
        return cls(tup, tuple(I), tuple(t0.items()), tuple(t1.items()))

    def type0(self, i):
        return dict(self.t0)[i]

    def type1(self, j):
        return dict(self.t1)[j]

    def type_vector(self):
        d0, d1 = dict(self.t0), dict(self.t1)
        out = []
        for i in self.I:
            if i in d0:
                out.append(d0[i])
            if i in d1:
                out.append(d1[i])
        return tuple(out)

    def chain_types(self):
        """Types along the L_0 chain: t0(i) for Lambda_0^i, n - t1(j) for M^j."""
        n = self.tuple.n
        out = []
        for i in self.I:
            if i != 0:
                out.append(("0", i, self.type0(i)))
            if i != self.tuple.m:
                out.append(("M", i, n - self.type1(i)))
        return out

    def __repr__(self):
        return f"AbstractBTIndex(n={self.tuple.n}, h={self.tuple.h}, I={self.I}, types={self.type_vector()})"


def abstract_violations(idx: AbstractBTIndex):
    tup = idx.tuple
    n, m = tup.n, tup.m
    bad = []
    I = idx.I
    if not I:
        return ["I is empty"]
    if any(i < 0 or i > m for i in I) or len(set(I)) != len(I):
        return ["I is not a subset of {0..m}"]
    if tup.h[0] == 0 and 0 in I:
        bad.append("h_1 = 0 forbids 0 in I")
    if tup.h[-1] == n and m in I:
        bad.append("h_m = n forbids m in I")
    d0, d1 = dict(idx.t0), dict(idx.t1)
    if set(d0) != {i for i in I if i != 0} or set(d1) != {j for j in I if j != m}:
        bad.append("type maps do not match I")
        return bad
    for i, t in d0.items():
        if t not in tup.t0_range(i):
            bad.append(f"t0({i}) = {t} is not an L_0 type >= h_{i} + 1 = {tup.hh(i) + 1}")
    for j, t in d1.items():
        if t not in tup.t1_range(j):
            bad.append(f"t1({j}) = {t} is not an L_1 type >= n - h_{j + 1} + 1 = {n - tup.hh(j + 1) + 1}")
    ch = idx.chain_types()
    for (k1, a, s), (k2, b, t) in zip(ch, ch[1:]):
        if s > t:
            bad.append(f"chain infeasible between {k1}{a} and {k2}{b}: {s} > {t}")
    return bad


def validate_abstract(idx: AbstractBTIndex) -> bool:
    return not abstract_violations(idx)


def enumerate_abstract(tup: ParahoricTuple):
    """All abstract indices satisfying the inequality system, in a fixed order."""
    out = []
    allowed = tup.allowed()
    for r in range(1, len(allowed) + 1):
        for I in itertools.combinations(allowed, r):
            ranges = []
            for i in I:
                if i != 0:
                    ranges.append(tup.t0_range(i))
                if i != tup.m:
                    ranges.append(tup.t1_range(i))
            for types in itertools.product(*ranges):
                idx = AbstractBTIndex.from_types(tup, I, types)
                if validate_abstract(idx):
                    out.append(idx)
    return out


def orbit_key(idx):
    a = idx.abstract if isinstance(idx, ConcreteBTIndex) else idx
    return a.I, a.type_vector()


# -- the lattice fixture ----------------------------------------------------------------

def ambient_for(tup: ParahoricTuple, q=3, d=1, N=3):
    p = next(x for x in range(2, q + 1) if q % x == 0)
    f = round(np.log(q) / np.log(p))
    if p ** f != q:
        raise InvalidTuple(f"q = {q} is not a prime power")
    return AmbientSpace(tup.n, FieldSpec(p, f, d), N, vstar=tup.vstar())


def extend_ambient(amb: AmbientSpace, d: int):
    s = amb.spec
    return AmbientSpace(amb.n, FieldSpec(s.p, s.f, d), amb.N, vstar=amb.vstar)


def lift_lattice(L: WindowLattice, amb: AmbientSpace) -> WindowLattice:
    """The same lattice with coefficients pushed into a larger residue field."""
    if L.ambient is amb:
        return L
    M = L.M
    if M.size:
        M = np.ascontiguousarray(embed(L.ambient.F, amb.F, M).astype(np.int64))
    else:
        M = M.copy()
    return WindowLattice(amb, L.lo, L.hi, M)


def flip(L: WindowLattice) -> WindowLattice:
    """L -> pi L^vee, an involution exchanging L_0 types t and n - t and
    mapping L_1 to L_0."""
    return L.dual().scale(1)


def _hvals(V: HermSpace, X):
    """h(x, x) for the rows of X."""
    F = V.F
    fr = V.spec.frob()
    GX = matmul(F, X[None], V.gram.T[None])[0] if len(X) else X
    out = np.zeros(len(X), dtype=np.int64)
    for j in range(V.dim):
        out = F.add(out, F.mul(GX[:, j], fr[X[:, j]]))
    return out


def maximal_isotropic(V: HermSpace) -> Subspace:
    """Greedy, lexicographically first rational maximal isotropic subspace."""
    F = V.F
    vals = V.spec.rational_elements()
    W = np.zeros((0, V.dim), dtype=np.int64)
    while True:
        P = orth(Subspace(V, W)).basis
        k = P.shape[0]
        found = None
        if k > W.shape[0]:
            coeffs = np.array(list(itertools.product(vals, repeat=k)), dtype=np.int64)
            X = matmul(F, coeffs[None], P[None])[0]
            iso = np.flatnonzero(_hvals(V, X) == 0)
            for r in iso:
                v = X[r]
                if not v.any():
                    continue
                st = np.concatenate([W, v[None]])
                if batch_rank(F, st[None])[0] > W.shape[0]:
                    found = v
                    break
        if found is None:
            return V.span(W) if len(W) else V.zero()
        W = np.concatenate([W, found[None]])


def pick_sub(X, Y: WindowLattice, t: int) -> WindowLattice:
    """A lattice L in L_0 of type t with X <= L <= Y (X in L_0 or None),
    through a coisotropic subspace of the residue space of Y."""
    lamY = vertex_recognize(Y, 0)
    if lamY is None:
        raise InfeasibleIndex("upper bound is not in L_0")
    V = residue_space(lamY, 0)
    quo = V.provenance["quotient"]
    k = (lamY.type_t + t) // 2
    if (lamY.type_t - t) % 2 or t > lamY.type_t:
        raise InfeasibleIndex(f"no type {t} sublattice of a type {lamY.type_t} lattice")
    if X is not None:
        U = quo.lattice_coords(X)
    else:
        U = orth(maximal_isotropic(V)).basis
    if U.shape[0] > k:
        raise InfeasibleIndex("lower bound too large for the requested type")
    F = V.F
    rows = list(U)
    for e in np.eye(V.dim, dtype=np.int64):
        if len(rows) == k:
            break
        st = np.array(rows + [e], dtype=np.int64)
        if batch_rank(F, st[None])[0] > len(rows):
            rows.append(e)
    L = quo.lift(np.array(rows, dtype=np.int64).reshape(len(rows), V.dim))
    lam = vertex_recognize(L, 0)
    if lam is None or lam.type_t != t:
        raise InfeasibleIndex("coisotropic pick failed")
    return L


def pick_between(X, Y, t, amb):
    """L in L_0 of type t with X <= L <= Y; either bound may be None."""
    if Y is not None:
        return pick_sub(X, Y, t)
    if X is None:
        return pick_sub(None, amb.std(), t)
    return flip(pick_sub(None, flip(X), amb.n - t))


# -- concrete indices -----------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class ConcreteBTIndex:
    abstract: AbstractBTIndex
    lam0: tuple     # ((i, WindowLattice), ...)
    lam1: tuple     # ((j, WindowLattice), ...)

    @classmethod
    def build(cls, tup, lam0: dict, lam1: dict):
        """Index from slot lattices; types are read off the lattices."""
        t0, t1 = {}, {}
        for i, L in lam0.items():
            lam = vertex_recognize(L, 0)
            if lam is None:
                raise InfeasibleIndex(f"Lambda_0^{i} is not a vertex lattice in L_0")
            t0[i] = lam.type_t
        for j, L in lam1.items():
            lam = vertex_recognize(L, 1)
            if lam is None:
                raise InfeasibleIndex(f"Lambda_1^{j} is not a vertex lattice in L_1")
            t1[j] = lam.type_t
        I = sorted(set(lam0) | set(lam1))
        a = AbstractBTIndex(tup, tuple(I), tuple(t0.items()), tuple(t1.items()))
        return cls(a, tuple(sorted(lam0.items())), tuple(sorted(lam1.items())))

    @classmethod
    def from_chain(cls, tup, chain):
        """From a chain [(kind, i, L_0-lattice)] with kind '0' or 'M'."""
        lam0 = {i: L for k, i, L in chain if k == "0"}
        lam1 = {i: flip(L) for k, i, L in chain if k == "M"}
        return cls.build(tup, lam0, lam1)

    @property
    def tuple(self):
        return self.abstract.tuple

    @property
    def I(self):
        return self.abstract.I

    @property
    def ambient(self):
        return (self.lam0 or self.lam1)[0][1].ambient

    def L0(self, i):
        return dict(self.lam0)[i]

    def L1(self, j):
        return dict(self.lam1)[j]

    def M(self, j):
        return flip(self.L1(j))

    def chain(self):
        out = []
        m = self.tuple.m
        for i in self.I:
            if i != 0:
                out.append(("0", i, self.L0(i)))
            if i != m:
                out.append(("M", i, self.M(i)))
        return out

    @cached_property
    def key(self):
        return (self.tuple, self.I,
                tuple((i, L.key) for i, L in self.lam0), tuple((j, L.key) for j, L in self.lam1))

    def __eq__(self, other):
        return isinstance(other, ConcreteBTIndex) and self.key == other.key

    def __hash__(self):
        return hash(self.key)

    def __repr__(self):
        return f"ConcreteBTIndex(I={self.I}, types={self.abstract.type_vector()})"

    def lift(self, d: int) -> ConcreteBTIndex:
        """The index with its lattices viewed over F_{q^2d}."""
        amb = self.ambient
        if amb.spec.d == d:
            return self
        big = extend_ambient(amb, d)
        return ConcreteBTIndex(self.abstract,
                               tuple((i, lift_lattice(L, big)) for i, L in self.lam0),
                               tuple((j, lift_lattice(L, big)) for j, L in self.lam1))


def concrete_violations(idx: ConcreteBTIndex):
    bad = list(abstract_violations(idx.abstract))
    for i, L in idx.lam0:
        lam = vertex_recognize(L, 0)
        if lam is None:
            bad.append(f"Lambda_0^{i} is not a rational vertex lattice in L_0")
        elif lam.type_t != idx.abstract.type0(i):
            bad.append(f"Lambda_0^{i} has type {lam.type_t}")
    for j, L in idx.lam1:
        lam = vertex_recognize(L, 1)
        if lam is None:
            bad.append(f"Lambda_1^{j} is not a rational vertex lattice in L_1")
        elif lam.type_t != idx.abstract.type1(j):
            bad.append(f"Lambda_1^{j} has type {lam.type_t}")
    ch = idx.chain()
    for (k1, a, X), (k2, b, Y) in zip(ch, ch[1:]):
        if not contains(Y, X):
            bad.append(f"chain inclusion fails between {k1}{a} and {k2}{b}")
    return bad


def validate_concrete(idx: ConcreteBTIndex) -> bool:
    return not concrete_violations(idx)


def leq_index(idx1: ConcreteBTIndex, idx: ConcreteBTIndex) -> bool:
    """idx1 <= idx: I <= I1 and the slots of idx1 lie in those of idx."""
    if idx1.tuple != idx.tuple:
        raise TupleMismatch("indices for different parahoric tuples")
    if not set(idx.I) <= set(idx1.I):
        return False
    for i, L in idx.lam0:
        if not contains(L, idx1.L0(i)):
            return False
    for j, L in idx.lam1:
        if not contains(L, idx1.L1(j)):
            return False
    return True


@dataclass(frozen=True)
class Undefined:
    reason: str

    def __bool__(self):
        return False


def intersect_index(idx: ConcreteBTIndex, idx2: ConcreteBTIndex):
    if idx.tuple != idx2.tuple:
        raise TupleMismatch("indices for different parahoric tuples")
    tup = idx.tuple
    n, m = tup.n, tup.m
    a0, a1 = dict(idx.lam0), dict(idx.lam1)
    b0, b1 = dict(idx2.lam0), dict(idx2.lam1)
    lam0, lam1 = {}, {}
    for i in sorted(set(a0) | set(b0)):
        if i in a0 and i in b0:
            L = lattice_intersection(a0[i], b0[i])
            lam = vertex_recognize(L, 0)
            if lam is None or lam.type_t < tup.hh(i) + 1:
                return Undefined(f"Lambda_0^{i} slots intersect outside L_0 of type >= {tup.hh(i) + 1}")
            lam0[i] = L
        else:
            lam0[i] = a0.get(i, b0.get(i))
    for j in sorted(set(a1) | set(b1)):
        if j in a1 and j in b1:
            L = lattice_intersection(a1[j], b1[j])
            lam = vertex_recognize(L, 1)
            if lam is None or lam.type_t < n - tup.hh(j + 1) + 1:
                return Undefined(f"Lambda_1^{j} slots intersect outside L_1 of type >= {n - tup.hh(j + 1) + 1}")
            lam1[j] = L
        else:
            lam1[j] = a1.get(j, b1.get(j))
    for x0, x1, y0, y1, tag in ((a0, a1, b0, b1, "first"), (b0, b1, a0, a1, "second")):
        for i1, L1 in x1.items():
            for i2, L0 in y0.items():
                if i1 < i2 and not contains(L0, flip(L1)):
                    return Undefined(f"pi Lambda_1^{i1}^vee of the {tag} index is not in Lambda_0^{i2} of the other")
    return ConcreteBTIndex.build(tup, lam0, lam1)


def _fill_chain(tup, positions, known, amb, type_of):
    """Fill missing chain positions left to right between known neighbours."""
    out = []
    prev = None
    for pos_i, pos in enumerate(positions):
        if pos in known:
            L = known[pos]
        else:
            upper = next((known[p] for p in positions[pos_i + 1:] if p in known), None)
            t = type_of(pos, prev)
            L = pick_between(prev, upper, t, amb)
        out.append((pos[0], pos[1], L))
        prev = L
    return out


def _positions(tup, I):
    out = []
    for i in sorted(I):
        if i != 0:
            out.append(("0", i))
        if i != tup.m:
            out.append(("M", i))
    return out


def _ltype(L):
    return vertex_recognize(L, 0).type_t


def complete_index(idx: ConcreteBTIndex) -> ConcreteBTIndex:
    """An index below idx whose I is the largest set allowed by h."""
    tup = idx.tuple
    full = tup.allowed()
    known = {(k, i): L for k, i, L in idx.chain()}
    amb = idx.ambient

    def type_of(pos, prev):
        kind, i = pos
        if kind == "0":
            return max(_ltype(prev) if prev is not None else 0, tup.hh(i) + 1)
        return _ltype(prev) if prev is not None else tup.t_min

    ch = _fill_chain(tup, _positions(tup, full), known, amb, type_of)
    out = ConcreteBTIndex.from_chain(tup, ch)
    bad = concrete_violations(out)
    if bad:
        raise InfeasibleIndex("completion failed: " + "; ".join(bad))
    return out


def minimize_types(idx: ConcreteBTIndex) -> ConcreteBTIndex:
    """An index below idx with t0(i) = h_i + 1 and t1(j) = n - h_{j+1} + 1."""
    tup = idx.tuple
    amb = idx.ambient
    ch = idx.chain()
    new = {}
    # consecutive (M^{i_t}, Lambda_0^{i_{t+1}}) pairs, plus the two loose ends
    k = 0
    while k < len(ch):
        kind, i, L = ch[k]
        if kind == "0" and k == 0:
            new[k] = pick_between(None, L, tup.hh(i) + 1, amb)
            k += 1
        elif kind == "M" and k + 1 < len(ch):
            _, i2, L2 = ch[k + 1]
            top = pick_between(L, L2, tup.hh(i2) + 1, amb)
            new[k + 1] = top
            new[k] = pick_between(L, top, tup.hh(i + 1) - 1, amb)
            k += 2
        elif kind == "M":
            new[k] = pick_between(L, None, tup.hh(i + 1) - 1, amb)
            k += 1
        else:
            k += 1
    ch2 = [(kind, i, new.get(k, L)) for k, (kind, i, L) in enumerate(ch)]
    out = ConcreteBTIndex.from_chain(tup, ch2)
    bad = concrete_violations(out)
    if bad or not leq_index(out, idx):
        raise InfeasibleIndex("minimization failed: " + "; ".join(bad))
    return out


def realize(a: AbstractBTIndex, amb: AmbientSpace) -> ConcreteBTIndex:
    """A concrete witness for an abstract index, built top-down inside Lambda_std."""
    ch = a.chain_types()
    lats = [None] * len(ch)
    upper = amb.std()
    for k in range(len(ch) - 1, -1, -1):
        upper = pick_sub(None, upper, ch[k][2])
        lats[k] = upper
    out = ConcreteBTIndex.from_chain(a.tuple, [(c[0], c[1], L) for c, L in zip(ch, lats)])
    if orbit_key(out) != orbit_key(a) or not validate_concrete(out):
        raise InfeasibleIndex(f"no witness for {a}")
    return out


def certify_abstract(tup: ParahoricTuple, q=3, N=3):
    """Build a witness for every abstract index; returns the failures."""
    amb = ambient_for(tup, q, 1, N)
    bad = []
    for a in enumerate_abstract(tup):
        try:
            realize(a, amb)
        except InfeasibleIndex as e:
            bad.append((a, str(e)))
    return bad


# -- irreducible components ---------------------------------------------------------

def is_maximal(a: AbstractBTIndex) -> bool:
    """No index strictly above: |I| = 1 and no slot type can grow."""
    if len(a.I) != 1:
        return False
    for i, t in a.t0:
        b = AbstractBTIndex(a.tuple, a.I, ((i, t + 2),), a.t1)
        if validate_abstract(b):
            return False
    for j, t in a.t1:
        b = AbstractBTIndex(a.tuple, a.I, a.t0, ((j, t + 2),))
        if validate_abstract(b):
            return False
    return True


def maximal_orbits(tup: ParahoricTuple):
    return [a for a in enumerate_abstract(tup) if is_maximal(a)]


def orbit_count_formula(tup: ParahoricTuple) -> int:
    return tup.h[-1] - tup.h[0] - tup.m + 1 + tup.eps


def orbit_count_enumerated(tup: ParahoricTuple) -> int:
    return len(maximal_orbits(tup))


@dataclass(frozen=True)
class ComponentFamily:
    family: str         # 'head', 'tail' or 'middle'
    I: tuple
    dim: int
    orbit_count: int    # as stated by the counting theorem
    enumerated: tuple   # orbit keys of the maximal indices found by enumeration


def irreducible_components(tup: ParahoricTuple):
    n, m = tup.n, tup.m
    found = maximal_orbits(tup)
    out = []
    if tup.h[0] != 0:
        keys = tuple(orbit_key(a) for a in found if a.I == (0,))
        out.append(ComponentFamily("head", (0,), n - (tup.h[0] + tup.t_min + 1) // 2, 1, keys))
    for i in range(1, m):
        keys = tuple(orbit_key(a) for a in found if a.I == (i,))
        out.append(ComponentFamily("middle", (i,), n - 1 - tup.dh(i),
                                   tup.hh(i + 1) - tup.hh(i) - 1, keys))
    if tup.h[-1] != n:
        keys = tuple(orbit_key(a) for a in found if a.I == (m,))
        out.append(ComponentFamily("tail", (m,), (tup.t_max + tup.h[-1] - 1) // 2, 1, keys))
    return out


# -- stratum descriptors -------------------------------------------------------------

@dataclass(frozen=True)
class Block:
    role: str           # 'head', 'middle' or 'tail'
    kind: str
    d: int
    gaps: tuple         # one tuple of gaps per side
    top: CoxElement
    slots: tuple        # (i_j, i_{j+1}) positions the block sits between
    params: tuple       # (l,) or (l0, l1)

    @property
    def J(self):
        return SimpleSubset.from_gaps(self.kind, self.d, *self.gaps) if self.kind == "fake_unitary" \
            else SimpleSubset.from_gaps(self.kind, self.d, self.gaps[0])

    @property
    def dim(self):
        return self.top.length()

    def descriptor(self):
        return DLDescriptor(self.kind, self.J, self.top)

    def bounds(self):
        return tuple(chain_bounds(g, self.d - 1) for g in self.gaps)

    def word(self, ts):
        return CoxElement(self.kind, tuple(chain_word(g, t, self.d) for g, t in zip(self.gaps, ts)))

    def fine(self):
        """[(ts, DLDescriptor)] over the admissible word tuples."""
        per_side = [enumerate_admissible(g, b) for g, b in zip(self.gaps, self.bounds())]
        out = []
        for ts in itertools.product(*per_side):
            out.append((ts, DLDescriptor(self.kind, self.J, self.word(ts))))
        return out


@dataclass(frozen=True)
class StratumDescriptor:
    index: AbstractBTIndex
    blocks: tuple

    @property
    def dim(self):
        return sum(b.dim for b in self.blocks)

    def components(self):
        return [b.descriptor() for b in self.blocks]


def smoothness_check(b: Block):
    """(w', x w' y, avoids 3412/4231, dim X_J(w') == l(top)) for a block.
    w' is the shortest element of W_J top W_F(J)."""
    J = b.J
    w1 = min_double_coset(b.top, J, J.frob())
    xwy = build_xwy(J, w1)
    avoids = all(pattern_avoids(p) for p in xwy.perms)
    return w1, xwy, avoids, dim_coarse(J, w1) == b.top.length()


def _pieces_dims(dims, d):
    return tuple(sorted({x for x in dims if 0 < x < d}))


def _head_block(a: AbstractBTIndex):
    tup = a.tuple
    i1 = a.I[0]
    t0 = a.type0(i1)
    h = tup.hh(i1)
    l = (t0 - h + 1) // 2
    dims = [l + (h - tup.hh(i)) // 2 for i in range(1, i1 + 1)] + \
           [l + (h + tup.hh(i)) // 2 for i in range(1, i1 + 1)]
    gaps = tuple(x - 1 for x in _pieces_dims(dims, t0))
    top = CoxElement("unitary", (cycle_word(l, l + h - 1, t0),))
    return Block("head", "unitary", t0, (gaps,), top, (0, i1), (l,))


def _tail_block(a: AbstractBTIndex):
    tup = a.tuple
    n, m = tup.n, tup.m
    s = a.I[-1]
    t1 = a.type1(s)
    g = n - tup.hh(s + 1)
    l = (t1 - g + 1) // 2
    W = [l + (tup.hh(s + j) - tup.hh(s + 1)) // 2 for j in range(1, m - s + 1)]
    U = [w + n - tup.hh(s + j) for j, w in zip(range(1, m - s + 1), W)]
    gaps = tuple(x - 1 for x in _pieces_dims(W + U, t1))
    top = CoxElement("unitary", (cycle_word(l, l + g - 1, t1),))
    return Block("tail", "unitary", t1, (gaps,), top, (s, m), (l,))


def _middle_block(a: AbstractBTIndex, lo, hi):
    tup = a.tuple
    n = tup.n
    t1 = a.type1(lo)
    t0 = a.type0(hi)
    d = (t0 + t1 - n) // 2
    l1 = (t1 - n + tup.hh(lo + 1) + 1) // 2
    l0 = (t0 - tup.hh(hi) + 1) // 2
    k = hi - lo
    W = [l1 + (tup.hh(lo + i) - tup.hh(lo + 1)) // 2 for i in range(1, k + 1)]
    U = [l0 + (tup.hh(hi) - tup.hh(lo + i)) // 2 for i in range(1, k + 1)]
    g0 = tuple(x - 1 for x in _pieces_dims(W, d))
    g1 = tuple(x - 1 for x in _pieces_dims(U, d))
    top = CoxElement("fake_unitary", (cycle_word(l1, d - l1, d), cycle_word(l0, d - l0, d)))
    return Block("middle", "fake_unitary", d, (g0, g1), top, (lo, hi), (l0, l1))


def stratum_descriptor(a) -> StratumDescriptor:
    if isinstance(a, ConcreteBTIndex):
        a = a.abstract
    bad = abstract_violations(a)
    if bad:
        raise InfeasibleIndex("; ".join(bad))
    I = a.I
    blocks = []
    if I[0] != 0:
        blocks.append(_head_block(a))
    for lo, hi in zip(I, I[1:]):
        blocks.append(_middle_block(a, lo, hi))
    if I[-1] != a.tuple.m:
        blocks.append(_tail_block(a))
    return StratumDescriptor(a, tuple(blocks))


def dimension_formula_m2(a: AbstractBTIndex) -> int:
    """Closed-form stratum dimension for m = 2, one expression per I."""
    tup = a.tuple
    if tup.m != 2:
        raise ValueError("closed forms are tabulated for m = 2 only")
    n, (h1, h2) = tup.n, tup.h
    d0, d1 = dict(a.t0), dict(a.t1)
    dh = (h2 - h1) // 2
    table = {
        (0,): lambda: (d1[0] + n - h1 - 1) // 2,
        (1,): lambda: (d0[1] + d1[1] + n) // 2 - dh - 1,
        (2,): lambda: (d0[2] + h2 - 1) // 2,
        (0, 1): lambda: (d1[0] + d0[1] + d1[1] - h2 - 1) // 2 - 1,
        (1, 2): lambda: (d0[1] + d1[1] + d0[2] + h1 - n - 1) // 2 - 1,
        (0, 2): lambda: (d1[0] + d0[2] + h2 - h1 - n) // 2 - 1,
        (0, 1, 2): lambda: (d1[0] + d0[1] + d1[1] + d0[2]) // 2 - n - 2,
    }
    return table[a.I]()


def _block_is_open(b: Block, ts, tup: ParahoricTuple) -> bool:
    n, m = tup.n, tup.m
    if b.role in ("head", "tail"):
        (t,) = ts
        (l,) = b.params
        r = len(t)
        r0 = r - 1 if l > 1 else r
        if l > 1 and t[-1] != b.bounds()[0][-1]:
            return False
        if b.role == "head":
            i1 = b.slots[1]
            for i in range(1, i1):
                if t[i - 1] + t[r0 - i] < tup.dh(i1 - i):
                    return False
            if tup.h[0] != 0 and 2 * t[i1 - 1] < tup.h[0]:
                return False
        else:
            s = b.slots[0]
            for i in range(1, m - s):
                if t[i - 1] + t[r0 - i] < tup.dh(s + i):
                    return False
            if tup.h[-1] != n and 2 * t[m - s - 1] < n - tup.h[-1]:
                return False
        return True
    t, t2 = ts
    l0, l1 = b.params
    lo, hi = b.slots
    bd0, bd1 = b.bounds()
    if l0 > 1 and t[-1] != bd0[-1]:
        return False
    if l1 > 1 and t2[-1] != bd1[-1]:
        return False
    r0b = len(t2) - 1 if l1 > 1 else len(t2)
    for i in range(1, hi - lo):
        if t[i - 1] + t2[r0b - i] < tup.dh(lo + i):
            return False
    return True


def fine_decomposition(a):
    """Tuples (one fine descriptor per block) covering the closed stratum."""
    desc = stratum_descriptor(a)
    per_block = [[dl for _, dl in b.fine()] for b in desc.blocks]
    return [tuple(c) for c in itertools.product(*per_block)]


def open_selection(a):
    desc = stratum_descriptor(a)
    tup = desc.index.tuple
    per_block = [[dl for ts, dl in b.fine() if _block_is_open(b, ts, tup)] for b in desc.blocks]
    return [tuple(c) for c in itertools.product(*per_block)]


def closed_count_flags(a, q=3, d=1) -> int:
    """Flag-side count of the closed stratum over F_{q^2d}."""
    out = 1
    for b in stratum_descriptor(a).blocks:
        out *= count_points(b.descriptor(), ext_e=d, q=q, closed=True)
    return out


def open_count_flags(a, q=3, d=1) -> int:
    desc = stratum_descriptor(a)
    tup = desc.index.tuple
    out = 1
    for b in desc.blocks:
        out *= sum(count_points(dl, ext_e=d, q=q) for ts, dl in b.fine() if _block_is_open(b, ts, tup))
    return out


# -- points ------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class RZPoint:
    tuple: ParahoricTuple
    A: tuple    # A_1, ..., A_m
    B: tuple    # B_1, ..., B_m

    @cached_property
    def key(self):
        return tuple(L.key for L in self.A) + tuple(L.key for L in self.B)

    def __eq__(self, other):
        return isinstance(other, RZPoint) and self.key == other.key

    def __hash__(self):
        return hash(self.key)

    def chain(self):
        return list(reversed(self.A)) + list(self.B)


def point_violations(pt: RZPoint):
    tup = pt.tuple
    bad = []
    for i in range(1, tup.m + 1):
        A, B = pt.A[i - 1], pt.B[i - 1]
        pAd, pBd = flip(A), flip(B)
        if not (contains(B, pAd) and B.vol - pAd.vol == 1 and contains(A.dual(), B)):
            bad.append(f"pi A_{i}^vee <1 B_{i} <= A_{i}^vee fails")
        if not (contains(A, pBd) and A.vol - pBd.vol == 1 and contains(B.dual(), A)):
            bad.append(f"pi B_{i}^vee <1 A_{i} <= B_{i}^vee fails")
        if not (contains(A, B.scale(1)) and contains(B, A) and B.vol - A.vol == tup.hh(i)):
            bad.append(f"pi B_{i} <= A_{i} <h_{i} B_{i} fails")
        if i < tup.m:
            if not contains(pt.A[i - 1], pt.A[i]) or pt.A[i - 1].vol - pt.A[i].vol != tup.dh(i):
                bad.append(f"A_{i + 1} <dh A_{i} fails")
            if not contains(pt.B[i], B) or pt.B[i].vol - B.vol != tup.dh(i):
                bad.append(f"B_{i} <dh B_{i + 1} fails")
    return bad


def in_closed(pt: RZPoint, idx: ConcreteBTIndex) -> bool:
    """Membership in the closed stratum: B_i <= Lambda_0^i and A_{j+1} <= Lambda_1^j."""
    for i, L in idx.lam0:
        if not contains(L, pt.B[i - 1]):
            return False
    for j, L in idx.lam1:
        if not contains(L, pt.A[j]):
            return False
    return True


def _interval(idx: ConcreteBTIndex, i: int):
    """Lattices S <= B_i <= T forced by the index."""
    I = idx.I
    if I[0] != 0 and i <= I[0]:
        L = idx.L0(I[0])
        return flip(L), L
    s = I[-1]
    if i > s:
        L1 = idx.L1(s)
        return flip(L1), L1.scale(-1)
    lo = max(x for x in I if x < i)
    hi = min(x for x in I if x >= i)
    return idx.M(lo), idx.L0(hi)


def _subspace_lifts(lower: WindowLattice, T: WindowLattice, k: int, budget):
    quo = Quotient(lower, T)
    if k < 0 or k > quo.dim:
        return
    Qk = lower.ambient.spec.Q
    if grassmannian_size(Qk, quo.dim, k) > budget[0]:
        raise SizeGuard(f"Grassmannian Gr({k}, {quo.dim}) over a field of size {Qk} exceeds the budget")
    budget[0] -= grassmannian_size(Qk, quo.dim, k)
    vals = np.arange(Qk, dtype=np.int64)
    for batch in grassmannian(vals, quo.dim, k):
        for U in batch:
            yield quo.lift(U)


def enumerate_points(idx: ConcreteBTIndex, d: int = 1, limit: int = POINT_LIMIT):
    """All points of the closed stratum over F_{q^2d}, in a deterministic order."""
    tup = idx.tuple
    m = tup.m
    big = idx.lift(d)
    slots1 = dict(big.lam1)
    budget = [limit]
    out = []

    def rec(i, Bs, As):
        if i > m:
            out.append(RZPoint(tup, tuple(As), tuple(Bs)))
            return
        S, T = _interval(big, i)
        lower = S if not Bs else lattice_sum(S, Bs[-1])
        if not contains(T, lower):
            return
        k = tup.vol_B(i) - lower.vol
        for B in _subspace_lifts(lower, T, k, budget):
            pBd = flip(B)
            base = lattice_sum(pBd, B.scale(1))
            step = base.vol - pBd.vol
            if step > 1:
                continue
            upper = lattice_intersection(B, B.dual())
            if As:
                upper = lattice_intersection(upper, As[-1])
            if i - 1 in slots1:
                upper = lattice_intersection(upper, slots1[i - 1])
            if not contains(upper, base):
                continue
            if step == 1:
                cands = [base]
            else:
                cands = _subspace_lifts(base, upper, 1, budget)
            for A in cands:
                rec(i + 1, Bs + [B], As + [A])

    rec(1, [], [])
    return out


def bt_type_of_point(pt: RZPoint):
    """(I, [Lambda_{A_i}], [Lambda_{B_i}])."""
    tup = pt.tuple
    m = tup.m
    LA = [tau_closure(A)[1] for A in pt.A]
    LB = [tau_closure(B)[1] for B in pt.B]
    I = []
    if vertex_recognize(LA[0], 1) is not None:
        I.append(0)
    for i in range(1, m):
        if contains(flip(LA[i]), LB[i - 1]):
            I.append(i)
    if vertex_recognize(LB[m - 1], 0) is not None:
        I.append(m)
    return tuple(I), LA, LB


def type_index(pt: RZPoint) -> ConcreteBTIndex:
    """The index assembled from the Bruhat-Tits type of a point."""
    I, LA, LB = bt_type_of_point(pt)
    if not I:
        raise InfeasibleIndex("empty Bruhat-Tits type")
    m = pt.tuple.m
    lam0 = {i: LB[i - 1] for i in I if i != 0}
    lam1 = {j: LA[j] for j in I if j != m}
    return ConcreteBTIndex.build(pt.tuple, lam0, lam1)


def condition_star(pt: RZPoint):
    """Pairs (i, j), i < j, with Lambda_{B_i} <= pi Lambda_{A_j}^vee but one
    of the two not a vertex lattice of the expected kind."""
    _, LA, LB = bt_type_of_point(pt)
    m = pt.tuple.m
    bad = []
    for i in range(1, m + 1):
        for j in range(i + 1, m + 1):
            if contains(flip(LA[j - 1]), LB[i - 1]):
                if vertex_recognize(LB[i - 1], 0) is None or vertex_recognize(LA[j - 1], 1) is None:
                    bad.append((i, j))
    return bad


# -- the bijection with flags --------------------------------------------------------

@dataclass(frozen=True, eq=False)
class BlockFlag:
    block: Block
    pieces: tuple       # per side, RREF bases ordered by dimension
    form: np.ndarray    # hermitian gram or pairing matrix
    spec: FieldSpec

    @cached_property
    def key(self):
        return (self.block.slots, self.block.role,
                tuple(tuple((p.shape[0], p.tobytes()) for p in side) for side in self.pieces))

    def classify(self):
        if self.block.kind == "fake_unitary":
            return classify_partial_flag(self.block.kind, self.spec, self.pieces, self.form)
        if self.block.d <= 1:
            return CoxElement.identity("unitary", self.block.d)
        return classify_partial_flag("unitary", self.spec, list(self.pieces[0]), self.form)


def _chain_pieces(quo: Quotient, lattices, d):
    seen = {}
    for L in lattices:
        C = quo.lattice_coords(L)
        if 0 < C.shape[0] < d:
            seen[C.shape[0]] = C
    return tuple(seen[k] for k in sorted(seen))


def point_map(pt: RZPoint, idx: ConcreteBTIndex):
    """Per-block flags of a point of the closed stratum."""
    if not in_closed(pt, idx):
        raise ValueError("point is not in the closed stratum of the index")
    amb = pt.A[0].ambient
    d = amb.spec.d
    big = idx.lift(d)
    desc = stratum_descriptor(idx.abstract)
    out = []
    for b in desc.blocks:
        lo, hi = b.slots
        if b.role == "head":
            L = big.L0(hi)
            V = residue_space(VertexLattice(L, 0, b.d), 0)
            quo = V.provenance["quotient"]
            lats = [pt.A[i - 1] for i in range(1, hi + 1)] + [pt.B[i - 1] for i in range(1, hi + 1)]
            out.append(BlockFlag(b, (_chain_pieces(quo, lats, b.d),), V.gram, amb.spec))
        elif b.role == "tail":
            L = big.L1(lo)
            V = residue_space(VertexLattice(L, 1, b.d), 0)
            quo = V.provenance["quotient"]
            lats = [pt.B[i - 1].scale(1) for i in range(lo + 1, hi + 1)] + \
                   [pt.A[i - 1] for i in range(lo + 1, hi + 1)]
            out.append(BlockFlag(b, (_chain_pieces(quo, lats, b.d),), V.gram, amb.spec))
        else:
            L1, L0 = big.L1(lo), big.L0(hi)
            q1 = Quotient(flip(L1).scale(1), L0.scale(1))
            q2 = Quotient(flip(L0), L1)
            side0 = _chain_pieces(q1, [pt.B[i - 1].scale(1) for i in range(lo + 1, hi + 1)], b.d)
            side1 = _chain_pieces(q2, [pt.A[i - 1] for i in range(lo + 1, hi + 1)], b.d)
            low, C = pairing_coeffs(amb, q1.as_vecs(q1.basis), q2.as_vecs(q2.basis), q1.lo, q2.lo)
            k = 1 - low
            if C[:, :, :max(k, 0)].any():
                raise ValueError("pairing is not divisible by pi")
            M = C[:, :, k] if 0 <= k < C.shape[2] else np.zeros((b.d, b.d), dtype=np.int64)
            out.append(BlockFlag(b, (side0, side1), M, amb.spec))
    for bf in out:
        want = bf.block.gaps
        got = tuple(tuple(p.shape[0] - 1 for p in side) for side in bf.pieces)
        if got != want:
            raise AssertionError(f"flag type {got} does not match the block gaps {want}")
    return out


# -- the window census ----------------------------------------------------------------

def window_L0(amb: AmbientSpace):
    """Every lattice in L_0 contained in Lambda_std, sorted by (type, key)."""
    lam = vertex_recognize(amb.std(), 0)
    V = residue_space(lam, 0)
    out = []
    for k in range(V.dim + 1):
        for U in enumerate_coisotropic(V, k):
            out.append(lift_to_vertex(lam, U, "sub", 2 * k - V.dim).lattice)
    out.sort(key=lambda L: (L.vol, L.key))
    return out


def window_indices(tup: ParahoricTuple, amb: AmbientSpace, L0s=None, keys=None):
    """Concrete indices whose chain lies in the window census; optionally only
    those with orbit key in `keys`."""
    if L0s is None:
        L0s = window_L0(amb)
    types = [_ltype(L) for L in L0s]
    nL = len(L0s)
    below = {}

    def leq(a, b):
        k = (a, b)
        if k not in below:
            below[k] = contains(L0s[b], L0s[a])
        return below[k]

    out = []
    allowed = tup.allowed()
    for r in range(1, len(allowed) + 1):
        for I in itertools.combinations(allowed, r):
            pos = _positions(tup, I)
            lo_t = [tup.hh(i) + 1 if k == "0" else -1 for k, i in pos]
            hi_t = [tup.n if k == "0" else tup.hh(i + 1) - 1 for k, i in pos]

            def rec(p, chosen):
                if p == len(pos):
                    ch = [(k, i, L0s[c]) for (k, i), c in zip(pos, chosen)]
                    out.append(ConcreteBTIndex.from_chain(tup, ch))
                    return
                for c in range(nL):
                    if not lo_t[p] <= types[c] <= hi_t[p]:
                        continue
                    if chosen and not leq(chosen[-1], c):
                        continue
                    rec(p + 1, chosen + [c])

            if keys is None:
                rec(0, [])
            else:
                before = len(out)
                rec(0, [])
                out[before:] = [x for x in out[before:] if orbit_key(x) in keys]
    return out


# -- laws checked on the window census ---------------------------------------------------

def poset_law_violations(idxs, d: int = 1, limit: int = POINT_LIMIT):
    """Counterexamples to: idx1 <= idx iff points(idx1) <= points(idx), and
    points(idx) & points(idx2) = points(idx ∩ idx2) (empty when undefined)."""
    pts = {x: frozenset(enumerate_points(x, d, limit)) for x in idxs}
    bad = []
    for x in idxs:
        for y in idxs:
            if leq_index(x, y) != (pts[x] <= pts[y]):
                bad.append(("inclusion", x, y))
            z = intersect_index(x, y)
            common = pts[x] & pts[y]
            if isinstance(z, Undefined):
                if common:
                    bad.append(("intersection-undefined", x, y))
            else:
                got = pts.get(z)
                if got is None:
                    got = frozenset(enumerate_points(z, d, limit))
                if got != common:
                    bad.append(("intersection", x, y))
    return bad


def type_classification(tup: ParahoricTuple, d: int = 1, q: int = 3, limit: int = POINT_LIMIT):
    """Run every point of every window index through the type map.

    For each point p the index T built from its type must be nonempty, contain
    p, and lie below every window index whose closed stratum contains p; then T
    is the unique index with p in its open stratum.  Returns (stats, failures)."""
    amb = ambient_for(tup, q)
    idxs = window_indices(tup, amb)
    window = set(idxs)
    types = {}
    holders = {}
    fails = []
    npairs = 0
    for idx in idxs:
        for p in enumerate_points(idx, d, limit):
            npairs += 1
            holders.setdefault(p, []).append(idx)
    for p, hs in holders.items():
        try:
            T = type_index(p)
        except InfeasibleIndex as e:
            fails.append(("type", p, str(e)))
            continue
        types[p] = T
        if not in_closed(p, T):
            fails.append(("not-in-own-stratum", p, T))
            continue
        for idx in hs:
            if not leq_index(T, idx.lift(d)):
                fails.append(("not-minimal", p, idx))
        base = T if d == 1 else None
        if base is not None and base in window and base not in hs:
            fails.append(("missing-from-enumeration", p, T))
    stats = {"indices": len(idxs), "pairs": npairs, "points": len(holders)}
    return stats, fails
