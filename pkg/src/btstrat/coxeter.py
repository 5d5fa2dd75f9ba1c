"""Symmetric groups S_d and S_d x S_d with the three Frobenius actions used for
general linear, unitary and fake unitary flag varieties.

Permutations are tuples in one-line notation with values 1..d; products
compose as functions, (uv)(x) = u(v(x)), so s_1 s_2 means "apply s_2 first".
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from functools import lru_cache

KINDS = ("linear", "unitary", "fake_unitary")
PARABOLIC_LIMIT = 10 ** 5


class KindMismatch(ValueError):
    pass


class SizeGuard(RuntimeError):
    pass


# -- plain permutations -------------------------------------------------------

def identity(d):
    return tuple(range(1, d + 1))


def compose(u, v):
    return tuple(u[x - 1] for x in v)


def inverse(u):
    out = [0] * len(u)
    for i, x in enumerate(u):
        out[x - 1] = i + 1
    return tuple(out)


def simple(j, d):
    """s_j swaps j and j+1."""
    w = list(range(1, d + 1))
    w[j - 1], w[j] = w[j], w[j - 1]
    return tuple(w)


def longest(d):
    return tuple(range(d, 0, -1))


def word(js, d):
    w = identity(d)
    for j in js:
        w = compose(w, simple(j, d))
    return w


def perm_length(w):
    d = len(w)
    return sum(1 for a in range(d) for b in range(a + 1, d) if w[a] > w[b])


def perm_bruhat_le(u, w):
    """Tableau criterion: sorted prefixes of u are dominated by those of w."""
    d = len(u)
    for i in range(1, d):
        a, b = sorted(u[:i]), sorted(w[:i])
        if any(x > y for x, y in zip(a, b)):
            return False
    return True


def transposition(a, b, d):
    w = list(range(1, d + 1))
    w[a - 1], w[b - 1] = w[b - 1], w[a - 1]
    return tuple(w)


def cycle_word(start, t, d):
    """s_start s_{start+1} ... s_{start+t-1}."""
    return word(range(start, start + t), d)


# -- Coxeter elements of the three kinds ----------------------------------------

@dataclass(frozen=True)
class CoxElement:
    kind: str
    perms: tuple

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown kind {self.kind}")
        want = 2 if self.kind == "fake_unitary" else 1
        if len(self.perms) != want:
            raise ValueError("wrong number of components")

    @classmethod
    def of(cls, kind, *perms):
        return cls(kind, tuple(tuple(p) for p in perms))

    @classmethod
    def identity(cls, kind, d):
        return cls(kind, (identity(d),) * (2 if kind == "fake_unitary" else 1))

    @classmethod
    def from_word(cls, kind, d, js, js2=()):
        if kind == "fake_unitary":
            return cls(kind, (word(js, d), word(js2, d)))
        return cls(kind, (word(js, d),))

    @property
    def d(self):
        return len(self.perms[0])

    @property
    def perm(self):
        return self.perms[0]

    def _check(self, other):
        if other.kind != self.kind or other.d != self.d:
            raise KindMismatch("elements of different groups")

    def __mul__(self, other):
        self._check(other)
        return CoxElement(self.kind, tuple(compose(a, b) for a, b in zip(self.perms, other.perms)))

    def inv(self):
        return CoxElement(self.kind, tuple(inverse(a) for a in self.perms))

    def length(self):
        return sum(perm_length(a) for a in self.perms)

    def le(self, other):
        self._check(other)
        return all(perm_bruhat_le(a, b) for a, b in zip(self.perms, other.perms))

    def frob(self):
        w0 = longest(self.d)
        if self.kind == "linear":
            return self
        if self.kind == "unitary":
            return CoxElement(self.kind, (compose(w0, compose(self.perms[0], w0)),))
        a, b = self.perms
        return CoxElement(self.kind, (compose(w0, compose(b, w0)), compose(w0, compose(a, w0))))

    def is_identity(self):
        return all(a == identity(self.d) for a in self.perms)

    def __repr__(self):
        if self.kind == "fake_unitary":
            return f"CoxElement({self.kind}, {self.perms[0]}, {self.perms[1]})"
        return f"CoxElement({self.kind}, {self.perms[0]})"


def length_and_bruhat(w: CoxElement, w2: CoxElement):
    w._check(w2)
    return w.length(), w2.length(), w.le(w2)


# -- subsets of simple reflections ---------------------------------------------

@dataclass(frozen=True)
class SimpleSubset:
    """I as a set of (side, j) pairs, side 0 (or 1 for the second factor)."""
    kind: str
    d: int
    members: frozenset

    @classmethod
    def from_gaps(cls, kind, d, gaps, gaps2=None):
        """I = S minus {s_{k+1} : k in gaps} (per factor)."""
        mem = {(0, j) for j in range(1, d) if j - 1 not in set(gaps)}
        if kind == "fake_unitary":
            g2 = set(gaps2 if gaps2 is not None else ())
            mem |= {(1, j) for j in range(1, d) if j - 1 not in g2}
        elif gaps2 is not None:
            raise ValueError("second gap list only for the product kind")
        return cls(kind, d, frozenset(mem))

    @classmethod
    def of(cls, kind, d, js, js2=()):
        mem = {(0, j) for j in js} | {(1, j) for j in js2}
        return cls(kind, d, frozenset(mem))

    @classmethod
    def full(cls, kind, d):
        return cls.from_gaps(kind, d, (), () if kind == "fake_unitary" else None)

    @classmethod
    def empty(cls, kind, d):
        g = tuple(range(d - 1))
        return cls.from_gaps(kind, d, g, g if kind == "fake_unitary" else None)

    @property
    def sides(self):
        return 2 if self.kind == "fake_unitary" else 1

    def side(self, s):
        return sorted(j for (a, j) in self.members if a == s)

    def gaps(self, s=0):
        have = set(self.side(s))
        return tuple(j - 1 for j in range(1, self.d) if j not in have)

    def frob(self):
        d = self.d
        if self.kind == "linear":
            return self
        if self.kind == "unitary":
            return SimpleSubset(self.kind, d, frozenset((0, d - j) for (_, j) in self.members))
        return SimpleSubset(self.kind, d, frozenset((1 - a, d - j) for (a, j) in self.members))

    def __and__(self, other):
        return SimpleSubset(self.kind, self.d, self.members & other.members)

    def __le__(self, other):
        return self.members <= other.members

    def generators(self):
        out = []
        for (a, j) in sorted(self.members):
            perms = [identity(self.d)] * self.sides
            perms[a] = simple(j, self.d)
            out.append(CoxElement(self.kind, tuple(perms)))
        return out

    def __repr__(self):
        if self.kind == "fake_unitary":
            return f"SimpleSubset({self.side(0)} | {self.side(1)})"
        return f"SimpleSubset({self.kind}, d={self.d}, {self.side(0)})"


def _blocks(js):
    """Maximal runs of consecutive simple reflections."""
    out, cur = [], []
    for j in sorted(js):
        if cur and j == cur[-1] + 1:
            cur.append(j)
        else:
            if cur:
                out.append(cur)
            cur = [j]
    if cur:
        out.append(cur)
    return out


def _longest_perm(js, d):
    w = list(range(1, d + 1))
    for b in _blocks(js):
        a, e = b[0], b[-1] + 1
        w[a - 1:e] = reversed(w[a - 1:e])
    return tuple(w)


def longest_element(I: SimpleSubset) -> CoxElement:
    return CoxElement(I.kind, tuple(_longest_perm(I.side(s), I.d) for s in range(I.sides)))


def parabolic_order(I: SimpleSubset) -> int:
    out = 1
    for s in range(I.sides):
        for b in _blocks(I.side(s)):
            for k in range(2, len(b) + 2):
                out *= k
    return out


def parabolic_elements(I: SimpleSubset):
    if parabolic_order(I) > PARABOLIC_LIMIT:
        raise SizeGuard("parabolic subgroup too large")
    return _parabolic_cached(I)


@lru_cache(maxsize=None)
def _parabolic_cached(I):
    e = CoxElement.identity(I.kind, I.d)
    seen = {e}
    frontier = [e]
    gens = I.generators()
    while frontier:
        nxt = []
        for x in frontier:
            for g in gens:
                y = x * g
                if y not in seen:
                    seen.add(y)
                    nxt.append(y)
        frontier = nxt
    return tuple(sorted(seen, key=lambda x: (x.length(), x.perms)))


def all_elements(kind, d):
    perms = list(itertools.permutations(range(1, d + 1)))
    if kind == "fake_unitary":
        return [CoxElement(kind, (a, b)) for a in perms for b in perms]
    return [CoxElement(kind, (a,)) for a in perms]


def left_descents(w: CoxElement):
    out = set()
    for s in range(len(w.perms)):
        iv = inverse(w.perms[s])
        for j in range(1, w.d):
            if iv[j - 1] > iv[j]:
                out.add((s, j))
    return out


def right_descents(w: CoxElement):
    out = set()
    for s in range(len(w.perms)):
        p = w.perms[s]
        for j in range(1, w.d):
            if p[j - 1] > p[j]:
                out.add((s, j))
    return out


def i_reduced(w: CoxElement, I: SimpleSubset) -> bool:
    """l(vw) = l(v) + l(w) for all v in W_I."""
    return not (left_descents(w) & I.members)


def reduced_i(w: CoxElement, I: SimpleSubset) -> bool:
    return not (right_descents(w) & I.members)


def _gen(kind, d, s, j):
    perms = [identity(d)] * (2 if kind == "fake_unitary" else 1)
    perms[s] = simple(j, d)
    return CoxElement(kind, tuple(perms))


def min_double_coset(w: CoxElement, I: SimpleSubset, J: SimpleSubset) -> CoxElement:
    while True:
        ld = left_descents(w) & I.members
        if ld:
            s, j = min(ld)
            w = _gen(w.kind, w.d, s, j) * w
            continue
        rd = right_descents(w) & J.members
        if rd:
            s, j = min(rd)
            w = w * _gen(w.kind, w.d, s, j)
            continue
        return w


def conj_intersect(I: SimpleSubset, w: CoxElement, K: SimpleSubset) -> SimpleSubset:
    """I ∩ wKw^{-1}, as simple reflections."""
    out = set()
    for (s, j) in I.members:
        iv = inverse(w.perms[s])
        a, b = iv[j - 1], iv[j]
        if abs(a - b) == 1 and (s, min(a, b)) in K.members:
            out.add((s, j))
    return SimpleSubset(I.kind, I.d, frozenset(out))


def reduced_elements(I: SimpleSubset, J: SimpleSubset | None = None):
    """The I-reduced elements, or those in ^I W ^J."""
    out = []
    for w in all_elements(I.kind, I.d):
        if i_reduced(w, I) and (J is None or reduced_i(w, J)):
            out.append(w)
    return out


def leq_IF(w2: CoxElement, w: CoxElement, I: SimpleSubset) -> bool:
    if not (i_reduced(w, I) and i_reduced(w2, I)):
        raise ValueError("arguments must be I-reduced")
    for u in parabolic_elements(I):
        if (u * w2 * u.frob().inv()).le(w):
            return True
    return False


def bedard(I: SimpleSubset, w: CoxElement):
    """Bedard sequence of w: returns (I_inf, [(I_n, w_n), ...])."""
    if not i_reduced(w, I):
        raise ValueError("w must be I-reduced")
    seq = []
    cur = I
    while True:
        wn = min_double_coset(w, cur, cur.frob())
        seq.append((cur, wn))
        nxt = conj_intersect(cur, wn, cur.frob())
        if nxt == cur:
            return cur, seq
        cur = nxt


def bedard_sequences(I: SimpleSubset):
    """All sequences in T(I), as (w_inf, sequence); used as an independent oracle."""
    out = []

    def rec(In, wn, seq):
        nxt = conj_intersect(In, wn, In.frob())
        if nxt == In:
            out.append((wn, seq))
            return
        seen = set()
        for u in parabolic_elements(nxt):
            for v in parabolic_elements(In.frob()):
                c = u * wn * v
                if c in seen:
                    continue
                seen.add(c)
                if i_reduced(c, nxt) and reduced_i(c, nxt.frob()):
                    rec(nxt, c, seq + [(nxt, c)])

    for w0 in reduced_elements(I, I.frob()):
        rec(I, w0, [(I, w0)])
    return out


# -- the decomposition lemmas ----------------------------------------------------

def decompose_k(sigma, k: int):
    """sigma = tau sigma1 sigma2 with sigma1 fixing k+1..n, sigma2 fixing 1..k."""
    n = len(sigma)
    img = set(sigma[:k])
    if not img <= set(range(1, k + 2)):
        raise ValueError("sigma({1..k}) must lie in {1..k+1}")
    if k + 1 not in img:
        tau = identity(n)
    else:
        x = min(set(range(1, k + 2)) - img)
        tau = transposition(x, k + 1, n)
    rest = compose(inverse(tau), sigma)
    s1 = tuple(rest[:k]) + tuple(range(k + 1, n + 1))
    s2 = tuple(range(1, k + 1)) + tuple(rest[k:])
    return tau, s1, s2


def chain_condition(sigma, gaps) -> bool:
    return all(set(sigma[:k]) <= set(range(1, k + 2)) for k in gaps)


def decompose_chain(sigma, gaps, I: SimpleSubset | None = None):
    """(t_1, ..., t_r) with sigma = w_1 ... w_r, w_i = s_{k_i+1} ... s_{k_i+t_i}."""
    d = len(sigma)
    gaps = tuple(gaps)
    if I is None:
        I = SimpleSubset.from_gaps("unitary", d, gaps)
    if not i_reduced(CoxElement(I.kind, (tuple(sigma),)), I):
        raise ValueError("sigma is not I-reduced")
    if not chain_condition(sigma, gaps):
        return None
    rho = tuple(sigma)
    ts = []
    r = len(gaps)
    for i, k in enumerate(gaps):
        top = gaps[i + 1] - k if i + 1 < r else d - 1 - k
        t = min(inverse(rho)[k] - k - 1, top)
        if t < 0:
            return None
        ts.append(t)
        rho = compose(inverse(cycle_word(k + 1, t, d)), rho)
    if rho != identity(d):
        return None
    return tuple(ts)


def chain_word(gaps, ts, d):
    w = identity(d)
    for k, t in zip(gaps, ts):
        w = compose(w, cycle_word(k + 1, t, d))
    return w


def chain_bounds(gaps, top):
    """Bounds t_i <= k_{i+1} - k_i and t_r <= top - k_r."""
    return tuple((gaps[i + 1] - k if i + 1 < len(gaps) else top - k) for i, k in enumerate(gaps))


def enumerate_admissible(gaps, bounds):
    if len(gaps) != len(bounds):
        raise ValueError("one bound per gap")
    return list(itertools.product(*[range(b + 1) for b in bounds]))


def pattern_avoids(sigma, patterns=((3, 4, 1, 2), (4, 2, 3, 1))) -> bool:
    n = len(sigma)
    for pat in patterns:
        m = len(pat)
        for idx in itertools.combinations(range(n), m):
            vals = [sigma[i] for i in idx]
            order = sorted(vals)
            if tuple(order.index(v) + 1 for v in vals) == tuple(pat):
                return False
    return True


def build_xwy(J: SimpleSubset, w1: CoxElement) -> CoxElement:
    """x w' y: the longest element of W_J w' W_{F(J)} for w' in ^J W ^{F(J)}."""
    FJ = J.frob()
    if not (i_reduced(w1, J) and reduced_i(w1, FJ)):
        raise ValueError("w' must be J-reduced-F(J)")
    K = conj_intersect(J, w1, FJ)
    x = longest_element(J) * longest_element(K)
    y = longest_element(FJ)
    return x * w1 * y
