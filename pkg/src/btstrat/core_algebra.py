"""Finite fields F_{p^e} with a fixed q-power Frobenius, and the truncated
ring F[pi]/(pi^{2N}) used as the equal-characteristic model of the local ring.

Field elements are plain ints: the base-p digits of the polynomial in the
root t of the modulus.  Arrays of elements are numpy int64 arrays and every
arithmetic routine accepts both scalars and arrays.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from numba import njit

TABLE_LIMIT = 2187


class FieldError(ValueError):
    pass


class WindowMismatch(ValueError):
    pass


# -- polynomials over F_p, coefficient lists low -> high ---------------------

def _trim(a):
    a = list(a)
    while a and a[-1] == 0:
        a.pop()
    return a


def _pmulmod(a, b, mod, p):
    e = len(mod) - 1
    out = [0] * (len(a) + len(b) - 1 if a and b else 0)
    for i, x in enumerate(a):
        if x:
            for j, y in enumerate(b):
                out[i + j] = (out[i + j] + x * y) % p
    # reduce by monic mod
    for k in range(len(out) - 1, e - 1, -1):
        c = out[k]
        if c:
            for j in range(e + 1):
                out[k - e + j] = (out[k - e + j] - c * mod[j]) % p
    out = out[:e] + [0] * max(0, e - len(out))
    return out


def _ppowmod(a, n, mod, p):
    e = len(mod) - 1
    result = [1] + [0] * (e - 1)
    base = list(a) + [0] * (e - len(a))
    while n:
        if n & 1:
            result = _pmulmod(result, base, mod, p)
        base = _pmulmod(base, base, mod, p)
        n >>= 1
    return result


def _prime_factors(n):
    out, d = [], 2
    while d * d <= n:
        if n % d == 0:
            out.append(d)
            while n % d == 0:
                n //= d
        d += 1
    if n > 1:
        out.append(n)
    return out


def _is_primitive(mod, p):
    e = len(mod) - 1
    order = p ** e - 1
    x = [0, 1] + [0] * (e - 2) if e > 1 else [(-mod[0]) % p]
    one = [1] + [0] * (e - 1)
    if _ppowmod(x, order, mod, p) != one:
        return False
    return all(_ppowmod(x, order // r, mod, p) != one for r in _prime_factors(order))


def _eval_at(poly, x, mod, p):
    # Horner evaluation of an F_p-polynomial at x in F_p[t]/mod
    e = len(mod) - 1
    acc = [0] * e
    for c in reversed(poly):
        acc = _pmulmod(acc, x, mod, p) if any(acc) else [0] * e
        acc[0] = (acc[0] + c) % p
    return acc


@lru_cache(maxsize=None)
def conway_modulus(p: int, e: int) -> tuple:
    """Least primitive monic modulus of degree e compatible with the moduli of
    all proper subfields (Conway-style), as a coefficient tuple low -> high."""
    subs = [(k, conway_modulus(p, k)) for k in range(1, e) if e % k == 0]
    order = p ** e - 1
    for code in range(p ** e):
        # lexicographic on (c_{e-1}, ..., c_0)
        digits = [(code // p ** (e - 1 - i)) % p for i in range(e)]
        mod = list(reversed(digits)) + [1]
        if mod[0] == 0:
            continue
        if not _is_primitive(mod, p):
            continue
        x = [0, 1] + [0] * (e - 2) if e > 1 else [(-mod[0]) % p]
        ok = True
        for k, sub in subs:
            y = _ppowmod(x, order // (p ** k - 1), mod, p)
            if any(_eval_at(list(sub), y, mod, p)):
                ok = False
                break
        if ok:
            return tuple(mod)
    raise FieldError(f"no compatible primitive modulus for p={p}, e={e}")


# -- the field --------------------------------------------------------------

class GF:
    """F_{p^e}.  Use `field(p, e)` for the cached default instance."""

    def __init__(self, p: int, e: int, modulus=None):
        if p < 3 or any(p % d == 0 for d in range(2, int(p ** 0.5) + 1)):
            raise FieldError("p must be an odd prime")
        self.p, self.e = p, e
        self.Q = p ** e
        self.default_modulus = modulus is None
        self.modulus = tuple(conway_modulus(p, e) if modulus is None else modulus)
        if len(self.modulus) != e + 1 or self.modulus[-1] != 1:
            raise FieldError("modulus must be monic of degree e")
        Q = self.Q
        self.pw = p ** np.arange(e, dtype=np.int64)
        ints = np.arange(Q, dtype=np.int64)
        self.digits = (ints[:, None] // self.pw[None, :]) % p
        self._build_log()
        self.neg = self._to_int((-self.digits) % p)
        self.inv = np.zeros(Q, dtype=np.int64)
        self.inv[1:] = self.exp[(-self.log[1:]) % (Q - 1)]
        self.tabled = Q <= TABLE_LIMIT
        if self.tabled:
            self.add_t = self._to_int((self.digits[:, None, :] + self.digits[None, :, :]) % p)
            lg = self.log
            mt = self.exp[(lg[:, None] + lg[None, :]) % (Q - 1)]
            mt[0, :] = 0
            mt[:, 0] = 0
            self.mul_t = mt

    def _to_int(self, digs):
        return (digs * self.pw).sum(axis=-1)

    def _build_log(self):
        p, e, Q = self.p, self.e, self.Q
        mod = list(self.modulus)
        for g in range(1, Q):
            gp = [(g // p ** i) % p for i in range(e)]
            exp = np.zeros(2 * (Q - 1), dtype=np.int64)
            cur = [1] + [0] * (e - 1)
            seen_one = False
            for k in range(Q - 1):
                v = sum(c * p ** i for i, c in enumerate(cur))
                if k > 0 and v == 1:
                    seen_one = True
                    break
                exp[k] = v
                cur = _pmulmod(cur, gp, mod, p) if e > 1 else [(cur[0] * gp[0]) % p]
            if seen_one:
                continue
            exp[Q - 1:] = exp[:Q - 1]
            log = np.zeros(Q, dtype=np.int64)
            log[exp[:Q - 1]] = np.arange(Q - 1)
            if len(set(exp[:Q - 1].tolist())) != Q - 1:
                raise FieldError("modulus is not irreducible")
            self.gen, self.exp, self.log = g, exp, log
            return
        raise FieldError("modulus is not irreducible")

    # arithmetic; scalars or arrays
    def add(self, a, b):
        if self.tabled:
            return self.add_t[a, b]
        r = self._to_int((self.digits[a] + self.digits[b]) % self.p)
        return int(r) if np.ndim(r) == 0 else r

    def sub(self, a, b):
        return self.add(a, self.neg[b])

    def mul(self, a, b):
        if self.tabled:
            return self.mul_t[a, b]
        a, b = np.asarray(a), np.asarray(b)
        r = self.exp[(self.log[a] + self.log[b]) % (self.Q - 1)]
        r = np.where((a == 0) | (b == 0), 0, r)
        return int(r) if r.ndim == 0 else r

    def div(self, a, b):
        if np.any(np.asarray(b) == 0):
            raise ZeroDivisionError("division by zero in finite field")
        return self.mul(a, self.inv[b])

    def pow(self, a, k: int):
        a = np.asarray(a)
        r = self.exp[(self.log[a] * k) % (self.Q - 1)]
        if k == 0:
            r = np.ones_like(a)
        else:
            r = np.where(a == 0, 0, r)
        return int(r) if r.ndim == 0 else r

    def from_int(self, k: int) -> int:
        return k % self.p

    def frob_table(self, power: int) -> np.ndarray:
        """Table of x -> x^power."""
        return self._frob_cached(power)

    @lru_cache(maxsize=None)
    def _frob_cached(self, power):
        ints = np.arange(self.Q, dtype=np.int64)
        return np.asarray(self.pow(ints, power), dtype=np.int64)

    def in_subfield(self, x, degree: int):
        """True where x lies in the subfield F_{p^degree}."""
        return self.frob_table(self.p ** degree)[x] == x

    def subfield_elements(self, degree: int) -> np.ndarray:
        if self.e % degree:
            raise FieldError("not a subfield")
        ints = np.arange(self.Q, dtype=np.int64)
        return ints[self.in_subfield(ints, degree)]

    def minimal_polynomial(self, x: int) -> tuple:
        """Minimal polynomial over F_p as coefficient tuple low -> high."""
        conj = [int(x)]
        while True:
            y = int(self.pow(conj[-1], self.p))
            if y == conj[0]:
                break
            conj.append(y)
        poly = [1]
        for c in conj:
            new = [0] * (len(poly) + 1)
            for i, a in enumerate(poly):
                new[i + 1] = self.add(new[i + 1], a)
                new[i] = self.sub(new[i], self.mul(a, c))
            poly = [int(v) for v in new]
        if any(v >= self.p for v in poly):
            raise FieldError("minimal polynomial not over the prime field")
        return tuple(poly)

    def __repr__(self):
        return f"GF({self.p}^{self.e})"


@lru_cache(maxsize=None)
def field(p: int, e: int) -> GF:
    return GF(p, e)


def embed(small: GF, big: GF, x):
    """Compatible embedding between default-modulus fields sharing p."""
    if small.p != big.p or big.e % small.e or not (small.default_modulus and big.default_modulus):
        raise FieldError("fields are not a compatible tower")
    x = np.asarray(x)
    k = (big.Q - 1) // (small.Q - 1)
    r = big.exp[(small.log[x] * k) % (big.Q - 1)]
    r = np.where(x == 0, 0, r)
    return int(r) if r.ndim == 0 else r


@dataclass(frozen=True)
class FieldSpec:
    """The tower F_p < F_q < F_{q^2} < F_{q^{2d}}: q = p^f, element field of
    degree e = 2 f d over F_p."""
    p: int
    f: int = 1
    d: int = 1
    modulus: tuple | None = None

    @property
    def q(self):
        return self.p ** self.f

    @property
    def e(self):
        return 2 * self.f * self.d

    @property
    def gf(self) -> GF:
        if self.modulus is None:
            return field(self.p, self.e)
        return _custom_field(self.p, self.e, tuple(self.modulus))

    @property
    def Q(self):
        return self.p ** self.e

    def frob(self):
        return self.gf.frob_table(self.q)

    def tau(self):
        return self.gf.frob_table(self.q ** 2)

    def rational_elements(self) -> np.ndarray:
        """The copy of F_{q^2}."""
        return self.gf.subfield_elements(2 * self.f)

    def is_rational(self, x) -> bool:
        return bool(np.all(self.gf.in_subfield(np.asarray(x), 2 * self.f)))


@lru_cache(maxsize=None)
def _custom_field(p, e, modulus):
    return GF(p, e, modulus)


def frobenius(x, spec: FieldSpec):
    """x -> x^q."""
    return spec.frob()[x] if np.ndim(x) else int(spec.frob()[x])


# -- linear algebra over a GF -------------------------------------------------

@njit(cache=True)
def _rref_kernel(M, add_t, mul_t, neg, inv):
    rows, cols = M.shape
    piv = np.empty(min(rows, cols), dtype=np.int64)
    r = 0
    for c in range(cols):
        if r == rows:
            break
        k = -1
        for i in range(r, rows):
            if M[i, c] != 0:
                k = i
                break
        if k < 0:
            continue
        if k != r:
            for j in range(cols):
                tmp = M[r, j]
                M[r, j] = M[k, j]
                M[k, j] = tmp
        a = inv[M[r, c]]
        if a != 1:
            for j in range(c, cols):
                M[r, j] = mul_t[M[r, j], a]
        for i in range(rows):
            if i != r:
                f = M[i, c]
                if f != 0:
                    nf = neg[f]
                    for j in range(c, cols):
                        if M[r, j] != 0:
                            M[i, j] = add_t[M[i, j], mul_t[nf, M[r, j]]]
        piv[r] = c
        r += 1
    return r, piv[:r]


@njit(cache=True)
def _batch_rank_kernel(A, add_t, mul_t, neg, inv):
    B, rows, cols = A.shape
    out = np.zeros(B, dtype=np.int64)
    for b in range(B):
        M = A[b]
        r = 0
        for c in range(cols):
            if r == rows:
                break
            k = -1
            for i in range(r, rows):
                if M[i, c] != 0:
                    k = i
                    break
            if k < 0:
                continue
            if k != r:
                for j in range(cols):
                    tmp = M[r, j]
                    M[r, j] = M[k, j]
                    M[k, j] = tmp
            a = inv[M[r, c]]
            for i in range(r + 1, rows):
                f = M[i, c]
                if f != 0:
                    nf = neg[mul_t[f, a]]
                    for j in range(c, cols):
                        if M[r, j] != 0:
                            M[i, j] = add_t[M[i, j], mul_t[nf, M[r, j]]]
            r += 1
        out[b] = r
    return out


@njit(cache=True)
def _in_rowspace_kernel(R, X, add_t, mul_t, neg):
    rows, cols = R.shape
    lead = np.empty(rows, dtype=np.int64)
    for i in range(rows):
        c = 0
        while R[i, c] == 0:
            c += 1
        lead[i] = c
    x = np.empty(cols, dtype=np.int64)
    for b in range(X.shape[0]):
        for j in range(cols):
            x[j] = X[b, j]
        for i in range(rows):
            f = x[lead[i]]
            if f != 0:
                nf = neg[f]
                for j in range(lead[i], cols):
                    if R[i, j] != 0:
                        x[j] = add_t[x[j], mul_t[nf, R[i, j]]]
        for j in range(cols):
            if x[j] != 0:
                return False
    return True


def _tables(F):
    if not F.tabled:
        raise FieldError("linear algebra needs a tabled field")
    return F.add_t, F.mul_t, F.neg, F.inv


def rref(F: GF, M):
    """Reduced row echelon form; returns (R, pivot columns)."""
    M = np.array(M, dtype=np.int64, copy=True)
    if M.ndim != 2:
        raise ValueError("matrix expected")
    if M.shape[0] == 0 or M.shape[1] == 0:
        return M[:0], []
    r, piv = _rref_kernel(M, *_tables(F))
    return M[:r], [int(c) for c in piv]


def rank(F: GF, M) -> int:
    M = np.asarray(M)
    if M.size == 0:
        return 0
    return len(rref(F, M)[1])


def batch_rank(F: GF, A) -> np.ndarray:
    """Ranks of a stack of matrices, shape (B, r, c)."""
    A = np.array(A, dtype=np.int64, copy=True)
    if A.shape[1] == 0 or A.shape[2] == 0:
        return np.zeros(A.shape[0], dtype=np.int64)
    return _batch_rank_kernel(A, *_tables(F))


def in_rowspace(F: GF, R, X) -> bool:
    """Are all rows of X in the rowspace of the reduced echelon matrix R?"""
    X = np.asarray(X, dtype=np.int64)
    if X.shape[0] == 0:
        return True
    if R.shape[0] == 0:
        return not X.any()
    add_t, mul_t, neg, _ = _tables(F)
    return bool(_in_rowspace_kernel(np.ascontiguousarray(R, dtype=np.int64), X, add_t, mul_t, neg))


def nullspace(F: GF, A) -> np.ndarray:
    """Basis (rows, in RREF) of {x : A x = 0}."""
    A = np.asarray(A, dtype=np.int64)
    cols = A.shape[1]
    if A.shape[0] == 0:
        return np.eye(cols, dtype=np.int64)
    R, piv = rref(F, A)
    ps = set(piv)
    free = [c for c in range(cols) if c not in ps]
    out = np.zeros((len(free), cols), dtype=np.int64)
    for k, c in enumerate(free):
        out[k, c] = 1
        for i, pc in enumerate(piv):
            out[k, pc] = F.neg[R[i, c]]
    if len(out):
        out, _ = rref(F, out)
    return out


def matmul(F: GF, A, B):
    A = np.asarray(A, dtype=np.int64)
    B = np.asarray(B, dtype=np.int64)
    out = np.zeros(A.shape[:-1] + B.shape[-1:], dtype=np.int64)
    for k in range(A.shape[-1]):
        out = F.add(out, F.mul(A[..., k][..., None], B[..., k, :][..., None, :]))
    return np.asarray(out, dtype=np.int64)


def intersect_rows(F: GF, A, B) -> np.ndarray:
    """Zassenhaus: RREF basis of rowspace(A) ∩ rowspace(B)."""
    A = np.asarray(A, dtype=np.int64)
    B = np.asarray(B, dtype=np.int64)
    n = B.shape[1] if B.ndim == 2 else A.shape[1]
    if A.shape[0] == 0 or B.shape[0] == 0:
        return np.zeros((0, n), dtype=np.int64)
    top = np.concatenate([A, A], axis=1)
    bot = np.concatenate([B, np.zeros_like(B)], axis=1)
    R, piv = rref(F, np.concatenate([top, bot]))
    rows = [R[i, n:] for i, c in enumerate(piv) if c >= n]
    if not rows:
        return np.zeros((0, n), dtype=np.int64)
    return rref(F, np.array(rows))[0]


# -- truncated power series ----------------------------------------------------

@dataclass(frozen=True)
class TruncSeries:
    """Element of F[pi]/(pi^{2N}); coeffs[k] is the coefficient of pi^k."""
    spec: FieldSpec
    coeffs: tuple

    @property
    def N(self):
        return len(self.coeffs) // 2

    @classmethod
    def from_list(cls, spec, coeffs, N):
        c = [int(x) for x in coeffs][:2 * N]
        c += [0] * (2 * N - len(c))
        return cls(spec, tuple(c))

    @classmethod
    def zero(cls, spec, N):
        return cls(spec, (0,) * (2 * N))

    @classmethod
    def one(cls, spec, N):
        return cls.from_list(spec, [1], N)

    @classmethod
    def pi(cls, spec, N, power=1):
        c = [0] * (2 * N)
        if power < 2 * N:
            c[power] = 1
        return cls(spec, tuple(c))

    def _check(self, other):
        if len(other.coeffs) != len(self.coeffs) or other.spec != self.spec:
            raise WindowMismatch("series live in different windows or fields")

    def __add__(self, other):
        self._check(other)
        F = self.spec.gf
        return TruncSeries(self.spec, tuple(int(v) for v in F.add(np.array(self.coeffs), np.array(other.coeffs))))

    def __neg__(self):
        F = self.spec.gf
        return TruncSeries(self.spec, tuple(int(F.neg[c]) for c in self.coeffs))

    def __sub__(self, other):
        return self + (-other)

    def __mul__(self, other):
        self._check(other)
        F = self.spec.gf
        L = len(self.coeffs)
        a = np.array(self.coeffs)
        out = np.zeros(L, dtype=np.int64)
        for k, b in enumerate(other.coeffs):
            if b:
                out[k:] = F.add(out[k:], F.mul(a[:L - k], b))
        return TruncSeries(self.spec, tuple(int(v) for v in out))

    def sigma(self):
        fr = self.spec.frob()
        return TruncSeries(self.spec, tuple(int(fr[c]) for c in self.coeffs))

    def val(self) -> int:
        for k, c in enumerate(self.coeffs):
            if c:
                return k
        return len(self.coeffs)

    def is_unit(self):
        return self.val() == 0

    def __repr__(self):
        terms = [f"{c}*pi^{k}" for k, c in enumerate(self.coeffs) if c]
        return "TruncSeries(" + (" + ".join(terms) or "0") + ")"


def series_ops(a: TruncSeries, b: TruncSeries) -> dict:
    """Bundle of the basic ring operations on a pair of series."""
    return {"add": a + b, "mul": a * b, "sigma": (a.sigma(), b.sigma()),
            "val": (a.val(), b.val())}
