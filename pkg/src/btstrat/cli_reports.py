"""Command-line reports: stratification census, poset export, verification suites.

Every command returns a Report {header, body, checks}; the process exit code is
0 iff every check passed.  Output is deterministic: JSON is written with sorted
keys and contains integers, strings, booleans and lists only.
"""

from __future__ import annotations

import argparse
import hashlib
import itertools
import json
import sys
from dataclasses import dataclass, field
from importlib import resources

import numpy as np

from . import __version__
from .core_algebra import FieldSpec
from .coxeter import (CoxElement, SimpleSubset, decompose_k, decompose_chain, chain_bounds, chain_word,
                      enumerate_admissible, reduced_elements, bedard, bedard_sequences, conj_intersect,
                      word, identity, compose, leq_IF)
from .lattices import (AmbientSpace, vertex_recognize, contains, index_in, lattice_sum,
                       lattice_intersection, tau_closure)
from .hermitian_residue import (residue_space, count_coisotropic, coisotropic_count_formula,
                                enumerate_coisotropic, lift_to_vertex, vertex_lattices_by_scan)
from .hermitian_residue import SizeGuard as ResidueGuard
from .dl_varieties import census, MAX_D
from .dl_varieties import SizeGuard as FlagGuard
from .bt_strata import (ParahoricTuple, AbstractBTIndex, InvalidTuple, InfeasibleIndex, admissible_tuples,
                        enumerate_abstract, orbit_key, ambient_for, realize, certify_abstract,
                        irreducible_components, orbit_count_formula, orbit_count_enumerated,
                        stratum_descriptor, fine_decomposition, _block_is_open, dimension_formula_m2,
                        closed_count_flags, open_count_flags, enumerate_points, type_index, point_map,
                        leq_index, window_L0, window_indices, poset_law_violations, smoothness_check)
from .bt_strata import SizeGuard as PointGuard

SCHEMA_VERSION = 1
SUITES = ("coxeter", "lattice", "hermitian", "dl", "bt", "bijection", "all")
FORMATS = ("json", "md", "dot")
GUARDS = (ResidueGuard, FlagGuard, PointGuard)
CERTIFY_MAX_N = 4
POSET_MAX_N = 3


class ConfigError(ValueError):
    pass


def _prime_power(q):
    for p in range(2, q + 1):
        if q % p == 0:
            f, x = 0, q
            while x % p == 0:
                x //= p
                f += 1
            return (p, f) if x == 1 else None
    return None


@dataclass(frozen=True)
class ReportConfig:
    n: int
    h: tuple | None = None
    q: int = 3
    d: int = 1
    N: int = 3
    fmt: str = "json"
    suite: str = "all"
    deterministic: bool = True

    def __post_init__(self):
        if self.h is not None:
            object.__setattr__(self, "h", tuple(int(x) for x in self.h))
            ParahoricTuple(self.n, self.h)
        elif self.n < 1:
            raise InvalidTuple("n must be positive")
        pf = _prime_power(self.q) if self.q > 1 else None
        if pf is None or pf[0] == 2:
            raise ConfigError(f"q = {self.q} is not an odd prime power")
        if self.d not in (1, 2):
            raise ConfigError("d must be 1 or 2")
        if self.fmt not in FORMATS:
            raise ConfigError(f"unknown format {self.fmt}")
        if self.suite not in SUITES:
            raise ConfigError(f"unknown suite {self.suite}")
        if not self.deterministic:
            raise ConfigError("reports are always deterministic")

    def tuples(self):
        if self.h is not None:
            return [ParahoricTuple(self.n, self.h)]
        return admissible_tuples(self.n)

    def spec(self):
        p, f = _prime_power(self.q)
        return FieldSpec(p, f, self.d)

    def echo(self):
        return {"n": self.n, "h": None if self.h is None else list(self.h), "q": self.q, "d": self.d,
                "N": self.N, "format": self.fmt, "suite": self.suite, "deterministic": True}


def plain(x):
    """Convert to JSON-ready data; floats are refused."""
    if isinstance(x, (bool, str)) or x is None:
        return x
    if isinstance(x, (int, np.integer)):
        return int(x)
    if isinstance(x, float):
        raise TypeError("floats are not allowed in reports")
    if isinstance(x, CoxElement):
        return [list(p) for p in x.perms]
    if isinstance(x, SimpleSubset):
        return [[s, j] for s, j in sorted(x.members)]
    if isinstance(x, ParahoricTuple):
        return {"n": x.n, "h": list(x.h)}
    if isinstance(x, AbstractBTIndex):
        return {"I": list(x.I), "types": list(x.type_vector())}
    if isinstance(x, dict):
        return {str(k): plain(v) for k, v in x.items()}
    if isinstance(x, (list, tuple, set, frozenset)):
        items = [plain(v) for v in x]
        return sorted(items, key=repr) if isinstance(x, (set, frozenset)) else items
    if hasattr(x, "abstract"):
        return {"I": list(x.I), "types": list(x.abstract.type_vector())}
    return repr(x)


@dataclass
class Report:
    command: str
    header: dict
    body: dict = field(default_factory=dict)
    checks: list = field(default_factory=list)

    def check(self, name, ok, **payload):
        entry = {"name": name, "ok": bool(ok)}
        if payload:
            entry["detail"] = plain(payload)
        self.checks.append(entry)
        return ok

    @property
    def ok(self):
        return all(c["ok"] for c in self.checks)

    def as_dict(self):
        return {"header": plain(self.header), "body": plain(self.body), "checks": self.checks}

    def to_json(self):
        return json.dumps(self.as_dict(), sort_keys=True, indent=1) + "\n"

    def to_md(self):
        out = [f"# {self.command}", ""]
        cfg = self.header["config"]
        out.append("config: " + ", ".join(f"{k}={cfg[k]}" for k in sorted(cfg)))
        out.append("")
        for key in sorted(self.body):
            out.append(f"## {key}")
            out.append("")
            out.append("```")
            out.append(json.dumps(plain(self.body[key]), sort_keys=True))
            out.append("```")
            out.append("")
        out.append("## checks")
        out.append("")
        out.append("| check | result |")
        out.append("|---|---|")
        for c in self.checks:
            out.append(f"| {c['name']} | {'pass' if c['ok'] else 'FAIL'} |")
        return "\n".join(out) + "\n"

    def to_dot(self):
        poset = self.body.get("poset")
        if poset is None:
            raise ConfigError("dot output is only available for poset reports")
        lines = ["digraph btstrat {"]
        for node in poset["nodes"]:
            lines.append(f'  {node["id"]} [label="{node["label"]}"];')
        for a, b in poset["edges"]:
            lines.append(f"  {a} -> {b};")
        lines.append("}")
        return "\n".join(lines) + "\n"

    def render(self, fmt):
        return {"json": self.to_json, "md": self.to_md, "dot": self.to_dot}[fmt]()


def load_fixtures():
    with resources.files("btstrat").joinpath("data/fixtures.json").open() as fh:
        return json.load(fh)


def make_header(config: ReportConfig, command: str):
    import numba
    spec = config.spec()
    gf = spec.gf
    grams = {}
    for tup in config.tuples():
        v = tup.vstar()
        grams["h=" + ",".join(map(str, tup.h))] = {"diagonal": [0] * (tup.n - 1) + [v], "vstar": v}
    return {
        "schema": SCHEMA_VERSION,
        "command": command,
        "versions": {"btstrat": __version__, "numpy": np.__version__, "numba": numba.__version__},
        "field": {"p": gf.p, "e": gf.e, "q": spec.q, "modulus": list(gf.modulus)},
        "gram_fixture": grams,
        "config": config.echo(),
    }


def _guarded(report, name, fn, *args, **kw):
    """Run fn; a size guard becomes a failed check instead of a crash."""
    try:
        return fn(*args, **kw)
    except GUARDS as e:
        report.check(name, False, guard=str(e))
        return None


# -- report --------------------------------------------------------------------------

def _index_entry(a: AbstractBTIndex):
    desc = stratum_descriptor(a)
    tup = a.tuple
    blocks = []
    for b in desc.blocks:
        fine = b.fine()
        blocks.append({
            "role": b.role, "kind": b.kind, "d": b.d, "gaps": [list(g) for g in b.gaps],
            "top": plain(b.top), "dim": b.dim,
            "fine": len(fine),
            "open": [[list(t) for t in ts] for ts, _ in fine if _block_is_open(b, ts, tup)],
        })
    return {"I": list(a.I), "types": list(a.type_vector()), "dim": desc.dim,
            "fine_strata": len(fine_decomposition(a)), "blocks": blocks}


def cmd_report(config: ReportConfig) -> Report:
    rep = Report("report", make_header(config, "report"))
    fixtures = load_fixtures()
    body = {}
    for tup in config.tuples():
        census_ = enumerate_abstract(tup)
        comps = irreducible_components(tup)
        entry = {
            "tuple": {"n": tup.n, "h": list(tup.h), "m": tup.m, "eps": tup.eps, "allowed": tup.allowed()},
            "census": [_index_entry(a) for a in census_],
            "components": [{"family": c.family, "I": list(c.I), "dim": c.dim, "orbit_count": c.orbit_count,
                            "enumerated": [[list(I), list(t)] for I, t in c.enumerated]} for c in comps],
            "orbit_count": {"formula": orbit_count_formula(tup), "enumerated": orbit_count_enumerated(tup)},
        }
        tag = f"n={tup.n} h={list(tup.h)}"
        f, e = entry["orbit_count"]["formula"], entry["orbit_count"]["enumerated"]
        rep.check(f"orbit count {tag}", f == e, formula=f, enumerated=e)
        for c in comps:
            if c.orbit_count != len(c.enumerated):
                rep.check(f"{c.family} family {list(c.I)} orbit count {tag}", False,
                          stated=c.orbit_count, enumerated=[list(k) for k in c.enumerated])
        if tup.m == 2:
            bad = [a for a in census_ if stratum_descriptor(a).dim != dimension_formula_m2(a)]
            rep.check(f"closed-form dimensions {tag}", not bad, counterexamples=bad)
        if tup.n <= CERTIFY_MAX_N:
            bad = certify_abstract(tup, config.q, config.N)
            rep.check(f"every abstract index realized {tag}", not bad,
                      counterexamples=[(a, msg) for a, msg in bad])
            entry["feasibility"] = "verified"
        else:
            entry["feasibility"] = "unverified feasibility"
        for fx in fixtures["components"]:
            if fx["n"] == tup.n and tuple(fx["h"]) == tup.h:
                dims = sorted(c.dim for c in comps)
                rep.check(f"fixture {fx['tag']}", dims == fx["dims"] and e == fx["orbits"],
                          dims=dims, orbits=e, expected_dims=fx["dims"], expected_orbits=fx["orbits"])
        body["h=" + ",".join(map(str, tup.h))] = entry
    rep.body = body
    return rep


# -- poset -----------------------------------------------------------------------------

def node_id(idx):
    return "idx_" + hashlib.sha1(repr(idx.key).encode()).hexdigest()[:12]


def node_label(idx, dim):
    a = idx.abstract
    t0 = ",".join(str(t) for _, t in a.t0)
    t1 = ",".join(str(t) for _, t in a.t1)
    return f"I={','.join(map(str, a.I))};t0={t0};t1={t1};dim={dim}"


def hasse(idxs):
    """Covering pairs (i, j) with idxs[i] < idxs[j]."""
    k = len(idxs)
    lt = np.zeros((k, k), dtype=bool)
    for i, x in enumerate(idxs):
        for j, y in enumerate(idxs):
            if i != j and leq_index(x, y):
                lt[i, j] = True
    # i < j is covering iff no z with i < z < j
    via = (lt.astype(np.int64) @ lt.astype(np.int64)) > 0
    cover = lt & ~via
    return [(int(i), int(j)) for i, j in zip(*np.nonzero(cover))], lt


def _levels(k, lt):
    level = [0] * k
    order = sorted(range(k), key=lambda i: int(lt[:, i].sum()))
    for j in order:
        below = np.flatnonzero(lt[:, j])
        level[j] = 1 + max((level[i] for i in below), default=0)
    return level


def cmd_poset(config: ReportConfig) -> Report:
    rep = Report("poset", make_header(config, "poset"))
    if config.h is None:
        raise ConfigError("poset needs a parahoric tuple (--h)")
    tup = ParahoricTuple(config.n, config.h)
    if tup.n > POSET_MAX_N:
        rep.check("window scale", False, guard=f"poset export is limited to n <= {POSET_MAX_N}")
        rep.body = {"poset": {"nodes": [], "edges": []}}
        return rep
    amb = ambient_for(tup, config.q, 1, config.N)
    idxs = _guarded(rep, "window census", window_indices, tup, amb)
    if idxs is None:
        rep.body = {"poset": {"nodes": [], "edges": []}}
        return rep
    idxs = sorted(idxs, key=node_id)
    dims = [stratum_descriptor(x).dim for x in idxs]
    ids = [node_id(x) for x in idxs]
    edges, lt = hasse(idxs)
    levels = _levels(len(idxs), lt)
    nodes = [{"id": ids[i], "label": node_label(x, dims[i]), "I": list(x.I),
              "types": list(x.abstract.type_vector()), "dim": dims[i], "level": levels[i]}
             for i, x in enumerate(idxs)]
    rep.body = {"poset": {"nodes": nodes, "edges": [[ids[i], ids[j]] for i, j in edges],
                          "levels": max(levels, default=0)}}
    rep.check("unique node ids", len(set(ids)) == len(ids))
    bad = [(ids[i], ids[j]) for i, j in edges if dims[i] > dims[j]]
    rep.check("dimension monotone along edges", not bad, counterexamples=bad)
    per_orbit = {}
    for x in idxs:
        per_orbit.setdefault(orbit_key(x), 0)
        per_orbit[orbit_key(x)] += 1
    abstract = {orbit_key(a) for a in enumerate_abstract(tup)}
    rep.body["orbits"] = [[list(I), list(t), c] for (I, t), c in sorted(per_orbit.items())]
    rep.check("node count = sum over orbits of concrete counts",
              sum(per_orbit.values()) == len(idxs) and set(per_orbit) <= abstract,
              stray=sorted(set(per_orbit) - abstract))
    for fx in load_fixtures()["poset"]:
        if fx["n"] == tup.n and tuple(fx["h"]) == tup.h and fx["q"] == config.q:
            got = max(levels, default=0)
            rep.check(f"fixture {fx['tag']}", len(idxs) == fx["nodes"] and got == fx["levels"],
                      nodes=len(idxs), levels=got)
    return rep


# -- verification suites --------------------------------------------------------------------

def decomposition_counterexamples(nmax):
    """Brute-force existence and uniqueness of the three-factor and chain
    decompositions over all of S_n, n <= nmax, and all gap sets."""
    bad_k, bad_chain = [], []
    for n in range(1, nmax + 1):
        for k in range(n):
            hits = {}
            for x in [None] + list(range(1, k + 1)):
                tau = identity(n) if x is None else _transposition(x, k + 1, n)
                for a in itertools.permutations(range(1, k + 1)):
                    s1 = tuple(a) + tuple(range(k + 1, n + 1))
                    for b in itertools.permutations(range(k + 1, n + 1)):
                        s2 = tuple(range(1, k + 1)) + tuple(b)
                        hits.setdefault(compose(tau, compose(s1, s2)), []).append((tau, s1, s2))
            for sig in itertools.permutations(range(1, n + 1)):
                ok = set(sig[:k]) <= set(range(1, k + 2))
                if (sig in hits) != ok or (ok and hits[sig] != [decompose_k(sig, k)]):
                    bad_k.append((sig, k))
        for r in range(n):
            for gaps in itertools.combinations(range(n - 1), r):
                words = {}
                for ts in enumerate_admissible(gaps, chain_bounds(gaps, n - 1)):
                    words.setdefault(chain_word(gaps, ts, n), []).append(ts)
                I = SimpleSubset.from_gaps("unitary", n, gaps)
                for w in reduced_elements(I):
                    want = words.get(w.perm)
                    if (want is not None and len(want) != 1) or \
                            decompose_chain(w.perm, gaps, I) != (want[0] if want else None):
                        bad_chain.append((w.perm, gaps))
    return bad_k, bad_chain


def smoothness_counterexamples(nmax):
    """Blocks (over all tuples with n <= nmax) whose double-coset element
    contains 3412 or 4231, or whose dimension disagrees with the top word."""
    seen, bad = set(), []
    for n in range(1, nmax + 1):
        for tup in admissible_tuples(n):
            for a in enumerate_abstract(tup):
                for b in stratum_descriptor(a).blocks:
                    key = (b.kind, b.d, b.gaps, b.top)
                    if key in seen:
                        continue
                    seen.add(key)
                    _, xwy, avoids, dim_ok = smoothness_check(b)
                    if not (avoids and dim_ok):
                        bad.append((b.kind, b.d, b.gaps, b.top, xwy))
    return len(seen), bad


def suite_coxeter(rep: Report, config: ReportConfig):
    dmax = min(config.n, 7)
    bad_k, bad_chain = decomposition_counterexamples(dmax)
    rep.check(f"three-factor decomposition exists and is unique, n <= {dmax}", not bad_k,
              counterexamples=bad_k[:20])
    rep.check(f"chain decomposition agrees with factorization search, n <= {dmax}", not bad_chain,
              counterexamples=bad_chain[:20])
    bad = []
    for d in range(1, min(dmax, 4) + 1):
        for r in range(d):
            for js in itertools.combinations(range(1, d), r):
                I = SimpleSubset.of("unitary", d, js)
                ends = sorted(w.perm for w, _ in bedard_sequences(I))
                red = reduced_elements(I)
                if ends != sorted(w.perm for w in red):
                    bad.append(("bijection", I))
                for w in red:
                    Iinf, seq = bedard(I, w)
                    if conj_intersect(Iinf, seq[-1][1], Iinf.frob()) != Iinf:
                        bad.append(("fixed point", I, w))
    rep.check("sequences ending in each I-reduced element exactly once", not bad, counterexamples=bad[:20])
    bad = []
    for d in range(2, min(dmax, 5) + 1):
        for js in itertools.combinations(range(1, d), d // 2):
            I = SimpleSubset.of("unitary", d, js)
            red = reduced_elements(I)
            for w in red:
                for v in red:
                    if leq_IF(v, w, I) and v.length() > w.length():
                        bad.append((I, v, w))
    rep.check("twisted order never increases length", not bad, counterexamples=bad[:20])
    nblocks, bad = smoothness_counterexamples(config.n)
    rep.check(f"longest double-coset elements avoid 3412 and 4231, rank <= {config.n}", not bad,
              blocks=nblocks, counterexamples=bad[:20])
    for fx in load_fixtures()["coxeter"]:
        if "k" in fx:
            got = decompose_k(tuple(fx["sigma"]), fx["k"])
            want = (tuple(fx["tau"]), tuple(fx["sigma1"]), tuple(fx["sigma2"]))
            rep.check(f"fixture {fx['tag']}", got == want, got=got)
        else:
            got = decompose_chain(word(fx["word"], fx["d"]), tuple(fx["gaps"]))
            rep.check(f"fixture {fx['tag']}", got == tuple(fx["ts"]), got=got)


def _transposition(a, b, n):
    p = list(range(1, n + 1))
    p[a - 1], p[b - 1] = b, a
    return tuple(p)


def suite_lattice(rep: Report, config: ReportConfig):
    spec = config.spec() if config.d == 1 else FieldSpec(*_prime_power(config.q))
    for vstar in (0, 1):
        amb = AmbientSpace(config.n, spec, config.N, vstar=vstar)
        Ls = _guarded(rep, f"window lattices vstar={vstar}", window_L0, amb)
        if Ls is None:
            continue
        Ls = Ls[:60]
        std = amb.std()
        bad = []
        for L in Ls:
            D = L.dual()
            if D.dual() != L or D.vol != amb.vstar - L.vol:
                bad.append(("duality", L.key))
            c, T = tau_closure(L)
            if c != 1 or T != L:
                bad.append(("rational tau closure", L.key))
            if index_in(L, std) != -L.vol:
                bad.append(("index", L.key))
        for A, B in itertools.combinations(Ls[:25], 2):
            S, T = lattice_sum(A, B), lattice_intersection(A, B)
            if S.vol + T.vol != A.vol + B.vol or not (contains(S, A) and contains(A, T)):
                bad.append(("modular law", A.key, B.key))
            if contains(B, A) and index_in(T, B) != index_in(T, A) + index_in(A, B):
                bad.append(("index additivity", A.key, B.key))
        rep.check(f"duality involution, index additivity, modular law (vstar={vstar})", not bad,
                  lattices=len(Ls), counterexamples=[repr(b) for b in bad[:10]])


def suite_hermitian(rep: Report, config: ReportConfig):
    p, f = _prime_power(config.q)
    spec = FieldSpec(p, f)
    for n in range(1, config.n + 1):
        for vstar in (0, 1):
            amb = AmbientSpace(n, spec, config.N, vstar=vstar)
            top = vertex_recognize(amb.std(), 0)
            bottoms = []
            V = residue_space(top, 0)
            k = (V.dim + 1) // 2
            U = enumerate_coisotropic(V, k)[0] if V.dim <= 4 else None
            if U is not None:
                bottoms.append(lift_to_vertex(top, U, "sub", 2 * k - V.dim))
            for lam, which, direction in [(top, 0, "sub")] + [(b, 1, "over") for b in bottoms]:
                W = residue_space(lam, which)
                for kk in range((W.dim + 1) // 2, W.dim + 1):
                    t = 2 * kk - W.dim if direction == "sub" else lam.type_t + 2 * (W.dim - kk)
                    name = f"{direction} counts n={n} vstar={vstar} t={lam.type_t} -> {t} q={config.q}"
                    c = _guarded(rep, name, count_coisotropic, W, kk)
                    s = _guarded(rep, name + " (lattice scan)", vertex_lattices_by_scan, lam, direction, t)
                    if c is None or s is None:
                        continue
                    fm = coisotropic_count_formula(W.dim, kk, config.q)
                    rep.check(name, c == fm == len(s), coisotropic=c, formula=fm, lattices=len(s))


def _all_subsets(kind, d):
    full = sorted(SimpleSubset.full(kind, d).members)
    for r in range(len(full) + 1):
        for c in itertools.combinations(full, r):
            yield SimpleSubset(kind, d, frozenset(c))


def closure_law(kind, d, q=3, e=1):
    """Counterexamples to the fine partition and to closed = sum of fine strata below."""
    C = census(kind, d, q, e)
    bad = []
    n_desc = 0
    for J in _all_subsets(kind, d):
        ng, missing, multiple = C.partition_report(J)
        red = reduced_elements(J)
        fine = {w: C.fine_count(J, w) for w in red}
        if missing or multiple or sum(fine.values()) != ng:
            bad.append(("partition", J, missing, multiple))
        for w in red:
            n_desc += 1
            below = sum(fine[v] for v in red if leq_IF(v, w, J))
            closed = C.closed_count(J, w)
            if closed != below:
                bad.append(("closure", J, w, closed, below))
    return n_desc, bad


def suite_dl(rep: Report, config: ReportConfig):
    for kind in ("linear", "unitary", "fake_unitary"):
        for d in range(1, min(config.n, MAX_D) + 1):
            name = f"fine strata partition and closure law: {kind} d={d} q={config.q}"
            res = _guarded(rep, name, closure_law, kind, d, config.q, config.d)
            if res is not None:
                n_desc, bad = res
                rep.check(name, not bad, descriptors=n_desc, counterexamples=bad[:10])


def suite_bt(rep: Report, config: ReportConfig):
    for tup in config.tuples():
        tag = f"n={tup.n} h={list(tup.h)}"
        if tup.n <= CERTIFY_MAX_N:
            bad = certify_abstract(tup, config.q, config.N)
            rep.check(f"every abstract index realized {tag}", not bad, counterexamples=bad)
        f, e = orbit_count_formula(tup), orbit_count_enumerated(tup)
        rep.check(f"orbit count {tag}", f == e, formula=f, enumerated=e)
        if tup.m == 2:
            bad = [a for a in enumerate_abstract(tup) if stratum_descriptor(a).dim != dimension_formula_m2(a)]
            rep.check(f"closed-form dimensions {tag}", not bad, counterexamples=bad)
        if tup.n <= POSET_MAX_N:
            amb = ambient_for(tup, config.q, 1, config.N)
            idxs = _guarded(rep, f"window census {tag}", window_indices, tup, amb)
            if idxs is not None:
                bad = _guarded(rep, f"inclusion and intersection laws {tag}", poset_law_violations, idxs,
                               config.d)
                if bad is not None:
                    rep.check(f"inclusion and intersection laws {tag}", not bad, indices=len(idxs),
                              counterexamples=[(k, x, y) for k, x, y in bad[:10]])


def bijection_check(a: AbstractBTIndex, q=3, d=1, N=3):
    """(points, flag count of the closed stratum, open points, flag count of the
    open stratum, points whose flag is open but type differs or vice versa)."""
    tup = a.tuple
    idx = realize(a, ambient_for(tup, q, 1, N))
    pts = enumerate_points(idx, d)
    big = idx.lift(d)
    desc = stratum_descriptor(a)
    opens = [{dl.w for ts, dl in b.fine() if _block_is_open(b, ts, tup)} for b in desc.blocks]
    n_open = 0
    mismatch = 0
    for p in pts:
        is_open = type_index(p) == big
        n_open += is_open
        flags = point_map(p, idx)
        flag_open = all(bf.classify() in ok for bf, ok in zip(flags, opens))
        mismatch += flag_open != is_open
    return len(pts), closed_count_flags(a, q, d), n_open, open_count_flags(a, q, d), mismatch


def suite_bijection(rep: Report, config: ReportConfig):
    fixtures = load_fixtures()["bijection"]
    for fx in fixtures:
        tup = ParahoricTuple(fx["n"], tuple(fx["h"]))
        a = AbstractBTIndex.from_types(tup, tuple(fx["I"]), tuple(fx["types"]))
        res = _guarded(rep, f"fixture {fx['tag']}", bijection_check, a, fx["q"], fx["d"])
        if res is not None:
            pts, flags, *_ = res
            rep.check(f"fixture {fx['tag']}", pts == flags == fx["points"], lattices=pts, flags=flags)
    for tup in config.tuples():
        if tup.n > CERTIFY_MAX_N:
            continue
        for a in enumerate_abstract(tup):
            name = f"points vs flags n={tup.n} h={list(tup.h)} I={list(a.I)} types={list(a.type_vector())}"
            res = _guarded(rep, name, bijection_check, a, config.q, config.d, config.N)
            if res is None:
                continue
            pts, flags, n_open, flags_open, mismatch = res
            rep.check(name, pts == flags and n_open == flags_open and not mismatch,
                      lattices=pts, flags=flags, open_lattices=n_open, open_flags=flags_open,
                      open_mismatch=mismatch)


SUITE_FUNCS = {
    "coxeter": suite_coxeter,
    "lattice": suite_lattice,
    "hermitian": suite_hermitian,
    "dl": suite_dl,
    "bt": suite_bt,
    "bijection": suite_bijection,
}


def cmd_verify(config: ReportConfig, suite: str | None = None) -> Report:
    suite = suite or config.suite
    if suite not in SUITES:
        raise ConfigError(f"unknown suite {suite}")
    rep = Report("verify", make_header(config, "verify"))
    names = [s for s in SUITES if s != "all"] if suite == "all" else [suite]
    for s in names:
        before = len(rep.checks)
        SUITE_FUNCS[s](rep, config)
        for c in rep.checks[before:]:
            c["suite"] = s
    rep.body = {"suites": names,
                "summary": {s: [sum(c["ok"] for c in rep.checks if c.get("suite") == s),
                                sum(1 for c in rep.checks if c.get("suite") == s)] for s in names}}
    return rep


# -- command line ----------------------------------------------------------------------------

def _csv(text):
    try:
        return tuple(int(x) for x in text.split(",") if x.strip())
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma separated integers, got {text!r}")


def build_parser():
    ap = argparse.ArgumentParser(prog="btstrat", description="Bruhat-Tits strata of unitary RZ spaces")
    sub = ap.add_subparsers(dest="command", required=True)

    def common(p, fmt_choices=("json", "md")):
        p.add_argument("--n", type=int, required=True)
        p.add_argument("--h", type=_csv, default=None, help="parahoric tuple, e.g. 0,2")
        p.add_argument("--q", type=int, default=3)
        p.add_argument("--d", type=int, default=1)
        p.add_argument("--N", type=int, default=3, help="window size")
        p.add_argument("--format", dest="fmt", choices=fmt_choices, default=fmt_choices[0])
        p.add_argument("--out", default=None)

    common(sub.add_parser("report", help="census, components and stratum descriptors"))
    common(sub.add_parser("poset", help="Hasse diagram of the window indices"), ("dot", "json", "md"))
    v = sub.add_parser("verify", help="run an invariant suite")
    common(v)
    v.add_argument("--suite", choices=SUITES, default="all")
    return ap


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        config = ReportConfig(n=args.n, h=args.h, q=args.q, d=args.d, N=args.N, fmt=args.fmt,
                              suite=getattr(args, "suite", "all"))
        if args.command == "report":
            rep = cmd_report(config)
        elif args.command == "poset":
            rep = cmd_poset(config)
        else:
            rep = cmd_verify(config)
    except (InvalidTuple, ConfigError, InfeasibleIndex) as e:
        print(f"btstrat: error: {e}", file=sys.stderr)
        return 2
    text = rep.render(config.fmt)
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return 0 if rep.ok else 1
