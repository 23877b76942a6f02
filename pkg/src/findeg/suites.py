"""Verification suites: named groups of deterministic checks with JSON reports."""

from __future__ import annotations

import itertools
import time
import zlib
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .chains import ChainComplex, ComplexMap
from .errors import CapExceeded, FindegError, PreconditionError, StructuralError, ValidationError
from .group_ring import (
    FinGroup,
    GroupFunction,
    check_composition_bound,
    check_coprime_relation,
    check_integer_polynomial,
    check_ideal_nilpotence,
    check_projection_kernels,
    check_perfect_stability,
    check_product_gentle,
    check_pushforward_bound,
    gentle_degree,
)
from .invariants import (
    DEFAULT_R_MAX,
    InvariantTable,
    MuContext,
    check_kernel_in_ideal_power,
    check_pullback_degree,
    check_wedge_alternating_sum,
    check_degree_comparison,
    pullback_triples,
    simp_degree,
    stabilization_r,
)
from .keys import key_for_function_square, key_trial, sector
from .linalg_gf import subspace_leq
from .simplicial.constructions import DEFAULT_SIMPLEX_CAP, reduced_cylinder, sphere
from .simplicial.crew import normalized_chains, validate
from .simplicial.function_complex import DEFAULT_MAP_CAP, pi0
from .simplicial.modules import DEFAULT_LEVEL_CAP, dold_kan, em_module
from .verdict import Verdict

SUITES = ("lemma-3", "lemma-4", "lemma-7", "lemma-12", "theorem-1-2")

CATALOG_SOURCES = ("sphere:1", "sphere:2", "wedge:(sphere:1,sphere:1)", "power:(sphere:1,2)")
CATALOG_TARGETS = ("em:2,1", "em:3,1", "em:2,2")

# exhaustive table enumeration is used up to this many tables per pair
TABLE_ENUM_LIMIT = 256


@dataclass
class Caps:
    maps: int = DEFAULT_MAP_CAP
    simplices: int = DEFAULT_SIMPLEX_CAP
    levels: int = DEFAULT_LEVEL_CAP
    r_max: int = DEFAULT_R_MAX

    @classmethod
    def parse(cls, text: str | None) -> Caps:
        caps = cls()
        if not text:
            return caps
        for part in text.split(","):
            key, sep, val = part.partition("=")
            key = key.strip().replace("-", "_")
            if not sep or key not in caps.__dataclass_fields__:
                raise ValidationError(f"unknown cap {part!r}; expected maps=, simplices=, levels= or r_max=")
            try:
                setattr(caps, key, int(val))
            except ValueError:
                raise ValidationError(f"cap {key} needs an integer") from None
        return caps

    def to_json(self) -> dict:
        return {"maps": self.maps, "simplices": self.simplices, "levels": self.levels, "r_max": self.r_max}


@dataclass
class Check:
    name: str
    run: Callable[[np.random.Generator, Caps], Verdict]


@dataclass
class CheckResult:
    name: str
    status: str  # pass | fail | cap
    detail: dict = field(default_factory=dict)
    witness: object = None
    seconds: float = 0.0

    def to_json(self) -> dict:
        out = {"name": self.name, "status": self.status, "detail": jsonable(self.detail)}
        if self.witness is not None:
            out["witness"] = repr(self.witness)
        return out


def jsonable(x):
    if isinstance(x, dict):
        return {str(k): jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [jsonable(v) for v in x]
    if isinstance(x, np.ndarray):
        return jsonable(x.tolist())
    if isinstance(x, (np.integer,)):
        return int(x)
    if isinstance(x, (np.bool_,)):
        return bool(x)
    if x is None or isinstance(x, (bool, int, float, str)):
        return x
    return repr(x)


def check_rng(seed: int, name: str) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence([int(seed), zlib.crc32(name.encode())]))


def run_checks(checks: list[Check], seed: int, caps: Caps, threads: int = 1) -> list[CheckResult]:
    def one(c: Check) -> CheckResult:
        t0 = time.perf_counter()
        try:
            v = c.run(check_rng(seed, c.name), caps)
            status = "pass" if v.holds else "fail"
            res = CheckResult(c.name, status, dict(v.detail), v.witness)
        except CapExceeded as exc:
            res = CheckResult(c.name, "cap", {"error": str(exc)})
        except (PreconditionError, StructuralError, ValidationError, FindegError) as exc:
            res = CheckResult(c.name, "fail", {"error": f"{type(exc).__name__}: {exc}"})
        res.seconds = time.perf_counter() - t0
        return res

    if threads <= 1:
        return [one(c) for c in checks]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(one, checks))


# ---------------------------------------------------------------------------
# group ring bounds


def _all_functions(G: FinGroup, p: int) -> list[GroupFunction]:
    return [GroupFunction(G, p, vals) for vals in itertools.product(range(p), repeat=len(G))]


def _nilpotence(p, m):
    return lambda rng, caps: check_ideal_nilpotence(p, m)


def _composition_exhaustive(rng, caps):
    Z3 = FinGroup.cyclic_sum([3])
    fs = _all_functions(Z3, 3)
    bad = 0
    witness = None
    for f in fs:
        for g in fs:
            v = check_composition_bound(f, g)
            if not v:
                bad += 1
                witness = witness or (list(f.vector), list(g.vector), v.witness)
    return Verdict(bad == 0, {"pairs": len(fs) ** 2, "violations": bad}, witness)


def _pushforward_exhaustive(rng, caps):
    Z3 = FinGroup.cyclic_sum([3])
    bad, count = 0, 0
    witness = None
    for f in _all_functions(Z3, 3):
        for s in (1, 2, 3):
            count += 1
            v = check_pushforward_bound(f, s)
            if not v:
                bad += 1
                witness = witness or (list(f.vector), s)
    return Verdict(bad == 0, {"cases": count, "violations": bad}, witness)


def _product_pairs(rng, caps, count: int = 20):
    # p-group domains, so every F_p-valued function on them is gentle
    domains = {2: [FinGroup.cyclic_sum(o) for o in ([2], [2, 2], [4])],
               3: [FinGroup.cyclic_sum(o) for o in ([3], [3, 3])]}
    bad, rows = 0, []
    for _ in range(count):
        fs = []
        for _ in range(2):
            p = int(rng.choice([2, 3]))
            G = domains[p][int(rng.integers(len(domains[p])))]
            fs.append(GroupFunction(G, p, rng.integers(0, p, size=len(G))))
        r = max(gentle_degree(f) for f in fs)
        v = check_product_gentle(fs, r)
        rows.append({"domains": [repr(f.domain) for f in fs], "primes": [f.p for f in fs], "r": r, "ok": v.holds})
        bad += not v.holds
    return Verdict(bad == 0, {"pairs": count, "violations": bad, "rows": rows})


def _coprime(G: FinGroup, p: int):
    def run(rng, caps):
        count, bad = 0, 0
        witness = None
        for u1 in G.elements:
            for u2 in G.elements:
                if np.gcd(G.element_order(u1), G.element_order(u2)) != 1:
                    continue
                count += 1
                if not check_coprime_relation(G, u1, u2, p):
                    bad += 1
                    witness = witness or (u1, u2)
        return Verdict(bad == 0, {"group": repr(G), "p": p, "pairs": count, "violations": bad}, witness)
    return run


def _cubic_window(rng, caps):
    coeffs = [0, 0, 0, 1]
    at3 = check_integer_polynomial(coeffs, 3)
    at2 = check_integer_polynomial(coeffs, 2)
    return Verdict(at3.holds and not at2.holds,
                   {"r3_passes": at3.holds, "r2_fails": not at2.holds, "window": [-20, 20]},
                   at2.witness)


def _a5(p):
    return lambda rng, caps: check_perfect_stability(FinGroup.alternating_group_5(), p)


def group_ring_checks() -> list[Check]:
    out = [Check(f"ideal-nilpotence[p={p},m={m}]", _nilpotence(p, m))
           for p in (2, 3) for m in (1, 2, 3) if p**m <= 27]
    out += [
        Check("composition-bound[Z3->Z3->Z3]", _composition_exhaustive),
        Check("pushforward-bound[Z3->Z3,s<=3]", _pushforward_exhaustive),
        Check("product-gentle[20 seeded pairs]", _product_pairs),
    ]
    for orders in ((2, 3), (6,)):
        G = FinGroup.cyclic_sum(orders)
        for p in (2, 3):
            out.append(Check(f"coprime-relation[{G!r},p={p}]", _coprime(G, p)))
    out.append(Check("cubic-window[q^3 on [-20,20]]", _cubic_window))
    out += [Check(f"a5-perfect[p={p}]", _a5(p)) for p in (2, 3, 5)]
    return out


# ---------------------------------------------------------------------------
# keys


def _key_trials(trials: int):
    def run(rng, caps):
        bad, digests = 0, []
        for _ in range(trials):
            key, v = key_trial(rng)
            digests.append(v.detail["digest"])
            bad += not v.holds
        return Verdict(bad == 0, {"trials": trials, "holding": trials - bad, "digests": digests})
    return run


def _sector_examples(rng, caps):
    X = ChainComplex.cone_of_identity(2, 0).direct_sum(ChainComplex.concentrated(2, 0))
    Y = ChainComplex.concentrated(2, 0)
    h = ComplexMap(X, Y, {0: [[0, 1]]}, check=True)
    s = sector(h)
    ident = sector(ComplexMap.identity(X))
    ok = (s.is_chain_map() and (h @ s).equals(ComplexMap.identity(Y))
          and ident.equals(ComplexMap.identity(X)))
    return Verdict(ok, {"section": s[0].tolist()})


def _function_square(rng, caps):
    L = sphere(1)
    M = reduced_cylinder(L)
    Q = dold_kan(ChainComplex.cone_of_identity(2, 1))
    R = em_module(2, 2)
    c = ComplexMap(Q.C, R.C, {2: [[1]]}, check=True)
    key, info = key_for_function_square(M.end(0), c)
    info["digest"] = key.digest()
    return Verdict(key.holds(), info)


def key_checks(trials: int = 50) -> list[Check]:
    return [
        Check(f"split-row-keys[{trials} seeded trials]", _key_trials(trials)),
        Check("sector-examples", _sector_examples),
        Check("function-square-key[cylinder end, cone projection]", _function_square),
    ]


# ---------------------------------------------------------------------------
# projection kernels


def _projection_kernels(orders, p, r):
    def run(rng, caps):
        return check_projection_kernels(orders, p, r, trials=100, seed=int(rng.integers(2**31)))
    return run


def _kernel_in_power(src: str, tgt: str, r: int):
    def run(rng, caps):
        ctx = context(src, tgt, caps)
        return check_kernel_in_ideal_power(ctx, r)
    return run


def projection_checks() -> list[Check]:
    out = []
    for m in (2, 3):
        for orders in itertools.product((2, 3), repeat=m):
            for r in (1, 2):
                for p in (2, 3):
                    out.append(Check(f"projection-kernels[{'+'.join(f'Z{o}' for o in orders)},p={p},r={r}]",
                                     _projection_kernels(orders, p, r)))
    for src in CATALOG_SOURCES:
        for tgt in CATALOG_TARGETS:
            for r in (0, 1, 2):
                out.append(Check(f"kernel-in-ideal-power[{src},{tgt},r={r}]", _kernel_in_power(src, tgt, r)))
    return out


# ---------------------------------------------------------------------------
# degree comparison and pullbacks


def _wedge_sum(r):
    return lambda rng, caps: check_wedge_alternating_sum([sphere(1)] * (r + 1), r, 2, caps.simplices)


def _degree_comparison(p):
    def run(rng, caps):
        v = check_degree_comparison(p, 1, caps.r_max, diagnostic_edges=3)
        return v
    return run


def _pullback_degree(rng, caps):
    rows, bad = [], 0
    for k, h, f, meta in pullback_triples(10, int(rng.integers(2**31))):
        v = check_pullback_degree(k, h, f, r_max=caps.r_max)
        meta.update(v.detail)
        meta["ok"] = v.holds
        rows.append(meta)
        bad += not v.holds
    return Verdict(bad == 0, {"triples": len(rows), "violations": bad, "rows": rows})


def degree_checks() -> list[Check]:
    return [
        Check("wedge-alternating-sum[r=1]", _wedge_sum(1)),
        Check("wedge-alternating-sum[r=2]", _wedge_sum(2)),
        Check("degree-comparison[p=2]", _degree_comparison(2)),
        Check("degree-comparison[p=3]", _degree_comparison(3)),
        Check("pullback-degree[10 seeded triples]", _pullback_degree),
    ]


# ---------------------------------------------------------------------------
# simplicial core, stabilization, monotonicity


def context(src: str, tgt: str, caps: Caps) -> MuContext:
    from .refs import resolve

    K, T = resolve(src, caps), resolve(tgt, caps)
    return MuContext(pi0(K, T, caps.maps), cap=caps.simplices)


def _core_pair(src: str, tgt: str):
    def run(rng, caps):
        from .refs import resolve

        K, T = resolve(src, caps), resolve(tgt, caps)
        detail = {}
        bad_faces = validate(K)
        detail["validate"] = len(bad_faces)
        dd = normalized_chains(K, T.p).dd_violations()
        detail["dd_violations"] = dd
        N, _ = T.moore_complex(min(4, T.level_cap))
        round_trip = N == T.C.truncated(min(4, T.level_cap)) if T.C.top <= 4 else False
        detail["dold_kan_round_trip"] = round_trip
        P = pi0(K, T, caps.maps)
        detail.update(P.cross_check.detail)
        ok = not bad_faces and not dd and round_trip and P.cross_check.holds
        return Verdict(ok, detail, P.cross_check.witness)
    return run


def _all_tables_bounded(ctx: MuContext, s: int, r_max: int, rng, samples: int = 30) -> tuple[bool, dict]:
    """Every table on the classes has simplicial degree <= s."""
    p, ncls = ctx.p, len(ctx.context.classes)
    total = p**ncls
    if total <= TABLE_ENUM_LIMIT:
        worst = 0
        for vals in itertools.product(range(p), repeat=ncls):
            d = simp_degree(ctx, InvariantTable(ctx.context, p, vals), r_max).degree
            if d is None or d > s:
                return False, {"method": "enumeration", "tables": total, "witness": list(vals)}
            worst = max(worst, d)
        return True, {"method": "enumeration", "tables": total, "max_degree": worst}
    # the tables of degree <= s form the kernel of (ker mu_s) . (class projection)
    A = (ctx.kernel(s) @ ctx.projection()) % p
    ok = not np.any(A)
    # spot-check the linear argument against the degree search itself
    for _ in range(samples):
        vals = tuple(int(v) for v in rng.integers(p, size=ncls))
        d = simp_degree(ctx, InvariantTable(ctx.context, p, vals), r_max).degree
        if d is None or d > s:
            return False, {"method": "linear", "tables": total, "witness": list(vals)}
    return ok, {"method": "linear", "tables": total, "sampled": samples}


def _stabilization(src: str, tgt: str):
    def run(rng, caps):
        ctx = context(src, tgt, caps)
        s = stabilization_r(ctx, caps.r_max)
        detail = {"pair": [src, tgt], "stabilization_r": s, "classes": len(ctx.context.classes),
                  "maps": ctx.n}
        if s is None:
            return Verdict(False, detail)
        ok, info = _all_tables_bounded(ctx, s, caps.r_max, rng)
        detail["tables"] = info
        if src == "sphere:1" and tgt == "em:2,1":
            detail["expected"] = 1
            ok = ok and s == 1
        return Verdict(ok, detail)
    return run


def _monotone(src: str, tgt: str):
    def run(rng, caps):
        ctx = context(src, tgt, caps)
        dims, bad = [], []
        for r in range(3):
            res = subspace_leq(ctx.kernel_space(r + 1), ctx.kernel_space(r))
            dims.append(ctx.kernel(r).shape[0])
            if not res:
                bad.append(r)
        dims.append(ctx.kernel(3).shape[0])
        return Verdict(not bad, {"kernel_dims": dims, "violations": bad})
    return run


def stabilization_checks() -> list[Check]:
    out = []
    for src in CATALOG_SOURCES:
        for tgt in CATALOG_TARGETS:
            out.append(Check(f"core[{src},{tgt}]", _core_pair(src, tgt)))
    for src in CATALOG_SOURCES:
        for tgt in CATALOG_TARGETS:
            out.append(Check(f"stabilization[{src},{tgt}]", _stabilization(src, tgt)))
    for src in CATALOG_SOURCES:
        for tgt in CATALOG_TARGETS:
            out.append(Check(f"monotone[{src},{tgt}]", _monotone(src, tgt)))
    return out


def suite_checks(name: str, trials: int = 50) -> list[Check]:
    table = {
        "lemma-3": group_ring_checks,
        "lemma-4": lambda: key_checks(trials),
        "lemma-7": projection_checks,
        "lemma-12": degree_checks,
        "theorem-1-2": stabilization_checks,
    }
    if name == "all":
        return [c for s in SUITES for c in table[s]()]
    if name not in table:
        raise ValidationError(f"unknown suite {name!r}; choose from {', '.join(SUITES + ('all',))}")
    return table[name]()
