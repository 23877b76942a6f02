"""The maps mu_r and nu on C_0(T^K), kernel computations and the simplicial
degree of invariants on pi_0.

For a vertex b of T^K, mu_r([b]) sends each nondegenerate simplex k of K^r to
the simplex b^r(k) of T^r (zero when that simplex is degenerate).  Since every
basis vertex maps each k to a single basis chain, mu_r is stored as
assignments and only linearized when a kernel is needed: for fixed k, the
vertices are binned by image, and a zero-chain B lies in ker mu_r iff its
coefficients sum to zero on every bin.
"""

from __future__ import annotations

import hashlib
import itertools
import json
from collections import Counter
from dataclasses import dataclass

import numpy as np

from .errors import PreconditionError, StructuralError, ValidationError
from .group_ring import FinGroup, GroupFunction, aug_ideal_powers, gentle_degree
from .linalg_gf import Basis, SparseVector, Subspace, kernel_matrix, solve, subspace_leq
from .simplicial.constructions import DEFAULT_SIMPLEX_CAP, polygon_circle, power_simplices, sphere, wedge, me_operator
from .simplicial.crew import Crew, CrewMap, constant_map, identity_map, name_label
from .simplicial.function_complex import Pi0, pi0
from .simplicial.modules import ModuleMap, em_module
from .verdict import Verdict

DEFAULT_R_MAX = 4


@dataclass(frozen=True)
class ZeroChain:
    """A zero-chain of T^K: coefficients on the vertex list of a Pi0 context."""

    context: Pi0
    coefficients: SparseVector

    @classmethod
    def of(cls, context: Pi0, values) -> ZeroChain:
        basis = vertex_basis(context)
        return cls(context, SparseVector.from_dense(basis, values, context.slice.p or 2))

    @classmethod
    def vertex(cls, context: Pi0, i: int, p: int | None = None) -> ZeroChain:
        basis = vertex_basis(context)
        return cls(context, SparseVector.unit(basis, basis[i], p or context.slice.p or 2))

    def dense(self) -> np.ndarray:
        return self.coefficients.to_dense()

    def __add__(self, other: ZeroChain) -> ZeroChain:
        return ZeroChain(self.context, self.coefficients + other.coefficients)

    def __sub__(self, other: ZeroChain) -> ZeroChain:
        return ZeroChain(self.context, self.coefficients - other.coefficients)


def vertex_basis(context: Pi0) -> Basis:
    return Basis([context.slice.name(i) for i in range(len(context.slice.vertices))])


def _image_key(T, xs: tuple):
    """Basis chain of T^r hit by the tuple ``xs``, or None when it is degenerate."""
    if not xs:
        return ()
    q = T.elem_dim(xs[0])
    common = (1 << q) - 1
    for x in xs:
        common &= T.degeneracy_mask(x)
        if not common:
            break
    if common:
        return None
    return tuple(xs)


def _apply_power(b: CrewMap, k: tuple):
    return tuple(b(x) for x in k)


@dataclass
class ChainTransform:
    """mu_r(B): per nondegenerate simplex of K^r, a chain of T^r as {image: coefficient}."""

    r: int
    p: int
    values: dict

    def __add__(self, other: ChainTransform) -> ChainTransform:
        out = {k: Counter(v) for k, v in self.values.items()}
        for k, v in other.values.items():
            c = out.setdefault(k, Counter())
            for img, a in v.items():
                c[img] += a
        return ChainTransform(self.r, self.p, _clean(out, self.p))

    def __eq__(self, other):
        return isinstance(other, ChainTransform) and self.values == other.values

    def is_zero(self) -> bool:
        return not self.values


def _clean(values: dict, p: int) -> dict:
    out = {}
    for k, chain in values.items():
        kept = {img: a % p for img, a in chain.items() if a % p}
        if kept:
            out[k] = kept
    return out


class MuContext:
    """Caches the binned linearization of mu_r for a fixed Pi0 context."""

    def __init__(self, context: Pi0, p: int | None = None, cap: int = DEFAULT_SIMPLEX_CAP):
        self.context = context
        fc = context.slice
        self.K, self.T = fc.source, fc.target
        self.p = p or fc.p
        if self.p is None:
            raise ValidationError("a prime is needed for crew targets")
        self.vertices = fc.vertices
        self.n = len(self.vertices)
        self.cap = cap
        self._kernels: dict[int, np.ndarray] = {}
        self._rows: dict[int, list] = {}

    def top(self, r: int) -> int:
        return self.K.dim * r

    def simplices(self, r: int, q: int) -> list[tuple]:
        return power_simplices(self.K, r, q, self.cap)

    def bins(self, r: int, q: int) -> list[tuple]:
        """Per simplex k of K^r in degree q: (k, image, vertex indices with that image)."""
        out = []
        for k in self.simplices(r, q):
            groups: dict = {}
            for i, b in enumerate(self.vertices):
                img = _image_key(self.T, _apply_power(b, k))
                if img is not None:
                    groups.setdefault(img, []).append(i)
            for img in sorted(groups, key=lambda x: tuple(self.T.sort_key(e) for e in x)):
                out.append((k, img, tuple(groups[img])))
        return out

    def rows(self, r: int) -> list[tuple]:
        """Distinct constraint rows (k, image, vertex bin) over all degrees, lowest degree first."""
        hit = self._rows.get(r)
        if hit is None:
            seen, hit = set(), []
            for q in range(self.top(r) + 1):
                for k, img, members in self.bins(r, q):
                    if members not in seen:
                        seen.add(members)
                        hit.append((k, img, members))
            self._rows[r] = hit
        return hit

    def matrix(self, rows: list) -> np.ndarray:
        M = np.zeros((len(rows), self.n), dtype=np.int64)
        for j, (_, _, members) in enumerate(rows):
            M[j, list(members)] = 1
        return M

    def kernel(self, r: int, stop=None) -> np.ndarray:
        """Rows spanning ker mu_r.

        With ``stop`` (a predicate on the partial kernel) the degrees are
        processed in increasing order and the computation returns as soon as
        the predicate holds; partial kernels only shrink, so any property
        preserved under taking subspaces is decided correctly.
        """
        if r in self._kernels:
            return self._kernels[r]
        N = np.eye(self.n, dtype=np.int64)
        seen: set = set()
        for q in range(self.top(r) + 1):
            new = []
            for _, _, members in self.bins(r, q):
                if members not in seen:
                    seen.add(members)
                    new.append(members)
            if new and N.shape[0]:
                R = np.zeros((len(new), self.n), dtype=np.int64)
                for j, members in enumerate(new):
                    R[j, list(members)] = 1
                coeff = kernel_matrix((R @ N.T) % self.p, self.p, N.shape[0])
                N = (coeff @ N) % self.p
            if N.shape[0] == 0 or (stop is not None and stop(N)):
                if N.shape[0] == 0 or q == self.top(r):
                    self._kernels[r] = N
                return N
        self._kernels[r] = N
        return N

    def kernel_space(self, r: int) -> Subspace:
        return Subspace(vertex_basis(self.context), self.kernel(r), self.p)

    def nu_kernel(self) -> Subspace:
        """ker nu: spanned by [b] - [rep(b)]."""
        rows = []
        reps = self.context.representatives
        for i, c in enumerate(self.context.class_of):
            j = reps[c]
            if i != j:
                v = np.zeros(self.n, dtype=np.int64)
                v[i], v[j] = 1, self.p - 1
                rows.append(v)
        M = np.array(rows, dtype=np.int64).reshape(len(rows), self.n)
        return Subspace(vertex_basis(self.context), M, self.p)

    def projection(self) -> np.ndarray:
        """Vertex -> class matrix (n x classes)."""
        P = np.zeros((self.n, len(self.context.classes)), dtype=np.int64)
        for i, c in enumerate(self.context.class_of):
            P[i, c] = 1
        return P


def mu(ctx: MuContext, r: int, B: ZeroChain | np.ndarray) -> ChainTransform:
    coeffs = B.dense() if isinstance(B, ZeroChain) else np.asarray(B, dtype=np.int64)
    out: dict = {}
    for q in range(ctx.top(r) + 1):
        for k in ctx.simplices(r, q):
            chain: Counter = Counter()
            for i in np.flatnonzero(coeffs % ctx.p):
                img = _image_key(ctx.T, _apply_power(ctx.vertices[i], k))
                if img is not None:
                    chain[img] += int(coeffs[i])
            out[k] = chain
    return ChainTransform(r, ctx.p, _clean(out, ctx.p))


def mu_kernel(ctx: MuContext, r: int) -> Subspace:
    return ctx.kernel_space(r)


def nu(ctx: MuContext, B: ZeroChain | np.ndarray) -> np.ndarray:
    coeffs = B.dense() if isinstance(B, ZeroChain) else np.asarray(B, dtype=np.int64)
    return (coeffs @ ctx.projection()) % ctx.p


def _inside(target: Subspace):
    return lambda N: not any(np.any(target.reduce(row)) for row in N)


def stabilization_r(ctx: MuContext, r_max: int = DEFAULT_R_MAX) -> int | None:
    """Least r <= r_max with ker mu_r inside ker nu, or None if not reached."""
    target = ctx.nu_kernel()
    for r in range(r_max + 1):
        N = ctx.kernel(r, stop=_inside(target))
        if all(not np.any(target.reduce(row)) for row in N):
            return r
    return None


@dataclass
class InvariantTable:
    """An F_p-valued function on the classes of a Pi0 context."""

    context: Pi0
    p: int
    values: tuple

    def __post_init__(self):
        if len(self.values) != len(self.context.classes):
            raise ValidationError("invariant table is not total on the classes")
        self.values = tuple(int(v) % self.p for v in self.values)

    def __call__(self, c: int) -> int:
        return self.values[c]

    def on_vertices(self) -> np.ndarray:
        return np.array([self.values[c] for c in self.context.class_of], dtype=np.int64)

    def is_constant(self) -> bool:
        return len(set(self.values)) <= 1

    def to_json(self) -> dict:
        names = self.context.rep_names()
        return {"values": {names[c]: v for c, v in enumerate(self.values)}}

    @classmethod
    def from_json(cls, context: Pi0, obj: dict, p: int) -> InvariantTable:
        try:
            raw = obj["values"]
            items = list(raw.items())
        except (KeyError, AttributeError, TypeError):
            raise ValidationError("invariant file needs a 'values' object") from None
        vals: dict[int, int] = {}
        for name, v in items:
            try:
                c = context.class_index(name)
            except KeyError:
                raise ValidationError(f"unknown vertex {name!r}") from None
            if not isinstance(v, int) or isinstance(v, bool):
                raise ValidationError(f"value for {name!r} is not an integer")
            if c in vals and vals[c] % p != v % p:
                raise ValidationError(f"conflicting values on the class of {name!r}")
            vals[c] = v
        names = context.rep_names()
        missing = [names[c] for c in range(len(context.classes)) if c not in vals]
        if missing:
            raise ValidationError(f"invariant table misses classes: {', '.join(missing)}")
        return cls(context, p, tuple(vals[c] for c in range(len(context.classes))))


@dataclass
class DegreeResult:
    degree: int | None
    r_max: int
    functional: dict | None = None
    digest: str | None = None

    def to_json(self) -> dict:
        return {
            "simplicial_degree": self.degree if self.degree is not None else "exceeds r_max",
            "r_max": self.r_max,
            "functional_digest": self.digest,
        }


def _functional(ctx: MuContext, r: int, F: np.ndarray) -> tuple[dict, str] | None:
    """Solve +f = l . mu_r on the vertex basis; l is supported on bins of mu_r."""
    rows = ctx.rows(r)
    M = ctx.matrix(rows)
    lam = solve(M.T, F, ctx.p) if rows else (None if np.any(F) else np.zeros(0, dtype=np.int64))
    if lam is None:
        return None
    if not np.array_equal((lam @ M) % ctx.p, F % ctx.p):
        raise StructuralError("factorizing functional failed re-evaluation")
    T = ctx.T
    entries = []
    for (k, img, _), c in zip(rows, lam):
        if c:
            entries.append([name_label(k), [T.elem_label(x) for x in img], int(c)])
    entries.sort()
    digest = hashlib.sha256(json.dumps(entries, sort_keys=True).encode()).hexdigest()
    return {"r": r, "terms": entries}, digest


def simp_degree(ctx: MuContext, f: InvariantTable, r_max: int = DEFAULT_R_MAX) -> DegreeResult:
    """Least r with ker mu_r inside ker(+f . class projection)."""
    F = f.on_vertices() % ctx.p
    for r in range(r_max + 1):
        N = ctx.kernel(r, stop=lambda N: not np.any((N @ F) % ctx.p))
        if not np.any((N @ F) % ctx.p):
            func = _functional(ctx, r, F)
            if func is None:
                raise StructuralError("kernel containment holds but no factorization was found")
            return DegreeResult(r, r_max, func[0], func[1])
    return DegreeResult(None, r_max)


def separate(ctx: MuContext, u1: int, u2: int, r_max: int = DEFAULT_R_MAX) -> tuple[int, InvariantTable] | None:
    """Least r at which some invariant of simplicial degree <= r separates classes u1, u2."""
    if u1 == u2:
        raise ValidationError("the two classes are equal")
    ncls = len(ctx.context.classes)
    if not (0 <= u1 < ncls and 0 <= u2 < ncls):
        raise ValidationError("class index out of range")
    P = ctx.projection()
    for r in range(r_max + 1):
        N = ctx.kernel(r)
        A = (N @ P) % ctx.p
        fs = kernel_matrix(A, ctx.p, ncls) if A.shape[0] else np.eye(ncls, dtype=np.int64)
        for fvec in fs:
            if fvec[u1] != fvec[u2]:
                # normalize to f(u1) = 0, f(u2) = 1; constants have degree 0
                inv = pow(int(fvec[u2] - fvec[u1]), -1, ctx.p)
                g = ((fvec - fvec[u1]) * inv) % ctx.p
                table = InvariantTable(ctx.context, ctx.p, tuple(int(x) for x in g))
                if simp_degree(ctx, table, r).degree is None:
                    raise StructuralError("normalized separating table lost its degree bound")
                return r, table
    return None


# ---------------------------------------------------------------------------
# checks


def vertex_group(ctx: MuContext) -> FinGroup:
    """The abelian group (U^K)_0 under pointwise addition, elements in vertex order."""
    fc = ctx.context.slice
    T = fc.target
    if not getattr(T, "is_module", False):
        raise StructuralError("vertex group needs a module target")
    n = len(fc.vertices)
    mul = np.zeros((n, n), dtype=np.int64)
    for i, a in enumerate(fc.vertices):
        for j, b in enumerate(fc.vertices):
            s = CrewMap(fc.source, T, {y: T.add(a.images[y], b.images[y]) for y in a.images}, check=False)
            mul[i, j] = fc.index(s)
    zero = ctx.context.slice.index(constant_map(fc.source, T))
    return FinGroup._from_indices(list(range(n)), mul, identity=zero, name=f"({T!r})^{fc.source!r}")


def check_kernel_in_ideal_power(ctx: MuContext, r: int) -> Verdict:
    """ker mu_r is contained in the (r+1)-st power of the augmentation ideal."""
    G = vertex_group(ctx)
    target = aug_ideal_powers(G, ctx.p, r + 1).power(r + 1)
    ker = ctx.kernel_space(r)
    ker = Subspace(G.basis, ker.rows, ctx.p)
    res = subspace_leq(ker, target)
    detail = {"r": r, "kernel_dim": ker.rank, "ideal_dim": target.rank}
    return Verdict(res.holds, detail, None if res.holds else res.witness)


def check_wedge_alternating_sum(summands, r: int, q_max: int, cap: int = DEFAULT_SIMPLEX_CAP) -> Verdict:
    """The alternating sum over e in {0,1}^{r+1} of (M_e)^r(w) vanishes for every w in W^r."""
    summands = list(summands)
    if len(summands) != r + 1:
        raise PreconditionError(f"need r+1 = {r + 1} summands, got {len(summands)}")
    W = wedge(summands)
    ops_e = [(e, me_operator(W, e)) for e in itertools.product((0, 1), repeat=r + 1)]
    checked = 0
    for q in range(q_max + 1):
        for w in power_simplices(W, r, q, cap):
            total: Counter = Counter()
            for e, m in ops_e:
                img = _image_key(W, tuple(m(x) for x in w))
                if img is not None:
                    total[img] += (-1) ** sum(e)
            bad = {k: v for k, v in total.items() if v}
            checked += 1
            if bad:
                return Verdict(False, {"r": r, "q": q, "checked": checked}, witness=name_label(w))
    return Verdict(True, {"r": r, "q_max": q_max, "checked": checked})


def sphere_class_scalars(ctx: MuContext) -> list[int]:
    """For K = sphere(n) and T = em(p, n): the scalar c with b(e_n) = c times the generator, per class."""
    fc = ctx.context.slice
    K, T = fc.source, fc.target
    top = K.levels[-1][0]
    ident = T.identity_slice(K.dim)
    out = []
    for i in ctx.context.representatives:
        out.append(int(fc.vertices[i].images[top].vec[ident[0]]))
    return out


def _degree_comparison_rows(K: Crew, p: int, n: int, r_max: int) -> tuple[list, list]:
    P = pi0(K, em_module(p, n))
    ctx = MuContext(P)
    G = FinGroup.cyclic_sum([p])
    if K.counts() == sphere(n).counts():
        scal = sphere_class_scalars(ctx)
    else:
        # identify classes with Z_p through the module structure: c * generator
        scal = _scalars_via_addition(P, p)
    rows, bad = [], []
    for vals in itertools.product(range(p), repeat=p):
        table = InvariantTable(P, p, tuple(vals[s] for s in scal))
        g = GroupFunction(G, p, [vals[c] for c in range(p)])
        gd = gentle_degree(g)
        sd = simp_degree(ctx, table, r_max).degree
        ok = gd is not None and sd is not None and gd <= sd
        rows.append({"table": list(vals), "gentle_degree": gd, "simplicial_degree": sd, "ok": ok})
        if not ok:
            bad.append(list(vals))
    return rows, bad


def _scalars_via_addition(P: Pi0, p: int) -> list[int]:
    add = P.add_table()
    zero = P.zero_class()
    gen = next(c for c in range(len(P.classes)) if c != zero)
    scal = {zero: 0}
    cur = zero
    for c in range(1, p):
        cur = add[cur][gen]
        scal[cur] = c
    return [scal[c] for c in range(len(P.classes))]


def check_degree_comparison(p: int, n: int = 1, r_max: int = DEFAULT_R_MAX, diagnostic_edges: int | None = None) -> Verdict:
    """gentle_degree(f) <= simp_degree(f) for every table on pi_0(sphere(n), em(p, n)) = Z_p."""
    rows, bad = _degree_comparison_rows(sphere(n), p, n, r_max)
    detail = {"p": p, "n": n, "tables": len(rows), "violations": len(bad), "rows": rows}
    if diagnostic_edges and n == 1:
        # the same inequality with a subdivided circle as the model of S^1
        drows, dbad = _degree_comparison_rows(polygon_circle(diagnostic_edges), p, n, r_max)
        detail["polygon_diagnostic"] = {"edges": diagnostic_edges, "violations": len(dbad),
                                        "rows": drows}
    return Verdict(not bad, detail, witness=bad[0] if bad else None)


def check_pullback_degree(k: CrewMap, h, f: InvariantTable, target_context: Pi0 | None = None,
                     r_max: int = DEFAULT_R_MAX) -> Verdict:
    """For f on [K, T], k: K -> K~ and h: T~ -> T, the pulled-back invariant on [K~, T~]
    has simplicial degree at most that of f."""
    P = f.context
    K, T = P.slice.source, P.slice.target
    Kt = k.target
    if k.source is not K:
        raise StructuralError("k does not start at the source of f's context")
    Tt = h.source if isinstance(h, (ModuleMap, CrewMap)) else None
    if Tt is None:
        raise StructuralError("h must be a module map or a crew map")
    if h.target is not T:
        raise StructuralError("h does not land in the target of f's context")
    Pt = target_context if target_context is not None else pi0(Kt, Tt)
    vals: dict[int, int] = {}
    for j, u in enumerate(Pt.slice.vertices):
        comp = CrewMap(K, T, {y: h(u(x)) for y, x in k.images.items()}, check=False)
        c = P.class_of[P.slice.index(comp)]
        ct = Pt.class_of[j]
        v = f(c)
        if vals.setdefault(ct, v) != v:
            raise StructuralError("pulled-back invariant is not constant on a class")
    ft = InvariantTable(Pt, f.p, tuple(vals[c] for c in range(len(Pt.classes))))
    d = simp_degree(MuContext(P, f.p), f, r_max).degree
    dt = simp_degree(MuContext(Pt, f.p), ft, r_max).degree
    holds = d is None or (dt is not None and dt <= d)
    return Verdict(holds, {"degree": d, "pulled_back_degree": dt, "pulled_back": list(ft.values)})


def pullback_triples(count: int, seed: int) -> list[tuple]:
    """Seeded (k, h, f) triples on [sphere(1), em(p, 1)], p in {2, 3}.

    k ranges over the self-maps of the minimal circle (identity and constant),
    h over scalar self-maps of the module, f over random tables.
    """
    rng = np.random.default_rng(seed)
    K = sphere(1)
    cache = {}
    out = []
    for _ in range(count):
        p = int(rng.choice([2, 3]))
        if p not in cache:
            T = em_module(p, 1)
            cache[p] = (T, pi0(K, T))
        T, P = cache[p]
        k = identity_map(K) if rng.integers(2) else constant_map(K, K)
        c = int(rng.integers(p))
        h = ModuleMap.scalar(T, c)
        f = InvariantTable(P, p, tuple(int(v) for v in rng.integers(p, size=len(P.classes))))
        out.append((k, h, f, {"p": p, "k": "identity" if k.images == identity_map(K).images else "constant",
                              "h_scalar": c, "f": list(f.values)}))
    return out


# public names used by the operation catalog
check_cor_7_2 = check_kernel_in_ideal_power
check_lemma_12_1 = check_wedge_alternating_sum
check_lemma_12_2 = check_degree_comparison
check_lemma_10_1 = check_pullback_degree
