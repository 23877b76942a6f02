"""Keys and half-keys of commutative squares of chain complexes over F_p.

A square

    W --g1--> V1
    |g2       |f1
    v         v
    V2 --f2-> U        (f1 g1 = f2 g2)

has a key (s1, s2, t1, t2), with s_i: U -> V_i and t_i: V_i -> W, when

    (-s1, s2) . (-f1, f2) + (g1, g2) . (t1, t2) = id   on V1 + V2.

Simplicial modules are handled through their normalized chains, and the
function modules Q^L through truncated mapping complexes tau_{>=0} Hom(N~(L), C).
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass

import numpy as np

from .chains import ChainComplex, ComplexMap, HomComplex
from .errors import PreconditionError, StructuralError, ValidationError
from .linalg_gf import kernel_matrix, solve
from .simplicial.crew import CrewMap, induced_chain_map, normalized_chains
from .simplicial.constructions import QuotientCrew
from .simplicial.modules import ModuleMap
from .verdict import Verdict


def _eye(n: int) -> np.ndarray:
    return np.eye(n, dtype=np.int64)


def sector(h: ComplexMap, trivial_fibration: bool = True) -> ComplexMap:
    """A chain map s with h . s = id.

    The chain condition D(s) = 0 in Hom(Y, X) and the equation h . s = id are
    linear in s, so all degrees are solved at once.  For a trivial fibration
    (surjective with exact kernel) a solution always exists; degreewise split
    surjections of split exact rows are handled by the same solve.
    """
    p = h.p
    X, Y = h.source, h.target
    for q in range(Y.top + 1):
        if not h.is_surjective(q):
            raise PreconditionError(f"map is not surjective in degree {q}")
    if trivial_fibration:
        Kc, _ = h.kernel_complex()
        bad = Kc.first_nonexact()
        if bad is not None:
            raise PreconditionError(f"kernel is not exact in degree {bad}")
    H = HomComplex(Y, X)
    n = H.size(0)
    post = np.zeros((sum(Y.dim(q) ** 2 for q in range(Y.top + 1)), n), dtype=np.int64)
    rhs_id = np.zeros(post.shape[0], dtype=np.int64)
    row = 0
    for q, (k, r, c) in H._offsets.get(0, {}).items():
        size = Y.dim(q) * c
        post[row : row + size, k : k + r * c] = np.kron(h[q], _eye(c))
        rhs_id[row : row + size] = _eye(Y.dim(q)).reshape(-1)
        row += size
    post, rhs_id = post[:row], rhs_id[:row]
    D0 = H.D(0)
    A = np.vstack([D0, post])
    b = np.concatenate([np.zeros(D0.shape[0], dtype=np.int64), rhs_id])
    v = solve(A, b, p) if n else (np.zeros(0, dtype=np.int64) if not np.any(b) else None)
    if v is None:
        raise PreconditionError("map has no chain-map section")
    s = ComplexMap(Y, X, H.unflatten(0, v))
    if not s.is_chain_map():
        raise StructuralError(f"sector is not a chain map in degrees {s.chain_violations()}")
    if not (h @ s).equals(ComplexMap.identity(Y)):
        raise StructuralError("h . s is not the identity")
    return s


def retraction_for(q_map: ComplexMap, k: ComplexMap, p_map: ComplexMap) -> ComplexMap:
    """l with l q = id and k p + q l = id, for a short exact row with section k of p."""
    P = q_map.p
    V = q_map.target
    comps = {}
    for d in range(V.top + 1):
        rest = (_eye(V.dim(d)) - k[d] @ p_map[d]) % P
        if q_map.source.dim(d):
            X = solve(q_map[d], rest, P)
            if X is None:
                raise PreconditionError(f"row is not exact in the middle in degree {d}")
        else:
            if np.any(rest):
                raise PreconditionError(f"row is not exact in the middle in degree {d}")
            X = np.zeros((0, V.dim(d)), dtype=np.int64)
        comps[d] = X
    return ComplexMap(V, q_map.source, comps)


@dataclass
class SplitRow:
    """0 <- U <-p- V <-q- W <- 0 with splittings p k = id, l q = id, k p + q l = id."""

    p: ComplexMap
    q: ComplexMap
    k: ComplexMap
    l: ComplexMap

    def violations(self) -> list[str]:
        U, V, W = self.p.target, self.p.source, self.q.source
        bad = []
        if not (self.p @ self.k).equals(ComplexMap.identity(U)):
            bad.append("p.k = id")
        if not (self.l @ self.q).equals(ComplexMap.identity(W)):
            bad.append("l.q = id")
        if not ((self.k @ self.p) + (self.q @ self.l)).equals(ComplexMap.identity(V)):
            bad.append("k.p + q.l = id")
        return bad

    @classmethod
    def from_sector(cls, p_map: ComplexMap, q_map: ComplexMap) -> SplitRow:
        k = sector(p_map, trivial_fibration=False)
        return cls(p_map, q_map, k, retraction_for(q_map, k, p_map))


@dataclass
class KeyQuadruple:
    f1: ComplexMap
    f2: ComplexMap
    g1: ComplexMap
    g2: ComplexMap
    s1: ComplexMap
    s2: ComplexMap
    t1: ComplexMap
    t2: ComplexMap

    def violations(self) -> list[tuple[str, int]]:
        """Failed blocks of the key identity as (block, degree)."""
        V1, V2 = self.f1.source, self.f2.source
        blocks = {
            "11": ((self.s1 @ self.f1) + (self.g1 @ self.t1), ComplexMap.identity(V1)),
            "12": ((self.g1 @ self.t2) - (self.s1 @ self.f2), ComplexMap.zero(V2, V1)),
            "21": ((self.g2 @ self.t1) - (self.s2 @ self.f1), ComplexMap.zero(V1, V2)),
            "22": ((self.s2 @ self.f2) + (self.g2 @ self.t2), ComplexMap.identity(V2)),
        }
        out = []
        for name, (lhs, rhs) in blocks.items():
            q = lhs.first_difference(rhs)
            if q is not None:
                out.append((name, q))
        return out

    def holds(self) -> bool:
        return not self.violations()

    def half_key(self) -> tuple[ComplexMap, ComplexMap]:
        return self.t1, self.t2

    def digest(self) -> str:
        h = hashlib.sha256()
        for m in (self.s1, self.s2, self.t1, self.t2):
            h.update(m.digest().encode())
        return h.hexdigest()[:16]


def key_from_split_rows(f: ComplexMap, g: ComplexMap, h: ComplexMap,
                        top: SplitRow, bottom: SplitRow, s: ComplexMap) -> KeyQuadruple:
    """Key of the left square of a map of split exact rows, given a sector s of h.

    Top row 0 <- U~ <- V~ <- W~ <- 0, bottom row 0 <- U <- V <- W <- 0, vertical
    maps f, g, h.  With r = q~ s l and k^ = k~ + r (k f - g k~) the quadruple
    (0, k, k^, r) is a key of the square V~ -> U~, V~ -> V, U~ -> U, V -> U.
    """
    for row, name in ((top, "upper"), (bottom, "lower")):
        bad = row.violations()
        if bad:
            raise PreconditionError(f"{name} row: {bad[0]} fails")
    if not (h @ s).equals(ComplexMap.identity(h.target)):
        raise PreconditionError("h . s = id fails")
    if not (bottom.p @ g).equals(f @ top.p):
        raise PreconditionError("left square does not commute")
    r = top.q @ s @ bottom.l
    k_hat = top.k + (r @ ((bottom.k @ f) - (g @ top.k)))
    U = f.target
    key = KeyQuadruple(f1=f, f2=bottom.p, g1=top.p, g2=g,
                       s1=ComplexMap.zero(U, f.source), s2=bottom.k, t1=k_hat, t2=r)
    bad = key.violations()
    if bad:
        raise StructuralError(f"key identity fails at {bad[0]}")
    return key


def half_key_lift(key: KeyQuadruple, k1: ComplexMap, k2: ComplexMap) -> ComplexMap:
    """l = t1 k1 + t2 k2 with g1 l = k1 and g2 l = k2, given f1 k1 = f2 k2."""
    if not (key.f1 @ k1).equals(key.f2 @ k2):
        raise PreconditionError("f1 . k1 = f2 . k2 fails")
    l = (key.t1 @ k1) + (key.t2 @ k2)
    if not (key.g1 @ l).equals(k1) or not (key.g2 @ l).equals(k2):
        raise StructuralError("half-key lift does not satisfy both equations")
    return l


# ---------------------------------------------------------------------------
# mapping complexes


class MappingComplex:
    """tau_{>=0} Hom(A, C) with degree 0 written in a basis of the chain maps."""

    def __init__(self, A: ChainComplex, C: ChainComplex):
        self.A, self.C = A, C
        self.H = HomComplex(A, C)
        self.Z = self.H.chain_maps()
        self.complex = self.H.truncated()

    def degree_matrix(self, other: MappingComplex, n: int, M: np.ndarray) -> np.ndarray:
        """Restrict a Hom_n(self) -> Hom_n(other) matrix to the truncation."""
        p = self.C.p
        if n:
            return M
        if other.Z.shape[0] == 0:
            return np.zeros((0, self.Z.shape[0]), dtype=np.int64)
        img = (M @ self.Z.T) % p
        X = solve(other.Z.T, img, p)
        if X is None:
            raise StructuralError("induced map does not preserve chain maps")
        return X


def _block_map(src: HomComplex, dst: HomComplex, n: int, block) -> np.ndarray:
    """Matrix Hom_n(src) -> Hom_n(dst) from per-degree block maps F_q -> G_q."""
    M = np.zeros((dst.size(n), src.size(n)), dtype=np.int64)
    so, do = src._offsets.get(n, {}), dst._offsets.get(n, {})
    for q, (k, r, c) in so.items():
        if q in do:
            k2, r2, c2 = do[q]
            M[k2 : k2 + r2 * c2, k : k + r * c] = block(q, n)
    return M % src.p


def precompose(a: ComplexMap, source: MappingComplex, target: MappingComplex) -> ComplexMap:
    """Hom(A, C) -> Hom(A', C), f -> f . a for a: A' -> A."""
    def block(q, n):
        return np.kron(_eye(source.C.dim(q + n)), a[q].T)
    return _induced(source, target, block)


def postcompose(c: ComplexMap, source: MappingComplex, target: MappingComplex) -> ComplexMap:
    """Hom(A, C) -> Hom(A, C'), f -> c . f for c: C -> C'."""
    def block(q, n):
        return np.kron(c[q + n], _eye(source.A.dim(q)))
    return _induced(source, target, block)


def _induced(source: MappingComplex, target: MappingComplex, block) -> ComplexMap:
    comps = {}
    top = max(source.complex.top, target.complex.top)
    for n in range(top + 1):
        M = _block_map(source.H, target.H, n, block)
        comps[n] = source.degree_matrix(target, n, M)
    m = ComplexMap(source.complex, target.complex, comps)
    if not m.is_chain_map():
        raise StructuralError("induced map of mapping complexes is not a chain map")
    return m


def _module_chain_map(c) -> ComplexMap:
    if isinstance(c, ModuleMap):
        return c.phi
    if isinstance(c, ComplexMap):
        return c
    raise ValidationError("c must be a module map or a chain map")


def _signed_map(c: ComplexMap) -> ComplexMap:
    return ComplexMap(c.source.signed(), c.target.signed(), {q: c[q] for q in range(c.top + 1)})


def key_for_function_square(j: CrewMap, c, collapsed=None) -> tuple[KeyQuadruple, dict]:
    """Key of the square Q^L <- Q^M, R^L <- R^M for j: L -> M and c: Q -> R.

    Rows come from L -> M -> N = M/L; each row is split by a sector of its
    surjection, and c^N gets a sector of its own.
    """
    L, M = j.source, j.target
    phi = _module_chain_map(c)
    p = phi.p
    images = set()
    for y, x in j.images.items():
        if x.nondegenerate:
            images.add(x.base)
        elif y != L.basepoint:
            raise PreconditionError(f"j is not injective: {y!r} maps to a degenerate simplex")
    if len(images) != sum(len(lv) for lv in L.levels):
        raise PreconditionError("j is not injective on nondegenerate simplices")
    for q in range(1, phi.top + 1):
        if not phi.is_surjective(q):
            raise PreconditionError(f"c is not surjective on normalized chains in degree {q}")
    N = QuotientCrew(M, images, name=f"({M!r})/({L!r})")
    NC = normalized_chains(N, p, reduced=True)
    bad = NC.first_nonexact()
    if bad is not None:
        raise PreconditionError(f"M/L has reduced homology in degree {bad}")

    AL = normalized_chains(L, p, reduced=True)
    AM = normalized_chains(M, p, reduced=True)
    jc = induced_chain_map(j, p, reduced=True)
    kc = induced_chain_map(N.quotient_map(), p, reduced=True)
    CQ, CR = phi.source.signed(), phi.target.signed()
    cs = _signed_map(phi)

    QL, QM, QN = (MappingComplex(A, CQ) for A in (AL, AM, NC))
    RL, RM, RN = (MappingComplex(A, CR) for A in (AL, AM, NC))
    Qj, Qk = precompose(jc, QM, QL), precompose(kc, QN, QM)
    Rj, Rk = precompose(jc, RM, RL), precompose(kc, RN, RM)
    cL, cM, cN = postcompose(cs, QL, RL), postcompose(cs, QM, RM), postcompose(cs, QN, RN)

    upper = SplitRow.from_sector(Qj, Qk)
    lower = SplitRow.from_sector(Rj, Rk)
    s = sector(cN)
    key = key_from_split_rows(cL, cM, cN, upper, lower, s)
    info = {
        "quotient_counts": list(N.counts()),
        "ranks": {name: list(X.complex.dims) for name, X in
                  (("QL", QL), ("QM", QM), ("QN", QN), ("RL", RL), ("RM", RM), ("RN", RN))},
    }
    return key, info


# ---------------------------------------------------------------------------
# seeded trials


def random_complex(rng, p: int, max_rank: int = 4, top: int = 2) -> ChainComplex:
    dims = [int(rng.integers(0, max_rank + 1)) for _ in range(top + 1)]
    d = {}
    for q in range(1, top + 1):
        if q == 1:
            d[q] = rng.integers(0, p, size=(dims[0], dims[1]))
        else:
            # columns drawn from the kernel of the previous differential
            Kr = kernel_matrix(d[q - 1], p, dims[q - 1])
            coeff = rng.integers(0, p, size=(dims[q], Kr.shape[0]))
            d[q] = (coeff @ Kr).T % p if Kr.shape[0] else np.zeros((dims[q - 1], dims[q]), dtype=np.int64)
    return ChainComplex(p, dims, d)


def random_chain_map(rng, A: ChainComplex, C: ChainComplex) -> ComplexMap:
    H = HomComplex(A, C)
    Z = H.chain_maps()
    v = (rng.integers(0, A.p, size=Z.shape[0]) @ Z) % A.p if Z.shape[0] else np.zeros(H.size(0), dtype=np.int64)
    fam = H.unflatten(0, v)
    return ComplexMap(A, C, fam, check=True)


def _random_iso(rng, p: int, n: int) -> np.ndarray:
    while True:
        P = rng.integers(0, p, size=(n, n))
        if n == 0 or solve(P, _eye(n), p) is not None:
            return P % p


def _inject(A: ChainComplex, S: ChainComplex, first: bool) -> ComplexMap:
    comps = {}
    for q in range(S.top + 1):
        M = np.zeros((S.dim(q), A.dim(q)), dtype=np.int64)
        off = 0 if first else S.dim(q) - A.dim(q)
        M[off : off + A.dim(q), :] = _eye(A.dim(q))
        comps[q] = M
    return ComplexMap(A, S, comps)


def _project(S: ChainComplex, A: ChainComplex, first: bool) -> ComplexMap:
    return ComplexMap(S, A, {q: _inject(A, S, first)[q].T for q in range(S.top + 1)})


def _conjugate(S: ChainComplex, rng) -> tuple[ChainComplex, ComplexMap, ComplexMap]:
    """A degreewise change of basis of S with the isomorphism and its inverse."""
    p = S.p
    Ps = [_random_iso(rng, p, S.dim(q)) for q in range(S.top + 1)]
    Pinv = [solve(P, _eye(P.shape[0]), p) if P.size else P for P in Ps]
    d = {q: (Ps[q - 1] @ S.d(q) @ Pinv[q]) % p for q in range(1, S.top + 1)}
    S2 = ChainComplex(p, S.dims, d)
    return S2, ComplexMap(S, S2, dict(enumerate(Ps))), ComplexMap(S2, S, dict(enumerate(Pinv)))


@dataclass
class SplitRowsDiagram:
    f: ComplexMap
    g: ComplexMap
    h: ComplexMap
    top_p: ComplexMap
    top_q: ComplexMap
    bot_p: ComplexMap
    bot_q: ComplexMap


def random_split_rows(rng, p: int = 2, max_rank: int = 4, top: int = 2) -> SplitRowsDiagram:
    """A map of split exact rows whose right-hand map has a sector.

    Upper row U~ <- U~ + W~ <- W~ with W~ = W + E (E acyclic) so that h, the
    projection W~ -> W, is a trivial fibration; the middle terms are then
    disguised by random changes of basis.
    """
    Ut = random_complex(rng, p, max_rank, top)
    U = random_complex(rng, p, max_rank, top)
    W = random_complex(rng, p, max_rank, top)
    n = int(rng.integers(0, top))
    E = ChainComplex.cone_of_identity(p, n, int(rng.integers(0, 3)))
    Wt = W.direct_sum(E)
    f = random_chain_map(rng, Ut, U)
    y = random_chain_map(rng, Ut, W)
    h = _project(Wt, W, True)
    Vt, V = Ut.direct_sum(Wt), U.direct_sum(W)
    # g = [[f, 0], [y, h]] in split coordinates
    g = (_inject(U, V, True) @ f @ _project(Vt, Ut, True)) \
        + (_inject(W, V, False) @ y @ _project(Vt, Ut, True)) \
        + (_inject(W, V, False) @ h @ _project(Vt, Wt, False))
    Vt2, A, Ainv = _conjugate(Vt, rng)
    V2, B, Binv = _conjugate(V, rng)
    return SplitRowsDiagram(
        f=f, g=B @ g @ Ainv, h=h,
        top_p=_project(Vt, Ut, True) @ Ainv, top_q=A @ _inject(Wt, Vt, False),
        bot_p=_project(V, U, True) @ Binv, bot_q=B @ _inject(W, V, False),
    )


def key_trial(rng, p: int = 2) -> tuple[KeyQuadruple, Verdict]:
    D = random_split_rows(rng, p)
    upper = SplitRow.from_sector(D.top_p, D.top_q)
    lower = SplitRow.from_sector(D.bot_p, D.bot_q)
    s = sector(D.h)
    key = key_from_split_rows(D.f, D.g, D.h, upper, lower, s)
    # half-key lift on compatible pairs (g1 m, g2 m) for a random endomorphism m of W
    W = key.g1.source
    m = random_chain_map(rng, W, W)
    lifts_ok = True
    for mm in (ComplexMap.identity(W), m):
        l = half_key_lift(key, key.g1 @ mm, key.g2 @ mm)
        lifts_ok &= (key.g1 @ l).equals(key.g1 @ mm)
    verdict = Verdict(key.holds() and lifts_ok,
                      {"digest": key.digest(), "sector_chain_map": s.is_chain_map(), "lifts": lifts_ok})
    return key, verdict
