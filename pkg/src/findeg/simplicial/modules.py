"""Simplicial F_p-modules built from chain complexes by the Dold-Kan functor.

Level q of Gamma(C) is the direct sum of copies of C_k, one for each
surjection [q] -> [k].  For a monotone theta: [m] -> [q] and a summand indexed
by sigma, factor sigma.theta = epsilon.eta (eta onto [j], epsilon injective):

  * epsilon = id        -> the element lands in summand eta unchanged,
  * epsilon = delta_k   -> it lands in summand eta after applying d_C,
  * otherwise           -> it is dropped.

Elements are :class:`ModElem` values holding dense coordinates in the
level basis; levels are materialized lazily up to a dimension cap.
"""

from __future__ import annotations

import itertools
from typing import NamedTuple

import numpy as np

from ..chains import ChainComplex, ComplexMap
from ..errors import CapExceeded, StructuralError, ValidationError
from ..linalg_gf import Solver, kernel_matrix, solve
from . import operators as ops

DEFAULT_LEVEL_CAP = 12
DEFAULT_ENUM_CAP = 200_000


class ModElem(NamedTuple):
    q: int
    vec: tuple


class SimplicialModule:
    is_module = True

    def __init__(self, C: ChainComplex, level_cap: int = DEFAULT_LEVEL_CAP, name: str | None = None):
        self.C = C
        self.p = C.p
        self.level_cap = int(level_cap)
        self.name = name
        self._basis: dict[int, list] = {}
        self._index: dict[int, dict] = {}
        self._pull: dict[tuple, np.ndarray] = {}
        self._masks: dict[int, list] = {}
        self._faces: dict[int, tuple] = {}
        self._cand: dict = {}

    def __repr__(self):
        return self.name or f"Gamma({self.C!r})"

    # levels

    def _check_level(self, q: int):
        if q > self.level_cap:
            raise CapExceeded("simplicial module level", self.level_cap, q)

    def level_basis(self, q: int) -> list[tuple]:
        """Pairs (sigma, b): generator b of C_k in the summand of sigma: [q] -> [k]."""
        hit = self._basis.get(q)
        if hit is None:
            self._check_level(q)
            hit = [(s, b) for k in range(min(q, self.C.top) + 1)
                   for s in ops.surjections(q, k) for b in range(self.C.dim(k))]
            self._basis[q] = hit
            self._index[q] = {x: i for i, x in enumerate(hit)}
        return hit

    def level_dim(self, q: int) -> int:
        return len(self.level_basis(q))

    def identity_slice(self, q: int) -> list[int]:
        """Coordinates of the summand of the identity of [q] (a copy of C_q)."""
        idx = self._index_of(q)
        ident = ops.identity(q)
        return [idx[(ident, b)] for b in range(self.C.dim(q))]

    def _index_of(self, q: int) -> dict:
        self.level_basis(q)
        return self._index[q]

    def pullback_matrix(self, theta: tuple, q: int) -> np.ndarray:
        """Matrix of theta^*: level q -> level m for theta: [m] -> [q]."""
        key = (theta, q)
        M = self._pull.get(key)
        if M is not None:
            return M
        m = len(theta) - 1
        src, dst = self.level_basis(q), self._index_of(m)
        M = np.zeros((len(dst), len(src)), dtype=np.int64)
        for col, (s, b) in enumerate(src):
            k = s[-1]
            mono, eta = ops.factor(ops.compose(s, theta))
            if len(mono) == k + 1:
                M[dst[(eta, b)], col] += 1
            elif len(mono) == k and mono == ops.coface(k, k):
                dk = self.C.d(k)
                for c in np.flatnonzero(dk[:, b]):
                    M[dst[(eta, int(c))], col] += dk[c, b]
        M %= self.p
        M.setflags(write=False)
        self._pull[key] = M
        return M

    def face_matrix(self, q: int, i: int) -> np.ndarray:
        return self.pullback_matrix(ops.coface(q, i), q)

    def degeneracy_matrix(self, q: int, j: int) -> np.ndarray:
        return self.pullback_matrix(ops.codegeneracy(q, j), q)

    # element operations (the target protocol shared with Crew)

    def elem(self, q: int, values) -> ModElem:
        v = np.asarray(values, dtype=np.int64) % self.p
        if v.shape != (self.level_dim(q),):
            raise StructuralError(f"level {q} has dimension {self.level_dim(q)}")
        return ModElem(q, tuple(int(x) for x in v))

    def elem_dim(self, x: ModElem) -> int:
        return x.q

    def pullback(self, x: ModElem, theta: tuple) -> ModElem:
        M = self.pullback_matrix(theta, x.q)
        return ModElem(len(theta) - 1, tuple(int(v) for v in (M @ np.array(x.vec, dtype=np.int64)) % self.p))

    def face(self, x: ModElem, i: int) -> ModElem:
        return self.pullback(x, ops.coface(x.q, i))

    def degen(self, x: ModElem, s: tuple) -> ModElem:
        if len(s) == x.q + 1:
            return x
        return self.pullback(x, s)

    def base_elem(self, q: int) -> ModElem:
        return ModElem(q, (0,) * self.level_dim(q))

    def add(self, x: ModElem, y: ModElem) -> ModElem:
        return ModElem(x.q, tuple((a + b) % self.p for a, b in zip(x.vec, y.vec)))

    def scale(self, x: ModElem, c: int) -> ModElem:
        return ModElem(x.q, tuple((c * a) % self.p for a in x.vec))

    def degeneracy_mask(self, x: ModElem) -> int:
        """Bit j set iff x = s_j d_j x, i.e. x lies in the image of s_j."""
        q = x.q
        projs = self._masks.get(q)
        if projs is None:
            projs = [(self.degeneracy_matrix(q - 1, j) @ self.face_matrix(q, j)) % self.p for j in range(q)]
            self._masks[q] = projs
        v = np.array(x.vec, dtype=np.int64)
        m = 0
        for j, P in enumerate(projs):
            if np.array_equal((P @ v) % self.p, v):
                m |= 1 << j
        return m

    def level(self, q: int) -> list[ModElem]:
        n = self.level_dim(q)
        if self.p**n > DEFAULT_ENUM_CAP:
            raise CapExceeded("module level elements", DEFAULT_ENUM_CAP, self.p**n)
        return [ModElem(q, v) for v in itertools.product(range(self.p), repeat=n)]

    def vertices(self) -> list[ModElem]:
        return self.level(0)

    def candidates(self, q: int, faces: tuple, cap: int = DEFAULT_ENUM_CAP) -> list[ModElem]:
        """All level-q elements with faces d_0..d_q equal to ``faces``."""
        key = (q, faces)
        out = self._cand.get(key)
        if out is not None:
            return out
        hit = self._faces.get(q)
        if hit is None:
            F = np.vstack([self.face_matrix(q, i) for i in range(q + 1)])
            hit = (Solver(F, self.p, self.level_dim(q)), kernel_matrix(F, self.p, self.level_dim(q)))
            self._faces[q] = hit
        S, K = hit
        x0 = S.solve(np.concatenate([np.array(f.vec, dtype=np.int64) for f in faces]))
        if x0 is None:
            out = []
        else:
            count = self.p ** K.shape[0]
            if count > cap:
                raise CapExceeded("candidate simplices", cap, count)
            coeffs = np.array(list(itertools.product(range(self.p), repeat=K.shape[0])), dtype=np.int64)
            V = (x0 + coeffs.reshape(count, K.shape[0]) @ K) % self.p
            out = sorted(ModElem(q, tuple(int(a) for a in v)) for v in V)
        self._cand[key] = out
        return out

    def sort_key(self, x: ModElem):
        return (x.q, x.vec)

    def elem_label(self, x: ModElem) -> str:
        basis = self.level_basis(x.q)
        terms = []
        for (s, b), v in zip(basis, x.vec):
            if v:
                pre = ops.word_label(s)
                gen = f"c{s[-1]}_{b}"
                terms.append(f"{v}*{pre}({gen})" if pre else f"{v}*{gen}")
        return " + ".join(terms) if terms else "0"

    # normalization

    def moore_complex(self, up_to: int) -> tuple[ChainComplex, list[np.ndarray]]:
        """N_q = intersection of ker d_i for i < q, with differential d_q.

        Returns the complex written in coordinates of the identity summand
        (projection to C_q), together with the inclusions N_q -> level q as
        column bases.
        """
        p = self.p
        bases = []
        for q in range(up_to + 1):
            n = self.level_dim(q)
            if q == 0:
                B = np.eye(n, dtype=np.int64)
            else:
                F = np.vstack([self.face_matrix(q, i) for i in range(q)])
                B = kernel_matrix(F, p, n).T
            bases.append(B)
        # the identity-summand projection is an isomorphism on N_q
        proj = []
        for q in range(up_to + 1):
            P = np.zeros((self.C.dim(q), self.level_dim(q)), dtype=np.int64)
            for r, c in enumerate(self.identity_slice(q)):
                P[r, c] = 1
            proj.append(P)
        dims = [bases[q].shape[1] for q in range(up_to + 1)]
        d = {}
        for q in range(1, up_to + 1):
            image = (self.face_matrix(q, q) @ bases[q]) % p  # level q-1 coordinates
            # write image in terms of the projected coordinates
            d[q] = (proj[q - 1] @ image) % p
            src = (proj[q] @ bases[q]) % p
            if src.shape[0] != src.shape[1]:
                raise StructuralError("normalized level is not a copy of C_q")
            inv = solve(src, np.eye(src.shape[0], dtype=np.int64), p) if src.size else src
            d[q] = (d[q] @ inv) % p
        return ChainComplex(p, dims, d, check=False), bases


def dold_kan(C: ChainComplex, up_to: int | None = None, name: str | None = None) -> SimplicialModule:
    cap = DEFAULT_LEVEL_CAP if up_to is None else int(up_to)
    return SimplicialModule(C, level_cap=cap, name=name)


def em_module(p: int, n: int, level_cap: int = DEFAULT_LEVEL_CAP) -> SimplicialModule:
    """Gamma(F_p concentrated in degree n), a model of K(Z/p, n)."""
    if int(n) < 0:
        raise ValidationError("n must be nonnegative")
    return SimplicialModule(ChainComplex.concentrated(p, int(n)), level_cap=level_cap, name=f"em:{p},{n}")


class ModuleMap:
    """Gamma(phi) for a chain map phi: C -> C' between the underlying complexes."""

    def __init__(self, source: SimplicialModule, target: SimplicialModule, phi: ComplexMap):
        if phi.source != source.C or phi.target != target.C:
            raise StructuralError("chain map does not match the modules")
        if not phi.is_chain_map():
            raise ValidationError("module maps come from chain maps")
        self.source, self.target, self.phi = source, target, phi
        self._mats: dict[int, np.ndarray] = {}

    @classmethod
    def scalar(cls, M: SimplicialModule, c: int) -> ModuleMap:
        return cls(M, M, ComplexMap.identity(M.C).scale(c))

    def matrix(self, q: int) -> np.ndarray:
        hit = self._mats.get(q)
        if hit is None:
            src, dst = self.source.level_basis(q), self.target._index_of(q)
            hit = np.zeros((len(dst), len(src)), dtype=np.int64)
            for col, (s, b) in enumerate(src):
                k = s[-1]
                phik = self.phi[k]
                for c in np.flatnonzero(phik[:, b]):
                    hit[dst[(s, int(c))], col] = phik[c, b]
            self._mats[q] = hit
        return hit

    def __call__(self, x: ModElem) -> ModElem:
        v = (self.matrix(x.q) @ np.array(x.vec, dtype=np.int64)) % self.target.p
        return ModElem(x.q, tuple(int(a) for a in v))
