"""Bounded chain complexes of finite-dimensional F_p-vector spaces and chain maps.

Degrees run over ``0..top``.  The differential ``d(q)`` is the matrix of
``C_q -> C_{q-1}`` (shape ``dim(q-1) x dim(q)``); ``d(0)`` is the empty map.
"""

from __future__ import annotations

import hashlib
from collections.abc import Mapping, Sequence

import numpy as np

from .errors import StructuralError, ValidationError
from .linalg_gf import Basis, check_prime, kernel_matrix, rank, rref_matrix, solve


def _zeros(r: int, c: int) -> np.ndarray:
    return np.zeros((r, c), dtype=np.int64)


class ChainComplex:
    def __init__(self, p: int, dims: Sequence[int], d: Mapping[int, object] | None = None,
                 labels: Mapping[int, Sequence] | None = None, check: bool = True):
        self.p = check_prime(p)
        self.dims = tuple(int(n) for n in dims)
        if any(n < 0 for n in self.dims):
            raise ValidationError("negative rank")
        self._d: dict[int, np.ndarray] = {}
        for q, M in (d or {}).items():
            q = int(q)
            shape = (self.dim(q - 1), self.dim(q))
            M = np.asarray(M, dtype=np.int64)
            if M.size == 0:
                M = M.reshape(shape) if shape[0] * shape[1] == 0 else M
            if M.shape != shape:
                raise ValidationError(f"differential in degree {q} has shape {M.shape}, expected {shape}")
            if not 1 <= q <= self.top:
                continue  # an empty map outside the range
            M = M % self.p
            M.setflags(write=False)
            self._d[q] = M
        self.labels = {q: Basis(labels[q]) for q in labels} if labels else {}
        for q, b in self.labels.items():
            if len(b) != self.dim(q):
                raise ValidationError(f"degree {q} has {self.dim(q)} generators but {len(b)} labels")
        if check:
            bad = self.dd_violations()
            if bad:
                raise ValidationError(f"d.d != 0 in degrees {bad}")

    @property
    def top(self) -> int:
        return len(self.dims) - 1

    def dim(self, q: int) -> int:
        return self.dims[q] if 0 <= q < len(self.dims) else 0

    def d(self, q: int) -> np.ndarray:
        if q in self._d:
            return self._d[q]
        return _zeros(self.dim(q - 1), self.dim(q))

    def dd_violations(self) -> list[int]:
        return [q for q in range(2, self.top + 1) if np.any((self.d(q - 1) @ self.d(q)) % self.p)]

    def label(self, q: int, i: int):
        return self.labels[q][i] if q in self.labels else i

    # homology

    def cycles(self, q: int) -> np.ndarray:
        return kernel_matrix(self.d(q), self.p, self.dim(q))

    def boundary_rank(self, q: int) -> int:
        """Rank of ``d(q+1)``, i.e. the dimension of the boundaries in degree q."""
        return rank(self.d(q + 1), self.p) if self.dim(q + 1) and self.dim(q) else 0

    def homology_dims(self, upto: int | None = None) -> tuple[int, ...]:
        upto = self.top if upto is None else upto
        out = []
        for q in range(upto + 1):
            z = self.dim(q) - (rank(self.d(q), self.p) if self.dim(q) and self.dim(q - 1) else 0)
            out.append(z - self.boundary_rank(q))
        return tuple(out)

    def first_nonexact(self, upto: int | None = None) -> int | None:
        for q, h in enumerate(self.homology_dims(upto)):
            if h:
                return q
        return None

    # constructions

    @classmethod
    def zero(cls, p: int) -> ChainComplex:
        return cls(p, (0,))

    @classmethod
    def concentrated(cls, p: int, n: int, rank_: int = 1) -> ChainComplex:
        return cls(p, (0,) * n + (rank_,))

    @classmethod
    def cone_of_identity(cls, p: int, n: int, rank_: int = 1) -> ChainComplex:
        """F^rank in degrees n+1 and n with the identity between them."""
        dims = [0] * (n + 2)
        dims[n] = dims[n + 1] = rank_
        return cls(p, dims, {n + 1: np.eye(rank_, dtype=np.int64)})

    def direct_sum(self, other: ChainComplex) -> ChainComplex:
        if other.p != self.p:
            raise StructuralError("complexes over different primes")
        top = max(self.top, other.top)
        dims = [self.dim(q) + other.dim(q) for q in range(top + 1)]
        d = {}
        for q in range(1, top + 1):
            M = _zeros(dims[q - 1], dims[q])
            a0, a1 = self.dim(q - 1), self.dim(q)
            M[:a0, :a1] = self.d(q)
            M[a0:, a1:] = other.d(q)
            d[q] = M
        return ChainComplex(self.p, dims, d, check=False)

    def truncated(self, top: int) -> ChainComplex:
        """Degrees ``0..top`` only (the differential out of ``top+1`` is dropped)."""
        dims = [self.dim(q) for q in range(top + 1)]
        return ChainComplex(self.p, dims, {q: self.d(q) for q in range(1, top + 1)},
                            labels={q: self.labels[q] for q in self.labels if q <= top}, check=False)

    def signed(self) -> ChainComplex:
        """The same spaces with differential ``(-1)^q d(q)`` (isomorphic complex)."""
        d = {q: ((-1) ** q * self.d(q)) % self.p for q in range(1, self.top + 1)}
        return ChainComplex(self.p, self.dims, d, labels=self.labels, check=False)

    # comparison / serialization

    def __eq__(self, other):
        if not isinstance(other, ChainComplex):
            return NotImplemented
        top = max(self.top, other.top)
        return self.p == other.p and all(
            self.dim(q) == other.dim(q) and np.array_equal(self.d(q), other.d(q)) for q in range(top + 1)
        )

    def __hash__(self):
        return hash((self.p, self.dims))

    def __repr__(self):
        return f"ChainComplex(p={self.p}, dims={self.dims})"

    def to_json(self) -> dict:
        return {
            "p": self.p,
            "ranks": {str(q): n for q, n in enumerate(self.dims)},
            "d": {str(q): self.d(q).tolist() for q in range(1, self.top + 1) if self.d(q).size},
        }

    @classmethod
    def from_json(cls, obj: Mapping) -> ChainComplex:
        try:
            p = int(obj["p"])
            ranks = {int(q): int(n) for q, n in obj["ranks"].items()}
        except (KeyError, TypeError, ValueError) as exc:
            raise ValidationError(f"malformed chain complex: {exc}") from None
        if any(q < 0 for q in ranks):
            raise ValidationError("negative degree in chain complex")
        top = max(ranks, default=0)
        dims = [ranks.get(q, 0) for q in range(top + 1)]
        d = {}
        for q, M in obj.get("d", {}).items():
            q = int(q)
            shape = (dims[q - 1] if 0 < q <= top else 0, dims[q] if 0 <= q <= top else 0)
            A = np.array(M, dtype=np.int64)
            if A.size == 0:
                A = A.reshape(shape)
            if A.shape != shape:
                raise ValidationError(f"differential in degree {q} has shape {A.shape}, expected {shape}")
            d[q] = A
        return cls(p, dims, d)


class ComplexMap:
    """A degreewise linear map ``source -> target``; ``comps[q]`` has shape
    ``target.dim(q) x source.dim(q)``."""

    def __init__(self, source: ChainComplex, target: ChainComplex, comps: Mapping[int, object] | None = None,
                 check: bool = False):
        if source.p != target.p:
            raise StructuralError("chain map between complexes over different primes")
        self.source, self.target, self.p = source, target, source.p
        self.top = max(source.top, target.top)
        self._m: dict[int, np.ndarray] = {}
        for q in range(self.top + 1):
            shape = (target.dim(q), source.dim(q))
            M = comps.get(q) if comps else None
            if M is None:
                M = _zeros(*shape)
            M = np.asarray(M, dtype=np.int64)
            if M.size == 0:
                M = M.reshape(shape)
            if M.shape != shape:
                raise StructuralError(f"component in degree {q} has shape {M.shape}, expected {shape}")
            M = M % self.p
            M.setflags(write=False)
            self._m[q] = M
        if check and not self.is_chain_map():
            raise ValidationError(f"not a chain map in degrees {self.chain_violations()}")

    def __getitem__(self, q: int) -> np.ndarray:
        if q in self._m:
            return self._m[q]
        return _zeros(self.target.dim(q), self.source.dim(q))

    def chain_violations(self) -> list[int]:
        p = self.p
        return [q for q in range(1, self.top + 1)
                if np.any((self.target.d(q) @ self[q] - self[q - 1] @ self.source.d(q)) % p)]

    def is_chain_map(self) -> bool:
        return not self.chain_violations()

    @classmethod
    def identity(cls, C: ChainComplex) -> ComplexMap:
        return cls(C, C, {q: np.eye(C.dim(q), dtype=np.int64) for q in range(C.top + 1)})

    @classmethod
    def zero(cls, source: ChainComplex, target: ChainComplex) -> ComplexMap:
        return cls(source, target)

    def __matmul__(self, other: ComplexMap) -> ComplexMap:
        """Composite ``self . other``."""
        top = max(self.top, other.top)
        if any(other.target.dim(q) != self.source.dim(q) for q in range(top + 1)):
            raise StructuralError("maps are not composable")
        return ComplexMap(other.source, self.target, {q: (self[q] @ other[q]) % self.p for q in range(top + 1)})

    def _same_shape(self, other: ComplexMap):
        top = max(self.top, other.top)
        for q in range(top + 1):
            if self[q].shape != other[q].shape:
                raise StructuralError("maps have different source or target")

    def __add__(self, other: ComplexMap) -> ComplexMap:
        self._same_shape(other)
        return ComplexMap(self.source, self.target, {q: self[q] + other[q] for q in range(self.top + 1)})

    def __sub__(self, other: ComplexMap) -> ComplexMap:
        self._same_shape(other)
        return ComplexMap(self.source, self.target, {q: self[q] - other[q] for q in range(self.top + 1)})

    def __neg__(self) -> ComplexMap:
        return self.scale(-1)

    def scale(self, c: int) -> ComplexMap:
        return ComplexMap(self.source, self.target, {q: int(c) * self[q] for q in range(self.top + 1)})

    def is_zero(self) -> bool:
        return all(not np.any(self[q]) for q in range(self.top + 1))

    def equals(self, other: ComplexMap) -> bool:
        return (self - other).is_zero()

    def first_difference(self, other: ComplexMap) -> int | None:
        for q in range(max(self.top, other.top) + 1):
            if np.any((self[q] - other[q]) % self.p):
                return q
        return None

    def is_surjective(self, q: int) -> bool:
        return rank(self[q], self.p) == self.target.dim(q) if self.target.dim(q) else True

    def kernel_complex(self) -> tuple[ChainComplex, ComplexMap]:
        """The kernel complex with its inclusion into the source."""
        p, S = self.p, self.source
        bases = []
        for q in range(S.top + 1):
            K = kernel_matrix(self[q], p, S.dim(q))  # rows
            bases.append(K)
        d = {}
        for q in range(1, S.top + 1):
            # express d(k) for k in ker_q in the basis of ker_{q-1}
            img = (S.d(q) @ bases[q].T) % p
            if bases[q - 1].shape[0] == 0:
                d[q] = _zeros(0, bases[q].shape[0])
                continue
            X = solve(bases[q - 1].T, img, p)
            if X is None:
                raise StructuralError("kernel is not a subcomplex (not a chain map?)")
            d[q] = X
        K = ChainComplex(p, [b.shape[0] for b in bases], d, check=False)
        incl = ComplexMap(K, S, {q: bases[q].T for q in range(S.top + 1)})
        return K, incl

    def digest(self) -> str:
        h = hashlib.sha256()
        for q in range(self.top + 1):
            h.update(f"{q}:{self[q].shape}:".encode())
            h.update(np.ascontiguousarray(self[q]).tobytes())
        return h.hexdigest()[:16]

    def __repr__(self):
        return f"ComplexMap({self.source!r} -> {self.target!r})"

    def to_json(self) -> dict:
        return {"p": self.p, "maps": {str(q): self[q].tolist() for q in range(self.top + 1) if self[q].size}}

    @classmethod
    def from_json(cls, obj: Mapping, source: ChainComplex, target: ChainComplex) -> ComplexMap:
        comps = {int(q): np.array(M, dtype=np.int64) for q, M in obj.get("maps", {}).items()}
        return cls(source, target, comps, check=True)


class HomComplex:
    """The mapping complex Hom(A, C) with ``D f = d_C f - (-1)^n f d_A``.

    Degree n consists of families f_q: A_q -> C_{q+n}; a family is flattened
    block by block (increasing q), each block row-major.
    """

    def __init__(self, A: ChainComplex, C: ChainComplex):
        if A.p != C.p:
            raise StructuralError("complexes over different primes")
        self.A, self.C, self.p = A, C, A.p
        self.lo, self.hi = -A.top, C.top
        self._offsets: dict[int, dict[int, tuple[int, int, int]]] = {}
        self._sizes: dict[int, int] = {}
        for n in range(self.lo, self.hi + 1):
            offs, k = {}, 0
            for q in range(A.top + 1):
                r, c = C.dim(q + n), A.dim(q)
                if r and c:
                    offs[q] = (k, r, c)
                    k += r * c
            self._offsets[n] = offs
            self._sizes[n] = k

    def size(self, n: int) -> int:
        return self._sizes.get(n, 0)

    def flatten(self, n: int, family) -> np.ndarray:
        """Vector of a family given as ``{q: matrix A_q -> C_{q+n}}`` (missing blocks are zero)."""
        v = np.zeros(self.size(n), dtype=np.int64)
        for q, (k, r, c) in self._offsets.get(n, {}).items():
            if q in family:
                v[k : k + r * c] = np.asarray(family[q], dtype=np.int64).reshape(-1)
        return v % self.p

    def unflatten(self, n: int, v) -> dict[int, np.ndarray]:
        v = np.asarray(v, dtype=np.int64)
        return {q: v[k : k + r * c].reshape(r, c) for q, (k, r, c) in self._offsets.get(n, {}).items()}

    def D(self, n: int) -> np.ndarray:
        """Matrix of Hom_n -> Hom_{n-1}."""
        src, dst = self._offsets.get(n, {}), self._offsets.get(n - 1, {})
        M = _zeros(self.size(n - 1), self.size(n))
        for q, (k, r, c) in src.items():
            if q in dst:
                # d_C f_q : A_q -> C_{q+n-1}
                k2, r2, c2 = dst[q]
                M[k2 : k2 + r2 * c2, k : k + r * c] += np.kron(self.C.d(q + n), np.eye(c, dtype=np.int64))
            if q + 1 in dst:
                # f_q d_A : A_{q+1} -> C_{q+n}
                k2, r2, c2 = dst[q + 1]
                sign = -1 if n % 2 == 0 else 1
                M[k2 : k2 + r2 * c2, k : k + r * c] += sign * np.kron(np.eye(r, dtype=np.int64), self.A.d(q + 1).T)
        return M % self.p

    def chain_maps(self) -> np.ndarray:
        """Rows spanning the degree-0 cycles, i.e. the chain maps A -> C."""
        return kernel_matrix(self.D(0), self.p, self.size(0))

    def null_homotopic(self) -> np.ndarray:
        """Rows spanning the degree-0 boundaries  d_C h + h d_A."""
        M = self.D(1)
        if M.size == 0:
            return _zeros(0, self.size(0))
        return rref_matrix(M.T, self.p)[0]

    def truncated(self) -> ChainComplex:
        """The truncation to degrees >= 0, with the cycles in degree 0."""
        p = self.p
        Z0 = self.chain_maps()
        dims = [Z0.shape[0]] + [self.size(n) for n in range(1, self.hi + 1)]
        d = {}
        if self.hi >= 1:
            img = self.D(1)
            if Z0.shape[0]:
                X = solve(Z0.T, img, p)
                if X is None:
                    raise StructuralError("Hom differential does not land in the cycles")
            else:
                X = _zeros(0, self.size(1))
            d[1] = X
        for n in range(2, self.hi + 1):
            d[n] = self.D(n)
        return ChainComplex(p, dims, d, check=True)


def hom_complex(A: ChainComplex, C: ChainComplex) -> ChainComplex:
    """tau_{>=0} Hom(A, C); H_0 of it is chain maps modulo null-homotopies."""
    return HomComplex(A, C).truncated()
