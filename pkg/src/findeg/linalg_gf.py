"""Exact linear algebra over prime fields F_p.

Everything here is exact integer arithmetic modulo a prime ``p < 2**16``.
Dense work is done on ``int64`` numpy arrays: with ``p < 2**16`` a product of
two residues is below ``2**32``, so a dot product of length below ``2**31``
cannot overflow.

The public surface mirrors the three objects the rest of the package talks
about: scalars (:class:`FpScalar`), labelled sparse vectors
(:class:`SparseVector`) and subspaces kept in reduced row-echelon form
(:class:`Subspace`).
"""

from __future__ import annotations

from collections.abc import Hashable, Iterable, Sequence
from dataclasses import dataclass
from functools import lru_cache
from typing import NamedTuple

import numpy as np

from .errors import StructuralError, ValidationError

MAX_PRIME = 2**16

# rows are reduced in chunks of this many times the column count
_CHUNK_FACTOR = 4


@lru_cache(maxsize=None)
def is_prime(n: int) -> bool:
    if n < 2:
        return False
    if n % 2 == 0:
        return n == 2
    k = 3
    while k * k <= n:
        if n % k == 0:
            return False
        k += 2
    return True


def check_prime(p: int) -> int:
    """Return ``p`` as an int, raising ``ValidationError`` unless it is a usable prime."""
    p = int(p)
    if not is_prime(p):
        raise ValidationError(f"{p} is not prime")
    if p >= MAX_PRIME:
        raise ValidationError(f"prime {p} is not below 2**16")
    return p


@dataclass(frozen=True)
class FpScalar:
    """A residue modulo a prime."""

    value: int
    p: int

    def __post_init__(self):
        check_prime(self.p)
        object.__setattr__(self, "value", int(self.value) % self.p)

    def _coerce(self, other) -> int:
        if isinstance(other, FpScalar):
            if other.p != self.p:
                raise StructuralError(f"mixing F_{self.p} and F_{other.p}")
            return other.value
        return int(other)

    def __add__(self, other):
        return FpScalar(self.value + self._coerce(other), self.p)

    __radd__ = __add__

    def __sub__(self, other):
        return FpScalar(self.value - self._coerce(other), self.p)

    def __rsub__(self, other):
        return FpScalar(self._coerce(other) - self.value, self.p)

    def __mul__(self, other):
        return FpScalar(self.value * self._coerce(other), self.p)

    __rmul__ = __mul__

    def __neg__(self):
        return FpScalar(-self.value, self.p)

    def inverse(self) -> FpScalar:
        if self.value == 0:
            raise ZeroDivisionError(f"0 has no inverse in F_{self.p}")
        return FpScalar(pow(self.value, -1, self.p), self.p)

    def __truediv__(self, other):
        return self * FpScalar(self._coerce(other), self.p).inverse()

    def __eq__(self, other):
        if isinstance(other, FpScalar):
            return self.p == other.p and self.value == other.value
        if isinstance(other, int):
            return self.value == other % self.p
        return NotImplemented

    def __hash__(self):
        return hash((self.value, self.p))

    def __int__(self):
        return self.value

    def __bool__(self):
        return self.value != 0

    def __repr__(self):
        return f"{self.value} (mod {self.p})"


class Basis(Sequence):
    """An ordered, duplicate-free tuple of labels with O(1) index lookup.

    The order is whatever the caller supplies; producers in this package always
    pass their canonical enumeration order, so echelon forms are reproducible.
    """

    __slots__ = ("labels", "_index")

    def __init__(self, labels: Iterable[Hashable]):
        self.labels = tuple(labels)
        self._index = {lab: i for i, lab in enumerate(self.labels)}
        if len(self._index) != len(self.labels):
            raise StructuralError("basis labels are not distinct")

    @classmethod
    def of(cls, labels) -> Basis:
        return labels if isinstance(labels, Basis) else cls(labels)

    @classmethod
    def canonical(cls, labels: Iterable[Hashable]) -> Basis:
        """Basis sorted lexicographically by the labels' ``repr`` encodings."""
        return cls(sorted(labels, key=repr))

    def index(self, label) -> int:
        try:
            return self._index[label]
        except KeyError:
            raise StructuralError(f"label {label!r} not in basis") from None

    def __contains__(self, label) -> bool:
        return label in self._index

    def __getitem__(self, i):
        return self.labels[i]

    def __len__(self):
        return len(self.labels)

    def __eq__(self, other):
        if isinstance(other, Basis):
            return self is other or self.labels == other.labels
        return NotImplemented

    def __hash__(self):
        return hash(self.labels)

    def __repr__(self):
        return f"Basis({list(self.labels)!r})"


class SparseVector:
    """A vector over F_p stored as ``label -> nonzero residue``."""

    __slots__ = ("basis", "p", "entries")

    def __init__(self, basis, entries: dict | None = None, p: int = 2):
        self.basis = Basis.of(basis)
        self.p = check_prime(p)
        clean = {}
        for lab, v in (entries or {}).items():
            if lab not in self.basis:
                raise StructuralError(f"label {lab!r} not in the index space")
            v = int(v) % self.p
            if v:
                clean[lab] = v
        self.entries = clean

    @classmethod
    def from_dense(cls, basis, values, p: int) -> SparseVector:
        basis = Basis.of(basis)
        values = np.asarray(values, dtype=np.int64) % p
        if values.shape != (len(basis),):
            raise StructuralError("dense vector length does not match basis")
        nz = np.nonzero(values)[0]
        return cls(basis, {basis[i]: int(values[i]) for i in nz}, p)

    @classmethod
    def unit(cls, basis, label, p: int) -> SparseVector:
        return cls(basis, {label: 1}, p)

    def to_dense(self) -> np.ndarray:
        out = np.zeros(len(self.basis), dtype=np.int64)
        for lab, v in self.entries.items():
            out[self.basis.index(lab)] = v
        return out

    def _check(self, other: SparseVector):
        if self.basis != other.basis or self.p != other.p:
            raise StructuralError("vectors live in different spaces")

    def __add__(self, other: SparseVector) -> SparseVector:
        self._check(other)
        out = dict(self.entries)
        for lab, v in other.entries.items():
            out[lab] = out.get(lab, 0) + v
        return SparseVector(self.basis, out, self.p)

    def __sub__(self, other: SparseVector) -> SparseVector:
        return self + other.scale(-1)

    def __neg__(self) -> SparseVector:
        return self.scale(-1)

    def scale(self, c) -> SparseVector:
        c = int(c)
        return SparseVector(self.basis, {k: v * c for k, v in self.entries.items()}, self.p)

    def __getitem__(self, label) -> int:
        return self.entries.get(label, 0)

    def is_zero(self) -> bool:
        return not self.entries

    def __eq__(self, other):
        if not isinstance(other, SparseVector):
            return NotImplemented
        return self.basis == other.basis and self.p == other.p and self.entries == other.entries

    def __hash__(self):
        return hash((self.basis, self.p, frozenset(self.entries.items())))

    def __repr__(self):
        body = ", ".join(f"{k!r}: {v}" for k, v in self.entries.items())
        return f"SparseVector({{{body}}}, p={self.p})"


# ---------------------------------------------------------------------------
# dense kernels


def as_matrix(rows, ncols: int | None = None) -> np.ndarray:
    M = np.asarray(rows, dtype=np.int64)
    if M.size == 0:
        return M.reshape(0, ncols if ncols is not None else (M.shape[-1] if M.ndim == 2 else 0))
    if M.ndim == 1:
        M = M.reshape(1, -1)
    return M


def _rref_block(A: np.ndarray, p: int) -> tuple[np.ndarray, list[int]]:
    # A is modified in place
    nrows, ncols = A.shape
    pivots: list[int] = []
    r = 0
    for c in range(ncols):
        if r == nrows:
            break
        nz = np.flatnonzero(A[r:, c])
        if nz.size == 0:
            continue
        i = r + int(nz[0])
        if i != r:
            A[[r, i]] = A[[i, r]]
        inv = pow(int(A[r, c]), -1, p)
        if inv != 1:
            A[r] = (A[r] * inv) % p
        col = A[:, c].copy()
        col[r] = 0
        hit = np.flatnonzero(col)
        if hit.size:
            A[hit] = (A[hit] - np.outer(col[hit], A[r])) % p
        pivots.append(c)
        r += 1
    return A[:r], pivots


def rref_matrix(M, p: int) -> tuple[np.ndarray, tuple[int, ...]]:
    """Reduced row-echelon form of ``M`` over F_p, without zero rows."""
    A = np.array(M, dtype=np.int64, copy=True) % p
    if A.ndim != 2:
        raise StructuralError("expected a 2-d matrix")
    nrows, ncols = A.shape
    chunk = max(_CHUNK_FACTOR * ncols, 64)
    if nrows <= chunk:
        R, piv = _rref_block(A, p)
        return R, tuple(piv)
    R = np.zeros((0, ncols), dtype=np.int64)
    piv: list[int] = []
    for start in range(0, nrows, chunk):
        block = np.vstack([R, A[start : start + chunk]])
        R, piv = _rref_block(block, p)
        if len(piv) == ncols:
            break
    return R, tuple(piv)


def rank(M, p: int) -> int:
    M = np.asarray(M)
    if M.size == 0:
        return 0
    return len(rref_matrix(M, p)[1])


def kernel_matrix(M, p: int, ncols: int | None = None) -> np.ndarray:
    """Rows spanning ``{v : M v = 0}``; returned in reduced row-echelon form."""
    M = as_matrix(M, ncols)
    n = M.shape[1]
    R, piv = rref_matrix(M, p) if M.shape[0] else (np.zeros((0, n), dtype=np.int64), ())
    free = [c for c in range(n) if c not in set(piv)]
    K = np.zeros((len(free), n), dtype=np.int64)
    for k, f in enumerate(free):
        K[k, f] = 1
        for i, c in enumerate(piv):
            K[k, c] = (-R[i, f]) % p
    if K.shape[0] == 0:
        return K
    return rref_matrix(K, p)[0]


def matmul(A, B, p: int) -> np.ndarray:
    return (np.asarray(A, dtype=np.int64) @ np.asarray(B, dtype=np.int64)) % p


def solve(A, b, p: int) -> np.ndarray | None:
    """Some ``x`` with ``A x = b`` over F_p, or ``None`` if inconsistent.

    ``b`` may be a vector or a matrix of right-hand sides (one per column); in
    the matrix case ``None`` is returned if any column is inconsistent.
    """
    A = as_matrix(A)
    b = np.asarray(b, dtype=np.int64)
    vec = b.ndim == 1
    B = b.reshape(-1, 1) if vec else b
    m, n = A.shape
    if B.shape[0] != m:
        raise StructuralError("right-hand side has the wrong number of rows")
    if n == 0:
        return None if np.any(B % p) else np.zeros((0,) if vec else (0, B.shape[1]), dtype=np.int64)
    R, piv = rref_matrix(np.hstack([A, B]), p)
    if any(c >= n for c in piv):
        return None
    X = np.zeros((n, B.shape[1]), dtype=np.int64)
    for i, c in enumerate(piv):
        X[c] = R[i, n:]
    return X[:, 0] if vec else X


class Solver:
    """Factorization of a fixed matrix for repeated solves of ``A x = b``."""

    def __init__(self, A, p: int, ncols: int | None = None):
        A = as_matrix(A, ncols)
        self.p = p
        m, n = A.shape
        self.shape = (m, n)
        R, piv = rref_matrix(np.hstack([A % p, np.eye(m, dtype=np.int64)]), p) if m else (
            np.zeros((0, n), dtype=np.int64), ())
        r = sum(1 for c in piv if c < n)
        self.pivots = piv[:r]
        self.E = R[:r, n:]  # rows producing the pivot values
        # rows of R past the rank have zero A-part: they are the consistency conditions
        self.checks = R[r:, n:]

    def solve(self, b) -> np.ndarray | None:
        b = np.asarray(b, dtype=np.int64)
        if self.checks.shape[0] and np.any((self.checks @ b) % self.p):
            return None
        x = np.zeros(self.shape[1], dtype=np.int64)
        if self.pivots:
            x[list(self.pivots)] = (self.E @ b) % self.p
        return x


def independent_rows(M, p: int, target: int | None = None) -> list[int]:
    """Indices of a greedy (first-come) maximal independent set of rows.

    ``target`` is a known rank of ``M``; the scan stops once it is reached.
    """
    M = as_matrix(M)
    n = M.shape[1]
    stop = n if target is None else min(n, target)
    basis = np.zeros((0, n), dtype=np.int64)
    pivots: list[int] = []
    chosen: list[int] = []
    for idx in range(M.shape[0]):
        v = M[idx] % p
        if pivots:
            # rows of ``basis`` are unit vectors on the pivot columns
            v = (v - v[pivots] @ basis) % p
        nz = np.flatnonzero(v)
        if nz.size == 0:
            continue
        c = int(nz[0])
        v = (v * pow(int(v[c]), -1, p)) % p
        # keep the accumulated rows reduced against the new pivot
        if basis.shape[0]:
            col = basis[:, c].copy()
            hit = np.flatnonzero(col)
            if hit.size:
                basis[hit] = (basis[hit] - np.outer(col[hit], v)) % p
        basis = np.vstack([basis, v])
        pivots.append(c)
        chosen.append(idx)
        if len(chosen) == stop:
            break
    return chosen


# ---------------------------------------------------------------------------
# subspaces


class Subspace:
    """A subspace of F_p^basis held as its reduced row-echelon basis."""

    __slots__ = ("basis", "p", "rows", "pivots")

    def __init__(self, basis, rows, p: int, *, _reduced: bool = False):
        self.basis = Basis.of(basis)
        self.p = check_prime(p)
        M = as_matrix(rows, len(self.basis))
        if M.shape[1] != len(self.basis):
            raise StructuralError("row length does not match the ambient basis")
        if _reduced:
            self.rows = M.copy()
            self.pivots = tuple(int(np.flatnonzero(r)[0]) for r in M)
        elif M.shape[0]:
            self.rows, self.pivots = rref_matrix(M, self.p)
        else:
            self.rows, self.pivots = M.reshape(0, len(self.basis)), ()
        self.rows.setflags(write=False)

    @classmethod
    def zero(cls, basis, p: int) -> Subspace:
        basis = Basis.of(basis)
        return cls(basis, np.zeros((0, len(basis)), dtype=np.int64), p)

    @classmethod
    def full(cls, basis, p: int) -> Subspace:
        basis = Basis.of(basis)
        return cls(basis, np.eye(len(basis), dtype=np.int64), p, _reduced=True)

    @property
    def rank(self) -> int:
        return self.rows.shape[0]

    dim = rank

    @property
    def ambient_dim(self) -> int:
        return len(self.basis)

    def vectors(self) -> list[SparseVector]:
        return [SparseVector.from_dense(self.basis, r, self.p) for r in self.rows]

    def reduce(self, v) -> np.ndarray:
        """Residue of a dense vector after elimination against this subspace."""
        v = np.asarray(v, dtype=np.int64) % self.p
        if self.rank == 0:
            return v
        coef = v[list(self.pivots)]
        return (v - coef @ self.rows) % self.p

    def contains(self, v) -> bool:
        if isinstance(v, SparseVector):
            self._check_space(v.basis, v.p)
            v = v.to_dense()
        return not np.any(self.reduce(v))

    __contains__ = contains

    def coordinates(self, v) -> np.ndarray:
        """Coefficients of ``v`` on the echelon rows (``v`` must lie in the subspace)."""
        v = np.asarray(v, dtype=np.int64) % self.p
        return v[list(self.pivots)] if self.rank else np.zeros(0, dtype=np.int64)

    def _check_space(self, basis, p):
        if Basis.of(basis) != self.basis or p != self.p:
            raise StructuralError("subspaces live in different ambient spaces")

    def join(self, other: Subspace) -> Subspace:
        self._check_space(other.basis, other.p)
        return Subspace(self.basis, np.vstack([self.rows, other.rows]), self.p)

    def __le__(self, other: Subspace) -> bool:
        return subspace_leq(self, other).holds

    def __eq__(self, other):
        if not isinstance(other, Subspace):
            return NotImplemented
        return (
            self.basis == other.basis
            and self.p == other.p
            and self.rows.shape == other.rows.shape
            and bool(np.array_equal(self.rows, other.rows))
        )

    def __hash__(self):
        return hash((self.basis, self.p, self.rows.tobytes()))

    def __repr__(self):
        return f"Subspace(dim={self.rank}, ambient={len(self.basis)}, p={self.p})"


def rref(rows: Sequence[SparseVector], basis=None, p: int | None = None) -> Subspace:
    """Row space of ``rows`` in reduced row-echelon form.

    With no rows, ``basis`` and ``p`` must be given to fix the ambient space.
    """
    rows = list(rows)
    if not rows:
        if basis is None or p is None:
            raise StructuralError("empty row list needs an explicit basis and prime")
        return Subspace.zero(basis, p)
    b0, p0 = rows[0].basis, rows[0].p
    if basis is not None and Basis.of(basis) != b0 or p is not None and p != p0:
        raise StructuralError("rows do not live in the declared ambient space")
    for r in rows[1:]:
        if r.basis != b0 or r.p != p0:
            raise StructuralError("rows have mismatched ambient bases")
    return Subspace(b0, np.array([r.to_dense() for r in rows]), p0)


def kernel(columns: Sequence[SparseVector], p: int | None = None, domain=None) -> Subspace:
    """Kernel of the matrix whose ``j``-th column is ``columns[j]``.

    The kernel lives in F_p^domain, one coordinate per column; ``domain``
    defaults to ``range(len(columns))``.
    """
    columns = list(columns)
    domain = Basis.of(domain if domain is not None else range(len(columns)))
    if len(domain) != len(columns):
        raise StructuralError("domain basis size differs from the column count")
    if not columns:
        if p is None:
            raise StructuralError("empty matrix needs an explicit prime")
        return Subspace.zero(domain, p)
    cod, p0 = columns[0].basis, columns[0].p
    if p is not None and p != p0:
        raise StructuralError("prime mismatch")
    for c in columns[1:]:
        if c.basis != cod or c.p != p0:
            raise StructuralError("columns have mismatched bases")
    M = np.array([c.to_dense() for c in columns], dtype=np.int64).T.reshape(len(cod), len(columns))
    return Subspace(domain, kernel_matrix(M, p0, len(columns)), p0, _reduced=True)


class Containment(NamedTuple):
    """Outcome of :func:`subspace_leq`; truthy iff containment holds."""

    holds: bool
    witness: SparseVector | None = None

    def __bool__(self):
        return self.holds


def subspace_leq(A: Subspace, B: Subspace) -> Containment:
    """Decide ``A <= B``; on failure return a basis row of ``A`` outside ``B``."""
    if A.basis != B.basis or A.p != B.p:
        raise StructuralError("subspaces live in different ambient spaces")
    for row in A.rows:
        if np.any(B.reduce(row)):
            return Containment(False, SparseVector.from_dense(A.basis, row, A.p))
    return Containment(True, None)
