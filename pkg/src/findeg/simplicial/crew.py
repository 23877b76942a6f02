"""Pointed finite simplicial sets ("crews") and their maps.

A crew is presented by its nondegenerate simplices.  Every simplex, degenerate
or not, is a :class:`Simp` in Eilenberg-Zilber form ``op^* base`` with ``op`` a
surjection ``[q] -> [k]`` and ``base`` a nondegenerate k-simplex.  The faces of
nondegenerate simplices are stored; everything else follows from the
factorization of monotone maps.
"""

from __future__ import annotations

from collections.abc import Hashable, Mapping, Sequence
from typing import NamedTuple

import numpy as np

from ..errors import CapExceeded, StructuralError, ValidationError
from . import operators as ops


class Simp(NamedTuple):
    op: tuple
    base: Hashable

    @property
    def dim(self) -> int:
        return len(self.op) - 1

    @property
    def nondegenerate(self) -> bool:
        return ops.is_identity(self.op)


def name_label(name) -> str:
    """Display string of a simplex name; tuples render as ``(a, s0(e))``."""
    if isinstance(name, Simp):
        inner = name_label(name.base)
        return inner if name.nondegenerate else f"{ops.word_label(name.op)}({inner})"
    if isinstance(name, tuple):
        return "(" + ", ".join(name_label(x) for x in name) + ")"
    return str(name)


class Crew:
    """A pointed simplicial set with finitely many nondegenerate simplices.

    ``levels[q]`` lists the nondegenerate q-simplices.  ``faces[y][i]`` is
    ``d_i y``, either a :class:`Simp` or a pair ``(word, target)`` with
    ``word`` a strictly increasing list of degeneracy indices.
    """

    is_module = False

    def __init__(self, levels: Sequence[Sequence[Hashable]], faces: Mapping, basepoint,
                 name: str | None = None, check: bool = True):
        self.levels = tuple(tuple(lv) for lv in levels)
        self.name = name
        self.basepoint = basepoint
        self.dim_of: dict = {}
        for q, lv in enumerate(self.levels):
            for y in lv:
                if y in self.dim_of:
                    raise ValidationError(f"simplex {name_label(y)} listed twice")
                self.dim_of[y] = q
        self.malformed: list[tuple] = []
        self.faces: dict = {}
        for y, q in self.dim_of.items():
            self.faces[y] = self._parse_faces(y, q, faces.get(y, ()) if q else ())
        while self.levels and not self.levels[-1]:
            self.levels = self.levels[:-1]
        self._restrict_cache: dict = {}
        self._level_cache: dict = {}
        self._cand_cache: dict = {}
        if check:
            bad = validate(self)
            if bad:
                raise ValidationError(f"crew {self!r} violates: {bad[:5]}")

    def _parse_faces(self, y, q, raw):
        if q == 0:
            return ()
        raw = list(raw)
        if len(raw) != q + 1:
            self.malformed.append((name_label(y), None, None))
            return None
        out = []
        for i, f in enumerate(raw):
            s = self._parse_face(q, f)
            if s is None:
                self.malformed.append((name_label(y), i, None))
                return None
            out.append(s)
        return tuple(out)

    def _parse_face(self, q, f):
        if isinstance(f, Simp):
            if len(f.op) != q or not ops.is_surjection(f.op):
                return None
            if self.dim_of.get(f.base) != f.op[-1]:
                return None
            return f
        try:
            word, target = f
            word = [int(j) for j in word]
        except (TypeError, ValueError):
            return None
        if target not in self.dim_of:
            return None
        if any(b <= a for a, b in zip(word, word[1:])) or any(not 0 <= j < q - 1 for j in word):
            return None
        if q - 1 - len(word) != self.dim_of[target]:
            return None
        return Simp(ops.from_word(q - 1, frozenset(word)), target)

    # basic structure

    @property
    def dim(self) -> int:
        return len(self.levels) - 1

    def nondeg(self, q: int) -> tuple:
        return self.levels[q] if 0 <= q < len(self.levels) else ()

    def simplex(self, y) -> Simp:
        return Simp(ops.identity(self.dim_of[y]), y)

    def counts(self) -> tuple[int, ...]:
        return tuple(len(lv) for lv in self.levels)

    def __repr__(self):
        return self.name or f"Crew{self.counts()}"

    # simplicial operators

    def elem_dim(self, x: Simp) -> int:
        return len(x.op) - 1

    def pullback(self, x: Simp, alpha: tuple) -> Simp:
        """alpha^* x for a monotone alpha: [m] -> [dim x]."""
        mono, epi = ops.factor(ops.compose(x.op, alpha))
        y = self._restrict(x.base, mono)
        return Simp(ops.compose(y.op, epi), y.base)

    def _restrict(self, name, mono: tuple) -> Simp:
        key = (name, mono)
        hit = self._restrict_cache.get(key)
        if hit is not None:
            return hit
        q = self.dim_of[name]
        if len(mono) == q + 1:
            out = Simp(mono, name)  # mono is the identity
        else:
            i = ops.missing(mono, q)
            out = self.pullback(self.faces[name][i], ops.peel(mono, i))
        self._restrict_cache[key] = out
        return out

    def face(self, x: Simp, i: int) -> Simp:
        return self.pullback(x, ops.coface(len(x.op) - 1, i))

    def degen(self, x: Simp, s: tuple) -> Simp:
        """s^* x for a surjection s onto [dim x]."""
        return Simp(ops.compose(x.op, s), x.base)

    def base_elem(self, q: int) -> Simp:
        return Simp(ops.constant(q), self.basepoint)

    def degeneracy_mask(self, x: Simp) -> int:
        return ops.word_mask(x.op)

    def level(self, q: int) -> tuple[Simp, ...]:
        """All q-simplices, degenerate ones included."""
        hit = self._level_cache.get(q)
        if hit is None:
            hit = tuple(Simp(s, y) for k in range(min(q, self.dim) + 1)
                        for s in ops.surjections(q, k) for y in self.nondeg(k))
            self._level_cache[q] = hit
        return hit

    def vertices(self) -> tuple[Simp, ...]:
        return self.level(0)

    def candidates(self, q: int, faces: tuple) -> list[Simp]:
        """q-simplices whose faces d_0..d_q are ``faces``."""
        index = self._cand_cache.get(q)
        if index is None:
            index = {}
            for x in self.level(q):
                index.setdefault(tuple(self.face(x, i) for i in range(q + 1)), []).append(x)
            self._cand_cache[q] = index
        return index.get(faces, [])

    def sort_key(self, x: Simp):
        return (x.op, x.base != self.basepoint, name_label(x.base))

    def elem_label(self, x: Simp) -> str:
        return name_label(x)

    # serialization

    def to_json(self) -> dict:
        simplices = {}
        for q, lv in enumerate(self.levels):
            entries = []
            for y in lv:
                faces = [] if q == 0 else [
                    {"word": sorted(ops.word(f.op)), "target": name_label(f.base)} for f in self.faces[y]
                ]
                entries.append({"name": name_label(y), "faces": faces})
            simplices[str(q)] = entries
        return {"basepoint": name_label(self.basepoint), "simplices": simplices}

    @classmethod
    def from_json(cls, obj: Mapping, name: str | None = None, check: bool = True) -> Crew:
        try:
            raw = {int(q): lv for q, lv in obj["simplices"].items()}
            basepoint = obj["basepoint"]
        except (KeyError, AttributeError, TypeError, ValueError) as exc:
            raise ValidationError(f"malformed crew: {exc}") from None
        top = max(raw, default=0)
        levels, faces = [], {}
        for q in range(top + 1):
            names = []
            for entry in raw.get(q, []):
                nm = entry["name"]
                names.append(nm)
                faces[nm] = [(f.get("word", []), f["target"]) for f in entry.get("faces", [])]
            levels.append(names)
        if not levels or basepoint not in levels[0]:
            raise ValidationError(f"basepoint {basepoint!r} is not a listed vertex")
        return cls(levels, faces, basepoint, name=name, check=check)


def validate(K: Crew) -> list[tuple]:
    """Violations as ``(simplex, i, j)`` triples; an empty list means the crew is valid.

    Malformed face encodings are reported as ``(simplex, i, None)``; a failed
    identity d_i d_j = d_{j-1} d_i (i < j) as ``(simplex, i, j)``.
    """
    bad = list(K.malformed)
    if K.basepoint not in K.nondeg(0):
        bad.append(("basepoint", None, None))
    if bad:
        return bad
    for q in range(2, K.dim + 1):
        for y in K.nondeg(q):
            fs = K.faces[y]
            for j in range(1, q + 1):
                for i in range(j):
                    try:
                        ok = K.face(fs[j], i) == K.face(fs[i], j - 1)
                    except (KeyError, IndexError, TypeError):
                        ok = False
                    if not ok:
                        bad.append((name_label(y), i, j))
    return bad


class CrewMap:
    """A basepoint-preserving simplicial map from a crew to a crew or module.

    ``images[y]`` is the image of the nondegenerate simplex ``y``; images of
    degenerate simplices follow by naturality.
    """

    def __init__(self, source: Crew, target, images: Mapping, check: bool = True):
        self.source = source
        self.target = target
        self.images = dict(images)
        if check:
            problems = self.violations()
            if problems:
                raise ValidationError(f"not a simplicial map: {problems[:5]}")

    def __call__(self, x: Simp):
        return self.target.degen(self.images[x.base], x.op)

    def violations(self) -> list[tuple]:
        S, T = self.source, self.target
        bad = []
        if T.base_elem(0) != self.images.get(S.basepoint):
            bad.append((name_label(S.basepoint), "basepoint"))
        for q, lv in enumerate(S.levels):
            for y in lv:
                img = self.images.get(y)
                if img is None or T.elem_dim(img) != q:
                    bad.append((name_label(y), "dimension"))
                    continue
                if q == 0:
                    continue
                for i, f in enumerate(S.faces[y]):
                    if f.base not in self.images or T.face(img, i) != self(f):
                        bad.append((name_label(y), i))
        return bad

    def key(self) -> tuple:
        T = self.target
        return tuple(T.sort_key(self.images[y]) for lv in self.source.levels for y in lv)

    def compose_after(self, first: CrewMap) -> CrewMap:
        """``self . first``."""
        if first.target is not self.source:
            raise StructuralError("maps are not composable")
        return CrewMap(first.source, self.target, {y: self(img) for y, img in first.images.items()}, check=False)

    def label(self) -> str:
        T = self.target
        parts = [f"{name_label(y)}->{T.elem_label(self.images[y])}"
                 for lv in self.source.levels for y in lv if y != self.source.basepoint]
        return "{" + ", ".join(parts) + "}"

    def __eq__(self, other):
        if not isinstance(other, CrewMap):
            return NotImplemented
        return self.source is other.source and self.target is other.target and self.images == other.images

    def __hash__(self):
        return hash(self.key())

    def __repr__(self):
        return f"CrewMap({self.source!r} -> {self.target!r}, {self.label()})"


def identity_map(K: Crew) -> CrewMap:
    return CrewMap(K, K, {y: K.simplex(y) for lv in K.levels for y in lv}, check=False)


def constant_map(K: Crew, T) -> CrewMap:
    return CrewMap(K, T, {y: T.base_elem(q) for q, lv in enumerate(K.levels) for y in lv}, check=False)


# ---------------------------------------------------------------------------
# normalized chains


def normalized_chains(K: Crew, p: int, up_to: int | None = None, reduced: bool = False):
    """Normalized chains of K over F_p with the nondegenerate simplices as basis.

    Unreduced by default (the basepoint vertex is a generator in degree 0).
    """
    from ..chains import ChainComplex

    top = K.dim if up_to is None else int(up_to)
    if top > K.dim:
        raise ValidationError(f"up_to={top} exceeds dim {K.dim}")
    bases = []
    for q in range(top + 1):
        lv = [y for y in K.nondeg(q) if not (reduced and y == K.basepoint)]
        bases.append(lv)
    index = [{y: i for i, y in enumerate(b)} for b in bases]
    d = {}
    for q in range(1, top + 1):
        M = np.zeros((len(bases[q - 1]), len(bases[q])), dtype=np.int64)
        for col, y in enumerate(bases[q]):
            for i, f in enumerate(K.faces[y]):
                if f.nondegenerate and f.base in index[q - 1]:
                    M[index[q - 1][f.base], col] += (-1) ** i
        d[q] = M % p
    return ChainComplex(p, [len(b) for b in bases], d, labels={q: b for q, b in enumerate(bases)})


def induced_chain_map(f: CrewMap, p: int, up_to: int | None = None, reduced: bool = False):
    """The chain map of normalized chains induced by a map of crews."""
    from ..chains import ComplexMap

    S, T = f.source, f.target
    top = min(S.dim, T.dim) if up_to is None else up_to
    A = normalized_chains(S, p, min(top, S.dim), reduced)
    B = normalized_chains(T, p, min(top, T.dim), reduced)
    comps = {}
    for q in range(A.top + 1):
        M = np.zeros((B.dim(q), A.dim(q)), dtype=np.int64)
        tindex = {y: i for i, y in enumerate(B.labels.get(q, ()))}
        for col, y in enumerate(A.labels.get(q, ())):
            img = f.images[y]
            if img.nondegenerate and img.base in tindex:
                M[tindex[img.base], col] = 1
        comps[q] = M
    return ComplexMap(A, B, comps)


def check_size(what: str, n: int, cap: int):
    if n > cap:
        raise CapExceeded(what, cap, n)
