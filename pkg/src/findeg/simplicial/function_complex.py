"""Degree-0 and degree-1 pieces of the function complex T^K and its pi_0.

Vertices are the pointed simplicial maps K -> T; edges are the maps out of
the reduced cylinder K smash Delta[1]_+.  For module targets the partition
is recomputed from the mapping chain complex Hom(N~(K), N(T)) and both
answers are compared.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from ..chains import HomComplex
from ..errors import CapExceeded, StructuralError
from ..linalg_gf import Subspace
from ..verdict import Verdict
from .constructions import reduced_cylinder
from .crew import Crew, CrewMap, name_label, normalized_chains

DEFAULT_MAP_CAP = 200_000


def enumerate_maps(K: Crew, T, cap: int = DEFAULT_MAP_CAP) -> list[CrewMap]:
    """All pointed simplicial maps K -> T in canonical order.

    Backtracks over the nondegenerate simplices of K by dimension; the faces
    of a simplex are already mapped when it is reached, so its image ranges
    over the target simplices with exactly those faces.
    """
    gens = _search_order(K)
    images = {K.basepoint: T.base_elem(0)}
    out: list[CrewMap] = []
    verts = None

    def options(q, y):
        nonlocal verts
        if q == 0:
            if verts is None:
                verts = list(T.vertices())
            return verts
        faces = tuple(T.degen(images[f.base], f.op) for f in K.faces[y])
        return T.candidates(q, faces)

    def search(i: int):
        if i == len(gens):
            out.append(CrewMap(K, T, dict(images), check=False))
            if len(out) > cap:
                raise CapExceeded("maps in the function complex", cap, len(out))
            return
        q, y = gens[i]
        for x in options(q, y):
            images[y] = x
            search(i + 1)
        images.pop(y, None)

    search(0)
    out.sort(key=CrewMap.key)
    return out


def _search_order(K: Crew) -> list[tuple[int, object]]:
    """Generators with each simplex placed right after its last face.

    Constraints then fire as early as possible, which keeps the backtracking
    tree narrow compared with a plain dimension-by-dimension order.
    """
    seen = {K.basepoint}
    order = []

    def visit(q, y):
        if y in seen:
            return
        seen.add(y)
        if q:
            for f in K.faces[y]:
                visit(K.dim_of[f.base], f.base)
        order.append((q, y))

    for q in range(K.dim, -1, -1):
        for y in K.levels[q]:
            visit(q, y)
    return order


class _UnionFind:
    def __init__(self, n: int):
        self.parent = list(range(n))

    def find(self, i: int) -> int:
        while self.parent[i] != i:
            self.parent[i] = self.parent[self.parent[i]]
            i = self.parent[i]
        return i

    def union(self, i: int, j: int):
        a, b = self.find(i), self.find(j)
        if a != b:
            self.parent[max(a, b)] = min(a, b)


@dataclass
class FunctionComplexSlice:
    source: Crew
    target: object
    vertices: list[CrewMap]
    edges: list[tuple[int, int]] = field(default_factory=list)
    homotopy_count: int = 0

    def __post_init__(self):
        self._index = {b.key(): i for i, b in enumerate(self.vertices)}
        if len(self._index) != len(self.vertices):
            raise StructuralError("duplicate vertices in the function complex")

    @property
    def p(self) -> int | None:
        return getattr(self.target, "p", None) if getattr(self.target, "is_module", False) else None

    def index(self, b: CrewMap) -> int:
        return self._index[b.key()]

    def name(self, i: int) -> str:
        return f"b{i}"


def function_slice(K: Crew, T, cap: int = DEFAULT_MAP_CAP) -> FunctionComplexSlice:
    """Vertices and homotopy edges of T^K."""
    vertices = enumerate_maps(K, T, cap)
    fc = FunctionComplexSlice(K, T, vertices)
    cyl = reduced_cylinder(K)
    ends = (cyl.end(0), cyl.end(1))
    edges = set()
    homs = enumerate_maps(cyl, T, cap)
    for h in homs:
        a, b = (fc.index(h.compose_after(e)) for e in ends)
        if a != b:
            edges.add((min(a, b), max(a, b)))
    fc.edges = sorted(edges)
    fc.homotopy_count = len(homs)
    return fc


@dataclass
class Pi0:
    slice: FunctionComplexSlice
    class_of: list[int]
    classes: list[list[int]]
    cross_check: Verdict | None = None

    @property
    def representatives(self) -> list[int]:
        return [c[0] for c in self.classes]

    def __len__(self):
        return len(self.classes)

    def rep_names(self) -> list[str]:
        return [self.slice.name(i) for i in self.representatives]

    def class_index(self, name: str) -> int:
        """Class of a vertex given by its name ``b{i}``."""
        try:
            i = int(name[1:]) if name.startswith("b") else -1
        except ValueError:
            i = -1
        if not 0 <= i < len(self.class_of):
            raise KeyError(name)
        return self.class_of[i]

    def add_table(self) -> list[list[int]] | None:
        """Sum of classes for module targets (pointwise addition of maps)."""
        fc = self.slice
        T = fc.target
        if not getattr(T, "is_module", False):
            return None
        reps = [fc.vertices[i] for i in self.representatives]
        table = []
        for a in reps:
            row = []
            for b in reps:
                s = CrewMap(fc.source, T, {y: T.add(a.images[y], b.images[y]) for y in a.images}, check=False)
                row.append(self.class_of[fc.index(s)])
            table.append(row)
        return table

    def zero_class(self) -> int:
        fc = self.slice
        const = CrewMap(fc.source, fc.target,
                        {y: fc.target.base_elem(q) for q, lv in enumerate(fc.source.levels) for y in lv},
                        check=False)
        return self.class_of[fc.index(const)]

    def summary(self) -> dict:
        out = {
            "maps": len(self.slice.vertices),
            "classes": len(self.classes),
            "representatives": self.rep_names(),
            "homotopies": self.slice.homotopy_count,
        }
        if self.slice.p is not None:
            p = self.slice.p
            out["module"] = {"p": p, "dim": round(math.log(len(self.classes), p)), "zero": self.rep_names()[self.zero_class()]}
        else:
            out["relation"] = "edge-quotient"
        if self.cross_check is not None:
            out["cross_check"] = self.cross_check.holds
        return out


def _partition(labels: list) -> tuple[list[int], list[list[int]]]:
    """Classes in order of first occurrence, given a class label per vertex."""
    first: dict = {}
    class_of = []
    classes: list[list[int]] = []
    for i, lab in enumerate(labels):
        c = first.get(lab)
        if c is None:
            c = first[lab] = len(classes)
            classes.append([])
        classes[c].append(i)
        class_of.append(c)
    return class_of, classes


def chain_map_vector(b: CrewMap, H: HomComplex, A_labels: dict) -> np.ndarray:
    """b as a degree-0 element of Hom(N~(K), N(T)).

    The normalized quotient of level q is the identity summand of Gamma(C),
    so column y of the component in degree q is that summand of b(y).
    """
    T = b.target
    fam = {}
    for q, names in A_labels.items():
        cols = T.identity_slice(q) if q <= T.C.top else []
        M = np.zeros((len(cols), len(names)), dtype=np.int64)
        for j, y in enumerate(names):
            vec = b.images[y].vec
            M[:, j] = [vec[c] for c in cols]
        fam[q] = M
    return H.flatten(0, fam)


def chain_level_classes(fc: FunctionComplexSlice) -> tuple[list, dict]:
    """Class labels of the vertices computed in Hom(N~(K), C) with C's signed differential."""
    K, T = fc.source, fc.target
    A = normalized_chains(K, T.p, reduced=True)
    H = HomComplex(A, T.C.signed())
    Z = Subspace(range(H.size(0)), H.chain_maps(), T.p)
    B = Subspace(range(H.size(0)), H.null_homotopic(), T.p)
    labels = []
    outside = 0
    for b in fc.vertices:
        v = chain_map_vector(b, H, A.labels)
        if not Z.contains(v):
            outside += 1
        labels.append(tuple(int(x) for x in B.reduce(v)))
    info = {"dim_Z": Z.rank, "dim_B": B.rank, "not_chain_maps": outside}
    return labels, info


def pi0(K: Crew, T, cap: int = DEFAULT_MAP_CAP, cross_check: bool = True) -> Pi0:
    fc = function_slice(K, T, cap)
    uf = _UnionFind(len(fc.vertices))
    for a, b in fc.edges:
        uf.union(a, b)
    class_of, classes = _partition([uf.find(i) for i in range(len(fc.vertices))])
    result = Pi0(fc, class_of, classes)
    if cross_check and getattr(T, "is_module", False):
        labels, info = chain_level_classes(fc)
        chain_of, chain_classes = _partition(labels)
        p = T.p
        detail = dict(info)
        detail.update({
            "maps": len(fc.vertices),
            "classes": len(classes),
            "chain_classes": len(chain_classes),
            "expected_maps": p ** info["dim_Z"],
            "expected_classes": p ** (info["dim_Z"] - info["dim_B"]),
        })
        holds = (chain_of == class_of and info["not_chain_maps"] == 0
                 and len(fc.vertices) == detail["expected_maps"]
                 and len(chain_classes) == detail["expected_classes"])
        witness = None
        if chain_of != class_of:
            witness = next(fc.name(i) for i in range(len(class_of)) if chain_of[i] != class_of[i])
        result.cross_check = Verdict(holds, detail, witness)
    return result


def describe_map(b: CrewMap) -> str:
    return b.label()


__all__ = [
    "DEFAULT_MAP_CAP", "FunctionComplexSlice", "Pi0", "chain_level_classes", "describe_map",
    "enumerate_maps", "function_slice", "name_label", "pi0",
]
