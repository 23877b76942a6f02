"""Built-in crews: point, spheres, polygon circles, products and powers,
wedges, quotients and reduced cylinders."""

from __future__ import annotations

from collections.abc import Sequence
from functools import reduce
from typing import NamedTuple

from ..errors import StructuralError, ValidationError
from . import operators as ops
from .crew import Crew, CrewMap, Simp, check_size, name_label

DEFAULT_SIMPLEX_CAP = 200_000


def point() -> Crew:
    return Crew([["*"]], {}, "*", name="point", check=False)


def sphere(n: int) -> Crew:
    """Minimal model: the basepoint and one n-simplex with all faces collapsed."""
    n = int(n)
    if n < 1:
        raise ValidationError("sphere needs n >= 1")
    top = f"e{n}"
    levels = [["*"]] + [[] for _ in range(n - 1)] + [[top]]
    faces = {top: [Simp(ops.constant(n - 1), "*")] * (n + 1)}
    return Crew(levels, faces, "*", name=f"sphere:{n}", check=False)


def polygon_circle(m: int) -> Crew:
    """A circle subdivided into m edges v_k -> v_{k+1}; the basepoint is v0."""
    m = int(m)
    if m < 1:
        raise ValidationError("a polygon needs at least one edge")
    if m == 1:
        c = sphere(1)
        c.name = "circle:1"
        return c
    verts = [f"v{k}" for k in range(m)]
    edges = [f"a{k}" for k in range(m)]
    faces = {edges[k]: [Simp((0,), verts[(k + 1) % m]), Simp((0,), verts[k])] for k in range(m)}
    return Crew([verts, edges], faces, "v0", name=f"circle:{m}", check=False)


def standard_simplex(n: int) -> Crew:
    """Delta[n] with vertex 0 as basepoint; simplices named by their vertex tuples."""
    from itertools import combinations

    levels = [[tuple(c) for c in combinations(range(n + 1), q + 1)] for q in range(n + 1)]
    faces = {}
    for q in range(1, n + 1):
        for y in levels[q]:
            faces[y] = [Simp(ops.identity(q - 1), y[:i] + y[i + 1 :]) for i in range(q + 1)]
    return Crew(levels, faces, (0,), name=f"simplex:{n}", check=False)


# ---------------------------------------------------------------------------
# products


def normalize_tuple(xs: tuple) -> Simp:
    """A tuple of q-simplices (one per factor) as a Simp over a nondegenerate tuple."""
    q = len(xs[0].op) - 1
    common = reduce(lambda a, b: a & b, (ops.word_mask(x.op) for x in xs), (1 << q) - 1) if q else 0
    if not common:
        return Simp(ops.identity(q), xs)
    w = frozenset(j for j in range(q) if common >> j & 1)
    s = ops.from_word(q, w)
    sec = ops.section(s)
    return Simp(s, tuple(Simp(ops.compose(x.op, sec), x.base) for x in xs))


def product_simplices(factors: Sequence[Crew], q: int, cap: int = DEFAULT_SIMPLEX_CAP):
    """Nondegenerate q-simplices of the product, as tuples of factor q-simplices.

    Depth-first over factors; a branch is cut once the common degeneracy word
    is too large for the remaining factors to clear.
    """
    r = len(factors)
    choices = [[(ops.word_mask(x.op), x) for x in K.level(q)] for K in factors]
    room = [0] * (r + 1)
    for i in range(r - 1, -1, -1):
        room[i] = room[i + 1] + factors[i].dim
    full = (1 << q) - 1
    out: list[tuple] = []
    stack: list[Simp] = []

    def dfs(i: int, common: int):
        if i == r:
            if common == 0:
                out.append(tuple(stack))
                if len(out) > cap:
                    check_size("product simplices", len(out), cap)
            return
        for m, x in choices[i]:
            c = common & m
            if bin(c).count("1") > room[i + 1]:
                continue
            stack.append(x)
            dfs(i + 1, c)
            stack.pop()

    if q > sum(K.dim for K in factors):
        return []
    dfs(0, full)
    return out


class ProductCrew(Crew):
    """A finite product; nondegenerate simplices are named by tuples of factor simplices."""

    def __init__(self, factors: Sequence[Crew], cap: int = DEFAULT_SIMPLEX_CAP, name: str | None = None):
        self.factors = tuple(factors)
        top = sum(K.dim for K in self.factors)
        levels, faces, total = [], {}, 0
        for q in range(top + 1):
            lv = product_simplices(self.factors, q, cap)
            total += len(lv)
            check_size("product simplices", total, cap)
            levels.append(lv)
            if q:
                for xs in lv:
                    faces[xs] = [normalize_tuple(tuple(K.face(x, i) for K, x in zip(self.factors, xs)))
                                 for i in range(q + 1)]
        base = tuple(K.base_elem(0) for K in self.factors)
        super().__init__(levels, faces, base, name=name, check=False)

    def projection(self, i: int) -> CrewMap:
        K = self.factors[i]
        return CrewMap(self, K, {xs: xs[i] for lv in self.levels for xs in lv}, check=False)


def product(K: Crew, L: Crew, cap: int = DEFAULT_SIMPLEX_CAP) -> ProductCrew:
    return ProductCrew([K, L], cap, name=f"({K!r} x {L!r})")


def power(K: Crew, r: int, cap: int = DEFAULT_SIMPLEX_CAP) -> Crew:
    """K^r; K^0 is the one-point crew (basepoint named ``()``) and K^1 is K."""
    r = int(r)
    if r < 0:
        raise ValidationError("power needs r >= 0")
    if r == 0:
        return Crew([[()]], {}, (), name="point", check=False)
    if r == 1:
        return K
    return ProductCrew([K] * r, cap, name=f"power:({K!r},{r})")


def power_simplices(K: Crew, r: int, q: int, cap: int = DEFAULT_SIMPLEX_CAP) -> list[tuple]:
    """Nondegenerate q-simplices of K^r as r-tuples of q-simplices of K."""
    if r == 0:
        return [()] if q == 0 else []
    return product_simplices([K] * r, q, cap)


# ---------------------------------------------------------------------------
# wedges


class Tag(NamedTuple):
    summand: int
    name: object

    def __str__(self):
        return f"in{self.summand}({name_label(self.name)})"


class WedgeCrew(Crew):
    def __init__(self, summands: Sequence[Crew], name: str | None = None):
        self.summands = tuple(summands)
        if not self.summands:
            raise ValidationError("a wedge needs at least one summand")
        top = max(K.dim for K in self.summands)
        levels = [["*"]] + [[] for _ in range(top)]
        faces = {}
        for k, K in enumerate(self.summands):
            for q, lv in enumerate(K.levels):
                for y in lv:
                    if y == K.basepoint:
                        continue
                    levels[q].append(Tag(k, y))
                    if q:
                        faces[Tag(k, y)] = [self._tag(k, K, f) for f in K.faces[y]]
        super().__init__(levels, faces, "*", name=name, check=False)

    @staticmethod
    def _tag(k, K, f: Simp) -> Simp:
        return Simp(f.op, "*" if f.base == K.basepoint else Tag(k, f.base))

    def inclusion(self, k: int) -> CrewMap:
        K = self.summands[k]
        return CrewMap(K, self, {y: self._tag(k, K, K.simplex(y)) for lv in K.levels for y in lv}, check=False)


def wedge(summands: Sequence[Crew]) -> WedgeCrew:
    summands = list(summands)
    return WedgeCrew(summands, name="wedge:(" + ",".join(repr(K) for K in summands) + ")")


def me_operator(W: WedgeCrew, e: Sequence[int]) -> CrewMap:
    """Identity on summands with e_k = 1, constant on the others."""
    e = [int(x) for x in e]
    if len(e) != len(W.summands):
        raise StructuralError(f"e has length {len(e)} but the wedge has {len(W.summands)} summands")
    images = {}
    for q, lv in enumerate(W.levels):
        for y in lv:
            keep = y == W.basepoint or e[y.summand]
            images[y] = W.simplex(y) if keep else W.base_elem(q)
    return CrewMap(W, W, images, check=False)


# ---------------------------------------------------------------------------
# quotients and cylinders


class QuotientCrew(Crew):
    """K with a subcomplex collapsed onto the basepoint."""

    def __init__(self, K: Crew, collapsed: set, basepoint=None, name: str | None = None):
        self.parent = K
        self.collapsed = set(collapsed)
        bp = basepoint if basepoint is not None else K.basepoint
        self.collapsed.add(K.basepoint)
        levels = [[bp]] + [[] for _ in range(K.dim)]
        faces = {}
        for q, lv in enumerate(K.levels):
            for y in lv:
                if y in self.collapsed:
                    continue
                levels[q].append(y)
                if q:
                    faces[y] = [self._image(f, bp) for f in K.faces[y]]
        super().__init__(levels, faces, bp, name=name, check=False)

    def _image(self, x: Simp, bp) -> Simp:
        if x.base in self.collapsed:
            return Simp(ops.constant(len(x.op) - 1), bp)
        return x

    def quotient_map(self) -> CrewMap:
        K = self.parent
        return CrewMap(K, self, {y: self._image(K.simplex(y), self.basepoint) for lv in K.levels for y in lv},
                       check=False)


class CylinderCrew(QuotientCrew):
    """K smash Delta[1]_+ = (K x Delta[1]) / (* x Delta[1])."""

    def __init__(self, K: Crew):
        self.base_crew = K
        I = standard_simplex(1)
        P = ProductCrew([K, I])
        collapsed = {xs for lv in P.levels for xs in lv if xs[0].base == K.basepoint}
        super().__init__(P, collapsed, basepoint=P.basepoint, name=f"cyl:{K!r}")

    def end(self, eps: int) -> CrewMap:
        """The inclusion y -> (y, eps) of K at the end eps in {0, 1}."""
        K = self.base_crew
        v = (eps,)
        images = {}
        for q, lv in enumerate(K.levels):
            for y in lv:
                if y == K.basepoint:
                    images[y] = self.base_elem(0)
                else:
                    images[y] = Simp(ops.identity(q), (K.simplex(y), Simp(ops.constant(q), v)))
        return CrewMap(K, self, images, check=False)

    def collapse(self) -> CrewMap:
        """The projection back to K."""
        K = self.base_crew
        images = {self.basepoint: K.base_elem(0)}
        for lv in self.levels:
            for xs in lv:
                if xs != self.basepoint:
                    images[xs] = xs[0]
        return CrewMap(self, K, images, check=False)


def reduced_cylinder(K: Crew) -> CylinderCrew:
    return CylinderCrew(K)
