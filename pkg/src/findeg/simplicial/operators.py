"""Monotone maps between ordinals [m] = {0 < 1 < ... < m}.

A map [m] -> [n] is a tuple of length m+1 of nondecreasing values; the
codomain is implicit.  Surjections are the degeneracy operators and are also
encoded by their *word*: the set of positions j with s(j) == s(j+1).  The word
{i_1 < ... < i_k} corresponds to the iterated degeneracy s_{i_k} ... s_{i_1}.
"""

from __future__ import annotations

from functools import lru_cache
from itertools import combinations

Op = tuple


@lru_cache(maxsize=None)
def identity(n: int) -> Op:
    return tuple(range(n + 1))


@lru_cache(maxsize=None)
def coface(n: int, i: int) -> Op:
    """delta_i: [n-1] -> [n], skipping i."""
    return tuple(t if t < i else t + 1 for t in range(n))


@lru_cache(maxsize=None)
def codegeneracy(n: int, j: int) -> Op:
    """sigma_j: [n+1] -> [n], hitting j twice."""
    return tuple(t if t <= j else t - 1 for t in range(n + 2))


@lru_cache(maxsize=None)
def constant(m: int) -> Op:
    return (0,) * (m + 1)


def compose(a: Op, b: Op) -> Op:
    """a . b (apply b first)."""
    return tuple(a[t] for t in b)


def is_surjection(s: Op) -> bool:
    return s[0] == 0 and all(s[t + 1] - s[t] in (0, 1) for t in range(len(s) - 1))


def is_identity(s: Op) -> bool:
    return s[-1] == len(s) - 1 and s[0] == 0


def word(s: Op) -> frozenset:
    """Degeneracy word of a surjection."""
    return frozenset(t for t in range(len(s) - 1) if s[t] == s[t + 1])


def word_mask(s: Op) -> int:
    m = 0
    for t in range(len(s) - 1):
        if s[t] == s[t + 1]:
            m |= 1 << t
    return m


@lru_cache(maxsize=None)
def from_word(q: int, w: frozenset | tuple) -> Op:
    """The surjection out of [q] with degeneracy word ``w``."""
    out, v = [0], 0
    for t in range(q):
        if t not in w:
            v += 1
        out.append(v)
    return tuple(out)


@lru_cache(maxsize=None)
def surjections(q: int, k: int) -> tuple[Op, ...]:
    """All surjections [q] -> [k], in lexicographic order of their words."""
    if k > q or k < 0:
        return ()
    return tuple(from_word(q, frozenset(w)) for w in combinations(range(q), q - k))


@lru_cache(maxsize=None)
def factor(a: Op) -> tuple[Op, Op]:
    """Epi-mono factorization a = mono . epi of a monotone map."""
    image = sorted(set(a))
    pos = {v: i for i, v in enumerate(image)}
    epi = tuple(pos[v] for v in a)
    mono = tuple(image)
    return mono, epi


def missing(mono: Op, n: int) -> int | None:
    """Largest index of [n] not hit by an injection, or None if it is onto."""
    hit = set(mono)
    for i in range(n, -1, -1):
        if i not in hit:
            return i
    return None


@lru_cache(maxsize=None)
def peel(mono: Op, i: int) -> Op:
    """mono' with mono = delta_i . mono', for i outside the image."""
    return tuple(v if v < i else v - 1 for v in mono)


@lru_cache(maxsize=None)
def section(s: Op) -> Op:
    """The injection picking the first point of each fibre of a surjection."""
    out, last = [], -1
    for t, v in enumerate(s):
        if v != last:
            out.append(t)
            last = v
    return tuple(out)


def word_label(s: Op) -> str:
    """``s2s0`` style prefix for a degeneracy, empty for an identity."""
    return "".join(f"s{j}" for j in sorted(word(s), reverse=True))
