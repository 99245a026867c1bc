"""Symmetric-group combinatorics: permutations in one-line notation, cycle
types, the transposition metric and its geodesics, the Moebius function, and
the block permutations that index the channel-moment sums.

Composition convention, fixed for the whole package: ``compose(a, b)`` is the
map ``x -> a(b(x))``, i.e. ``b`` acts first.  One pinned test guards this.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Iterator

import numpy as np

#: Largest group degree `m` that `all_permutations` enumerates by default.
#: S_8 has 40320 elements; sums over pairs grow with the square of this.
DEFAULT_ENUMERATION_CAP = 8


@dataclass(frozen=True)
class Permutation:
    """A permutation of ``[0, m)`` stored in one-line notation.

    ``images[x]`` is the image of ``x``.

    >>> s = Permutation((1, 0, 2))
    >>> s(0), s(1), s(2)
    (1, 0, 2)
    >>> s.cycle_type().parts
    (2, 1)
    """

    images: tuple[int, ...]

    def __post_init__(self):
        if sorted(self.images) != list(range(len(self.images))):
            raise ValueError(f"not a bijection on [0, {len(self.images)}): {self.images!r}")

    @property
    def degree(self) -> int:
        return len(self.images)

    def __call__(self, x: int) -> int:
        return self.images[x]

    def __mul__(self, other: "Permutation") -> "Permutation":
        return compose(self, other)

    def inverse(self) -> "Permutation":
        inv = [0] * len(self.images)
        for x, y in enumerate(self.images):
            inv[y] = x
        return Permutation(tuple(inv))

    def cycles(self) -> list[tuple[int, ...]]:
        """Disjoint cycles, each starting at its smallest element."""
        seen = [False] * len(self.images)
        out = []
        for start in range(len(self.images)):
            if seen[start]:
                continue
            cyc = []
            x = start
            while not seen[x]:
                seen[x] = True
                cyc.append(x)
                x = self.images[x]
            out.append(tuple(cyc))
        return out

    @property
    def num_cycles(self) -> int:
        return len(self.cycles())

    def cycle_type(self) -> "CycleType":
        return CycleType(tuple(sorted((len(c) for c in self.cycles()), reverse=True)))

    def length(self) -> int:
        """Minimal number of transpositions multiplying to this permutation.

        Equals ``degree - num_cycles``.
        """
        return self.degree - self.num_cycles

    def is_identity(self) -> bool:
        return all(y == x for x, y in enumerate(self.images))

    def __repr__(self) -> str:
        return f"Permutation({self.images!r})"


@dataclass(frozen=True)
class CycleType:
    """Integer partition recording the cycle lengths of a conjugacy class."""

    parts: tuple[int, ...]

    def __post_init__(self):
        if any(p < 1 for p in self.parts):
            raise ValueError(f"parts must be positive: {self.parts!r}")
        if list(self.parts) != sorted(self.parts, reverse=True):
            raise ValueError(f"parts must be non-increasing: {self.parts!r}")

    @property
    def degree(self) -> int:
        return sum(self.parts)

    @property
    def num_cycles(self) -> int:
        return len(self.parts)

    @property
    def length(self) -> int:
        return self.degree - self.num_cycles

    def __iter__(self):
        return iter(self.parts)

    def __str__(self) -> str:
        return "+".join(str(p) for p in self.parts)


@dataclass(frozen=True)
class LabeledIndex:
    """Bijection between array positions ``[0, 2p)`` and channel-leg labels.

    The label set is ``{p^B, ..., 1^B, 1^T, ..., p^T}`` laid out in that order:
    position ``j < p`` holds ``(p-j)^B`` and position ``j >= p`` holds
    ``(j-p+1)^T``.  Every module uses this one convention.
    """

    position: int
    index: int
    block: str

    @classmethod
    def from_position(cls, position: int, p: int) -> "LabeledIndex":
        if not 0 <= position < 2 * p:
            raise ValueError(f"position {position} outside [0, {2 * p})")
        if position < p:
            return cls(position, p - position, "B")
        return cls(position, position - p + 1, "T")

    @classmethod
    def from_label(cls, index: int, block: str, p: int) -> "LabeledIndex":
        if not 1 <= index <= p:
            raise ValueError(f"label index {index} outside [1, {p}]")
        if block == "B":
            return cls(p - index, index, "B")
        if block == "T":
            return cls(p + index - 1, index, "T")
        raise ValueError(f"block must be 'T' or 'B', got {block!r}")


def identity(m: int) -> Permutation:
    return Permutation(tuple(range(m)))


def transposition(m: int, i: int, j: int) -> Permutation:
    if not (0 <= i < m and 0 <= j < m and i != j):
        raise ValueError(f"bad transposition ({i} {j}) in S_{m}")
    images = list(range(m))
    images[i], images[j] = images[j], images[i]
    return Permutation(tuple(images))


def from_cycles(m: int, cycles: list[tuple[int, ...]]) -> Permutation:
    """Build a permutation of [0, m) from disjoint cycles ``(a1 a2 ... ak)``,
    each mapping ``a1 -> a2 -> ... -> ak -> a1``."""
    images = list(range(m))
    for cyc in cycles:
        for pos, x in enumerate(cyc):
            images[x] = cyc[(pos + 1) % len(cyc)]
    return Permutation(tuple(images))


def compose(a: Permutation, b: Permutation) -> Permutation:
    """The composite ``x -> a(b(x))``; ``b`` acts first."""
    if a.degree != b.degree:
        raise ValueError(f"degree mismatch: {a.degree} vs {b.degree}")
    return Permutation(tuple(a.images[y] for y in b.images))


def cycle_type(a: Permutation) -> CycleType:
    return a.cycle_type()


def length(a: Permutation) -> int:
    return a.length()


def distance(a: Permutation, b: Permutation) -> int:
    """Transposition metric ``d(a, b) = |a^{-1} b|``."""
    return compose(a.inverse(), b).length()


def is_geodesic(a: Permutation, b: Permutation, c: Permutation) -> bool:
    """True iff ``b`` lies on a geodesic from ``a`` to ``c``:
    ``|a^{-1}b| + |b^{-1}c| == |a^{-1}c|``."""
    if not a.degree == b.degree == c.degree:
        raise ValueError("degree mismatch")
    return distance(a, b) + distance(b, c) == distance(a, c)


def catalan(i: int) -> int:
    """Catalan number ``(2i)! / ((i+1)! i!)``."""
    return math.comb(2 * i, i) // (i + 1)


def mobius(a: Permutation) -> int:
    """Moebius function: product over cycles of length d of
    ``(-1)^(d-1) * catalan(d-1)``.  Depends only on the cycle type."""
    out = 1
    for cyc in a.cycles():
        d = len(cyc)
        out *= (-1) ** (d - 1) * catalan(d - 1)
    return out


def mobius_of_type(ct: CycleType) -> int:
    out = 1
    for d in ct.parts:
        out *= (-1) ** (d - 1) * catalan(d - 1)
    return out


def _tpos(i: int, p: int) -> int:
    return p + i - 1


def _bpos(i: int, p: int) -> int:
    return p - i


def make_gamma_delta(p: int) -> tuple[Permutation, Permutation, Permutation]:
    """The block permutations (gamma, delta, gamma_tilde) of S_{2p}.

    Under the LabeledIndex layout:

    * ``gamma`` maps ``i^T -> (i-1)^T`` and ``i^B -> (i+1)^B`` with the index
      arithmetic cyclic inside each block, so it is a product of two p-cycles.
    * ``delta`` swaps ``i^T <-> i^B``: an involution made of p transpositions.
    * ``gamma_tilde`` is the single 2p-cycle
      ``(p^T ... 2^T 1^T 1^B 2^B ... p^B)``.

    They satisfy ``gamma = compose(transposition(1^B, p^T), gamma_tilde)``,
    i.e. gamma_tilde, then the transposition; gamma and gamma_tilde are at
    distance one.
    """
    if p < 1:
        raise ValueError(f"p must be >= 1, got {p}")
    m = 2 * p
    gamma = [0] * m
    delta = [0] * m
    gtil = [0] * m
    for i in range(1, p + 1):
        gamma[_tpos(i, p)] = _tpos(i - 1 if i > 1 else p, p)
        gamma[_bpos(i, p)] = _bpos(i + 1 if i < p else 1, p)
        delta[_tpos(i, p)] = _bpos(i, p)
        delta[_bpos(i, p)] = _tpos(i, p)
        gtil[_tpos(i, p)] = _tpos(i - 1, p) if i > 1 else _bpos(1, p)
        gtil[_bpos(i, p)] = _bpos(i + 1, p) if i < p else _tpos(p, p)
    return Permutation(tuple(gamma)), Permutation(tuple(delta)), Permutation(tuple(gtil))


def all_permutations(m: int, max_degree: int = DEFAULT_ENUMERATION_CAP) -> Iterator[Permutation]:
    """All m! elements of S_m in lexicographic order of one-line notation.

    Guarded by ``max_degree``; raise it explicitly to enumerate larger groups.
    """
    if m > max_degree:
        raise ValueError(
            f"enumeration of S_{m} exceeds the cap {max_degree}; "
            "pass a larger max_degree to opt in"
        )
    for images in itertools.permutations(range(m)):
        yield Permutation(images)


def random_permutation(m: int, rng: np.random.Generator) -> Permutation:
    return Permutation(tuple(int(x) for x in rng.permutation(m)))


def conjugate(g: Permutation, a: Permutation) -> Permutation:
    """The conjugate ``g a g^{-1}``."""
    return compose(compose(g, a), g.inverse())
