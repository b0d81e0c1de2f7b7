"""Finite boxes in Z^d, nearest-neighbour structure and bond sets.

Sites are plain tuples of ints. Every enumeration is lexicographic so that
results are reproducible.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Iterable, Iterator

import numpy as np

Site = tuple[int, ...]
Bond = frozenset


def neighbors(site: Site) -> list[Site]:
    """The 2d nearest neighbours of `site`, axis-major, minus before plus."""
    out = []
    for axis in range(len(site)):
        for step in (-1, 1):
            nb = list(site)
            nb[axis] += step
            out.append(tuple(nb))
    return out


def l1_distance(a: Site, b: Site) -> int:
    return sum(abs(x - y) for x, y in zip(a, b))


@dataclass(frozen=True)
class Box:
    """Axis-aligned box ``[lower_k, upper_k]`` per axis, inclusive."""

    lower: tuple[int, ...]
    upper: tuple[int, ...]

    def __post_init__(self):
        lower = tuple(int(x) for x in self.lower)
        upper = tuple(int(x) for x in self.upper)
        if len(lower) != len(upper) or not lower:
            raise ValueError("lower and upper must have the same positive length")
        if any(lo > hi for lo, hi in zip(lower, upper)):
            raise ValueError(f"empty box: lower={lower} upper={upper}")
        object.__setattr__(self, "lower", lower)
        object.__setattr__(self, "upper", upper)

    @classmethod
    def cube(cls, side: int, d: int = 2, centered: bool = True) -> "Box":
        """Cube of `side` sites per axis; centred boxes contain the origin."""
        if side < 1:
            raise ValueError("side must be >= 1")
        lo = -(side // 2) if centered else 0
        return cls((lo,) * d, (lo + side - 1,) * d)

    @property
    def d(self) -> int:
        return len(self.lower)

    @property
    def shape(self) -> tuple[int, ...]:
        return tuple(hi - lo + 1 for lo, hi in zip(self.lower, self.upper))

    @property
    def size(self) -> int:
        return int(np.prod(self.shape))

    def __contains__(self, site) -> bool:
        return len(site) == self.d and all(
            lo <= x <= hi for x, lo, hi in zip(site, self.lower, self.upper)
        )

    def sites(self) -> Iterator[Site]:
        return itertools.product(
            *(range(lo, hi + 1) for lo, hi in zip(self.lower, self.upper))
        )

    def index(self, site: Site) -> int:
        """Lexicographic index of a site inside the box."""
        return int(np.ravel_multi_index(
            tuple(x - lo for x, lo in zip(site, self.lower)), self.shape))

    def grown(self, k: int = 1) -> "Box":
        return Box(tuple(x - k for x in self.lower), tuple(x + k for x in self.upper))

    def outer_layer(self) -> list[Site]:
        """Sites of the box with at least one coordinate on a face."""
        return [s for s in self.sites()
                if any(x in (lo, hi) for x, lo, hi in zip(s, self.lower, self.upper))]


def outer_boundary(box: Box) -> list[Site]:
    """Sites outside `box` adjacent to it, in lexicographic order."""
    found = set()
    for s in box.sites():
        for nb in neighbors(s):
            if nb not in box:
                found.add(nb)
    return sorted(found)


def bonds_touching(box: Box) -> set[Bond]:
    """Nearest-neighbour bonds with at least one endpoint in `box`."""
    bonds = set()
    for s in box.sites():
        for nb in neighbors(s):
            bonds.add(frozenset((s, nb)))
    return bonds


def inner_bonds(sites: Iterable[Site]) -> list[tuple[Site, Site]]:
    """Bonds with both endpoints in `sites`, each listed once."""
    pool = set(sites)
    out = []
    for s in sorted(pool):
        for nb in neighbors(s):
            if nb in pool and s < nb:
                out.append((s, nb))
    return out
