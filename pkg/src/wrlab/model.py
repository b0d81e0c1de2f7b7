"""A priori measures, parameters, Hamiltonians and exact finite-volume kernels.

Spin values are ordered ``(-1, 0, +1)`` wherever a length-3 vector appears.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Callable, Iterable, Optional, Union

import numpy as np

from .exceptions import (SizeError, UnrepresentableError,
                         UnsupportedVariantError, DegenerateConditioningError)
from .lattice import Box, Site, bonds_touching, inner_bonds, neighbors, outer_boundary

SPINS = (-1, 0, 1)
ENUMERATION_CAP = 16


@dataclass(frozen=True)
class AprioriMeasure:
    """Single-site probability vector over the spin states -1, 0, +1."""

    p_minus: float
    p_zero: float
    p_plus: float

    def __post_init__(self):
        masses = (self.p_minus, self.p_zero, self.p_plus)
        if any(m < 0 for m in masses):
            raise ValueError(f"negative mass in a priori measure {masses}")
        if abs(sum(masses) - 1) > 1e-12:
            raise ValueError(f"a priori measure does not sum to 1: {masses}")

    @classmethod
    def normalized(cls, p_minus, p_zero, p_plus) -> "AprioriMeasure":
        total = p_minus + p_zero + p_plus
        if total <= 0:
            raise ValueError("all masses are zero")
        return cls(p_minus / total, p_zero / total, p_plus / total)

    @classmethod
    def delta(cls, spin: int) -> "AprioriMeasure":
        masses = [0.0, 0.0, 0.0]
        masses[spin + 1] = 1.0
        return cls(*masses)

    def __getitem__(self, spin: int) -> float:
        return (self.p_minus, self.p_zero, self.p_plus)[spin + 1]

    def as_array(self) -> np.ndarray:
        return np.array([self.p_minus, self.p_zero, self.p_plus])

    def tv(self, other: "AprioriMeasure") -> float:
        return 0.5 * float(np.abs(self.as_array() - other.as_array()).sum())

    @property
    def ratio(self) -> float:
        """alpha(+1) / alpha(-1); +inf when alpha(-1) = 0."""
        if self.p_minus == 0:
            return math.inf if self.p_plus > 0 else math.nan
        return self.p_plus / self.p_minus


def alpha_from_lambda_h(lam: float, h: float = 0.0) -> AprioriMeasure:
    """A priori measure with intensity `lam` and field `h`."""
    if not lam > 0:
        raise ValueError("lambda must be positive")
    # alpha(+-1) proportional to lam * exp(+-h), alpha(0) to 1; log-space for large h
    logs = np.array([math.log(lam) - h, 0.0, math.log(lam) + h])
    w = np.exp(logs - logs.max())
    w /= w.sum()
    return AprioriMeasure(*(float(x) for x in w))


def alpha_to_lambda_h(alpha: AprioriMeasure) -> tuple[float, float]:
    if alpha.p_zero <= 0 or alpha.p_plus <= 0 or alpha.p_minus <= 0:
        raise UnrepresentableError(
            f"{alpha} has a zero mass and no (lambda, h) coordinates")
    h = 0.5 * math.log(alpha.p_plus / alpha.p_minus)
    lam = math.sqrt(alpha.p_plus * alpha.p_minus) / alpha.p_zero
    return lam, h


class Variant(enum.Enum):
    HARD_CORE = "hard-core"
    SOFT_CORE = "soft-core"


@dataclass(frozen=True)
class ModelParams:
    """Model variant with repulsion `beta`, intensity `lam` and field `h`.

    Hard-core is ``beta = inf``. Use :meth:`from_alpha` to build parameters
    from an a priori measure that has zero masses (e.g. ``alpha(0) = 0``).
    """

    variant: Variant
    beta: float
    lam: float = 1.0
    h: float = 0.0
    _alpha: Optional[AprioriMeasure] = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        if self._alpha is None and not self.lam > 0:
            raise ValueError("lambda must be positive")
        if self.variant is Variant.HARD_CORE:
            object.__setattr__(self, "beta", math.inf)
        elif not (0 <= self.beta < math.inf):
            raise ValueError("soft-core beta must be finite and >= 0")

    @classmethod
    def hard_core(cls, lam: float = 1.0, h: float = 0.0) -> "ModelParams":
        return cls(Variant.HARD_CORE, math.inf, lam, h)

    @classmethod
    def soft_core(cls, beta: float, lam: float = 1.0, h: float = 0.0) -> "ModelParams":
        return cls(Variant.SOFT_CORE, beta, lam, h)

    @classmethod
    def from_alpha(cls, alpha: AprioriMeasure, beta: float = math.inf) -> "ModelParams":
        variant = Variant.HARD_CORE if beta == math.inf else Variant.SOFT_CORE
        try:
            lam, h = alpha_to_lambda_h(alpha)
        except UnrepresentableError:
            lam, h = math.nan, math.nan
        return cls(variant, beta, lam, h, _alpha=alpha)

    @property
    def hardcore(self) -> bool:
        return self.variant is Variant.HARD_CORE

    @property
    def alpha(self) -> AprioriMeasure:
        if self._alpha is not None:
            return self._alpha
        return alpha_from_lambda_h(self.lam, self.h)


class SpinConfiguration:
    """Spins on a box plus its frozen outer boundary.

    Values live in a padded array covering ``box.grown(1)``; the corner cells
    of the padding are not part of the outer boundary and are kept at 0.
    """

    def __init__(self, box: Box, grid: Optional[np.ndarray] = None, boundary_name: str = "custom"):
        self.box = box
        self.frame = box.grown(1)
        if grid is None:
            grid = np.zeros(self.frame.shape, dtype=np.int8)
        grid = np.asarray(grid, dtype=np.int8)
        if grid.shape != self.frame.shape:
            raise ValueError(f"grid shape {grid.shape} != padded box shape {self.frame.shape}")
        if not np.isin(grid, SPINS).all():
            raise ValueError("spin values must be in {-1, 0, 1}")
        self.grid = grid
        self.boundary_name = boundary_name

    @classmethod
    def with_boundary(cls, box: Box, boundary: Union[int, Callable[[Site], int]],
                      interior: int = 0, name: Optional[str] = None) -> "SpinConfiguration":
        cfg = cls(box)
        cfg.grid[cfg._interior_slices()] = interior
        rule = boundary if callable(boundary) else (lambda s, v=boundary: v)
        for s in outer_boundary(box):
            cfg[s] = rule(s)
        if name is None:
            name = {1: "AllPlus", -1: "AllMinus", 0: "AllZero"}.get(boundary, "custom") \
                if not callable(boundary) else "custom"
        cfg.boundary_name = name
        return cfg

    def _interior_slices(self):
        return tuple(slice(1, n + 1) for n in self.box.shape)

    def _pos(self, site: Site):
        return tuple(x - lo for x, lo in zip(site, self.frame.lower))

    def __getitem__(self, site: Site) -> int:
        return int(self.grid[self._pos(site)])

    def __setitem__(self, site: Site, value: int):
        if value not in SPINS:
            raise ValueError("spin values must be in {-1, 0, 1}")
        self.grid[self._pos(site)] = value

    @property
    def interior(self) -> np.ndarray:
        """View of the spins on the box itself."""
        return self.grid[self._interior_slices()]

    def copy(self) -> "SpinConfiguration":
        return SpinConfiguration(self.box, self.grid.copy(), self.boundary_name)

    def __eq__(self, other) -> bool:
        return (isinstance(other, SpinConfiguration) and self.box == other.box
                and np.array_equal(self.grid, other.grid))

    def __repr__(self):
        return f"SpinConfiguration(box={self.box}, boundary={self.boundary_name!r})"


def hardcore_indicator(config: SpinConfiguration) -> int:
    """1 unless some bond touching the box joins opposite nonzero spins."""
    for bond in bonds_touching(config.box):
        i, j = tuple(bond)
        if config[i] * config[j] == -1:
            return 0
    return 1


def hamiltonian_sc(config: SpinConfiguration, params: ModelParams) -> float:
    """Soft-core finite-volume energy of `config`."""
    if params.hardcore:
        raise UnsupportedVariantError("hamiltonian_sc needs the soft-core variant")
    conflicts = sum(1 for bond in bonds_touching(config.box)
                    if np.prod([config[s] for s in bond]) == -1)
    energy = params.beta * conflicts
    for s in config.box.sites():
        w = config[s]
        energy -= math.log(params.lam) * w * w + params.h * w
    return float(energy)


def _log_alpha(alpha: AprioriMeasure) -> np.ndarray:
    with np.errstate(divide="ignore"):
        return np.log(alpha.as_array())


@dataclass
class FiniteVolumeDistribution:
    """Exact law on the 3^n spin configurations of a box.

    State `k` encodes the spins of ``sites`` in base 3 (digit 0 is spin -1),
    most significant digit first.
    """

    box: Box
    sites: list
    probs: np.ndarray

    def states(self) -> np.ndarray:
        return _decode(np.arange(self.probs.size), len(self.sites))

    def encode(self, spins: Iterable[int]) -> int:
        code = 0
        for v in spins:
            code = 3 * code + (v + 1)
        return code

    def prob(self, config: SpinConfiguration) -> float:
        return float(self.probs[self.encode(config[s] for s in self.sites)])

    def marginal(self, site: Site) -> np.ndarray:
        k = self.sites.index(site)
        n = len(self.sites)
        shaped = self.probs.reshape((3,) * n)
        axes = tuple(a for a in range(n) if a != k)
        return shaped.sum(axis=axes)


def _decode(codes: np.ndarray, n: int) -> np.ndarray:
    out = np.empty((codes.size, n), dtype=np.int8)
    rest = codes.copy()
    for k in range(n - 1, -1, -1):
        out[:, k] = rest % 3 - 1
        rest //= 3
    return out


def spec_kernel(box: Box, boundary: SpinConfiguration, params: ModelParams,
                cap: int = ENUMERATION_CAP) -> FiniteVolumeDistribution:
    """Exact finite-volume specification kernel given the boundary spins.

    Weights are evaluated in log-space with max-subtraction. The hard-core
    variant uses the exclusion indicator directly.
    """
    sites = list(box.sites())
    n = len(sites)
    if n > cap:
        raise SizeError(f"{n} sites exceeds the enumeration cap of {cap}")
    idx = {s: k for k, s in enumerate(sites)}
    pairs = inner_bonds(sites)
    ext_plus = np.zeros(n, dtype=np.int64)
    ext_minus = np.zeros(n, dtype=np.int64)
    for s in sites:
        for nb in neighbors(s):
            if nb not in box:
                v = boundary[nb]
                ext_plus[idx[s]] += v == 1
                ext_minus[idx[s]] += v == -1
    log_alpha = _log_alpha(params.alpha)

    chunk = 3 ** min(n, 12)
    total = 3 ** n
    logw = np.empty(total)
    for start in range(0, total, chunk):
        x = _decode(np.arange(start, min(total, start + chunk)), n).astype(np.int64)
        # opposite-sign bond counts: inside the box, then to the frozen boundary
        conflicts = np.zeros(x.shape[0], dtype=np.int64)
        for a, b in pairs:
            conflicts += x[:, idx[a]] * x[:, idx[b]] == -1
        conflicts += ((x == 1) * ext_minus).sum(axis=1) + ((x == -1) * ext_plus).sum(axis=1)
        site_term = log_alpha[x + 1].sum(axis=1)
        if params.hardcore:
            lw = np.where(conflicts > 0, -np.inf, site_term)
        else:
            lw = site_term - params.beta * conflicts
        logw[start:start + x.shape[0]] = lw
    top = logw.max()
    if not np.isfinite(top):
        raise DegenerateConditioningError("every configuration has zero weight")
    probs = np.exp(logw - top)
    probs /= probs.sum()
    return FiniteVolumeDistribution(box, sites, probs)


def single_site_kernel(counts: tuple[int, int, int], params: ModelParams) -> np.ndarray:
    """Law of one spin given neighbour counts ``(n_plus, n_zero, n_minus)``.

    Depends on the neighbourhood only through the counts of +1 and -1.
    """
    n_plus, _, n_minus = counts
    a = params.alpha
    if params.hardcore:
        w = np.array([a.p_minus * (n_plus == 0), a.p_zero, a.p_plus * (n_minus == 0)], dtype=float)
    else:
        w = np.array([a.p_minus * math.exp(-params.beta * n_plus), a.p_zero,
                      a.p_plus * math.exp(-params.beta * n_minus)])
    total = w.sum()
    if total <= 0:
        raise DegenerateConditioningError(
            f"single-site kernel undefined for counts {counts} under {a}")
    return w / total


def tv_distance(p, q) -> float:
    return 0.5 * float(np.abs(np.asarray(p) - np.asarray(q)).sum())
