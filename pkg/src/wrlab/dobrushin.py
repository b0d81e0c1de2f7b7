"""Dobrushin interdependence entries and uniqueness regions.

Boundary conditions of a single site enter only through the neighbour
counts ``(n_plus, n_zero, n_minus)``, so every supremum over boundary
configurations is a maximum over O(B^2) count patterns.
"""
from __future__ import annotations

import csv
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional

import numpy as np

from .exceptions import DivergenceError
from .lattice import Box, neighbors
from .model import AprioriMeasure, ModelParams, single_site_kernel, tv_distance


@dataclass
class DobrushinReport:
    C_entry: float
    c_constant: float
    branch_maxima: tuple
    unique: bool


def _patterns(B: int):
    for n_plus in range(B + 1):
        for n_minus in range(B + 1 - n_plus):
            yield n_plus, B - n_plus - n_minus, n_minus


def _single_changes(n_plus, n_zero, n_minus):
    """Count patterns reachable by changing one neighbour's spin.

    Only one direction of each swap is listed; TV is symmetric.
    """
    if n_zero > 0:
        yield n_plus + 1, n_zero - 1, n_minus
        yield n_plus, n_zero - 1, n_minus + 1
    if n_minus > 0:
        yield n_plus + 1, n_zero, n_minus - 1


def _as_triple(alpha):
    if isinstance(alpha, AprioriMeasure):
        return alpha.p_minus, alpha.p_zero, alpha.p_plus
    return tuple(alpha)


def _hc_kernel(alpha, n_plus, n_minus):
    a_minus, a_zero, a_plus = alpha
    w = (a_minus if n_plus == 0 else 0 * a_minus,
         a_zero,
         a_plus if n_minus == 0 else 0 * a_plus)
    total = w[0] + w[1] + w[2]
    if total == 0:
        # every spin excluded: the site is forced empty
        return (0 * a_zero, 0 * a_zero + 1, 0 * a_zero)
    return tuple(x / total for x in w)


def cij_hardcore_bruteforce(alpha, B: int):
    """Largest TV between hard-core single-site kernels one neighbour apart.

    Works in plain arithmetic so that exact ``Fraction`` inputs give exact
    output. A pattern that excludes every spin of positive mass (only possible
    when alpha(0) = 0) gets the kernel delta_0.
    """
    if B < 1:
        raise ValueError("B must be >= 1")
    a = _as_triple(alpha)
    best = 0 * a[0]
    for pat in _patterns(B):
        k1 = _hc_kernel(a, pat[0], pat[2])
        for other in _single_changes(*pat):
            k2 = _hc_kernel(a, other[0], other[2])
            tv = sum(abs(x - y) for x, y in zip(k1, k2)) / 2
            if tv > best:
                best = tv
    return best


def hardcore_uniqueness_classifier(alpha, B) -> bool:
    """Closed-form Dobrushin criterion for the hard-core model.

    `B` is the maximal degree and may be ``math.inf``.
    """
    a_minus, a_zero, a_plus = _as_triple(alpha)
    if B == math.inf:
        return a_zero == 1
    if B < 1:
        raise ValueError("B must be >= 1")
    if B == 1:
        return not (a_plus == 1 or a_minus == 1)
    return max(a_minus, a_plus) * (B - 1) < a_zero


def _sc_fractions(a, beta, B, n_plus, n_minus):
    """The four closed-form TV fractions at counts (n_plus, n_minus).

    Entries are ``None`` where that branch's index range excludes the pattern.
    """
    a_minus, a_zero, a_plus = a

    def e(k):
        return math.exp(-beta * k)

    z = a_zero + a_plus * e(n_minus) + a_minus * e(n_plus)
    out = [None, None, None, None]
    if n_plus + n_minus <= B - 1:
        z1 = a_zero + a_plus * e(n_minus) + a_minus * e(n_plus + 1)
        out[0] = a_minus * (a_zero * (e(n_plus) - e(n_plus + 1))
                            + a_plus * (e(n_plus + n_minus) - e(n_plus + n_minus + 1))) / (z * z1)
        z2 = a_zero + a_plus * e(n_minus + 1) + a_minus * e(n_plus)
        out[1] = a_plus * (a_zero * (e(n_minus) - e(n_minus + 1))
                           + a_minus * (e(n_plus + n_minus) - e(n_plus + n_minus + 1))) / (z * z2)
    if n_minus > 0:
        z3 = a_zero + a_plus * e(n_minus - 1) + a_minus * e(n_plus + 1)
        if a_minus == 0:
            in_a = True
        else:
            in_a = (a_plus / a_minus) * math.exp(-beta * (n_minus - n_plus - 1)) > 1
        if in_a:
            out[2] = a_plus * (a_zero * (e(n_minus - 1) - e(n_minus))
                               + a_minus * (e(n_plus + n_minus - 1) - e(n_plus + n_minus + 1))) / (z * z3)
        else:
            out[3] = a_minus * (a_zero * (e(n_plus) - e(n_plus + 1))
                                + a_plus * (e(n_plus + n_minus - 1) - e(n_plus + n_minus + 1))) / (z * z3)
    return out


def cij_softcore(alpha, beta: float, B: int) -> tuple[float, tuple]:
    """Closed-form soft-core interdependence entry and its four branch maxima."""
    if B < 1 or B == math.inf:
        raise ValueError("B must be finite and >= 1")
    if beta < 0:
        raise ValueError("beta must be >= 0")
    a = _as_triple(alpha)
    maxima = [0.0, 0.0, 0.0, 0.0]
    for n_plus in range(B + 1):
        for n_minus in range(B + 1 - n_plus):
            for k, val in enumerate(_sc_fractions(a, beta, B, n_plus, n_minus)):
                if val is not None and val > maxima[k]:
                    maxima[k] = val
    return max(maxima), tuple(maxima)


def cij_softcore_bruteforce(alpha, beta: float, B: int) -> float:
    """Exhaustive TV maximisation over count patterns and one-site changes."""
    if B < 1:
        raise ValueError("B must be >= 1")
    params = ModelParams.from_alpha(AprioriMeasure(*_as_triple(alpha)), beta=beta)
    best = 0.0
    for pat in _patterns(B):
        k1 = single_site_kernel(pat, params)
        for other in _single_changes(*pat):
            best = max(best, tv_distance(k1, single_site_kernel(other, params)))
    return best


def dobrushin_report(alpha, B: int, beta: float = math.inf) -> DobrushinReport:
    """Interdependence entry, constant ``B * C`` and verdict for a B-regular graph."""
    if beta == math.inf:
        C = float(cij_hardcore_bruteforce(alpha, B))
        branches = ()
    else:
        C, branches = cij_softcore(alpha, beta, B)
    c = B * C
    return DobrushinReport(C, c, branches, c < 1)


def g_function(beta: float, B: int) -> Optional[float]:
    """Auxiliary function fixing the uniqueness threshold on the alpha(0)=0 edge.

    Returns ``None`` where the square root is not real or below
    ``log((B+1)/(B-1))``.
    """
    if B < 2:
        raise ValueError("B must be >= 2")
    if beta < math.log((B + 1) / (B - 1)):
        return None
    e2 = math.exp(2 * beta)
    disc = (e2 - e2 * B + B + 1) ** 2 - 4 * e2
    if disc < 0:
        # the discriminant vanishes at the left endpoint; clip rounding noise there
        if disc > -1e-9 * max(1.0, e2 * e2 * B * B):
            disc = 0.0
        else:
            return None
    return -math.exp(-beta * B) * (e2 * (1 - B) + B + 1 + math.sqrt(disc))


def g_discriminant(beta: float, B: int) -> float:
    e2 = math.exp(2 * beta)
    return (e2 - e2 * B + B + 1) ** 2 - 4 * e2


def threshold_alpha(beta: float, B: int) -> Optional[float]:
    """Mass above which ``max(alpha(1), alpha(-1))`` guarantees uniqueness when alpha(0)=0.

    Zero means every such measure is in the uniqueness region.
    """
    if beta < math.log((B + 1) / (B - 1)):
        return 0.0
    g = g_function(beta, B)
    if g is None:
        return None
    return 2.0 / (2.0 + g)


@dataclass
class SimplexGrid:
    resolution: int
    points: list
    c_values: np.ndarray
    verdicts: np.ndarray
    B: int
    beta: float
    exact_points: Optional[list] = None

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            write_region_csv(self, fh)


def simplex_points(resolution: int, exact: bool = False):
    """Barycentric lattice points ``(i, j, k) / N`` as (alpha(-1), alpha(0), alpha(+1))."""
    if resolution < 2:
        raise ValueError("simplex resolution must be >= 2")
    N = resolution
    pts = []
    for i in range(N + 1):
        for j in range(N + 1 - i):
            k = N - i - j
            if exact:
                pts.append((Fraction(i, N), Fraction(j, N), Fraction(k, N)))
            else:
                pts.append((i / N, j / N, k / N))
    return pts


def _c_value(args):
    alpha, beta, B = args
    if beta == math.inf:
        return B * cij_hardcore_bruteforce(alpha, B)
    return B * cij_softcore(alpha, beta, B)[0]


def region_scan(beta: float, B: int, resolution: int, workers: int = 1) -> SimplexGrid:
    """Dobrushin verdict ``B * C < 1`` at every simplex grid point.

    ``beta = inf`` scans the hard-core model with exact rational arithmetic so
    that points on the region boundary are classified without rounding.
    """
    hard = beta == math.inf
    pts = simplex_points(resolution, exact=hard)
    jobs = [(p, beta, B) for p in pts]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            cs = list(pool.map(_c_value, jobs, chunksize=64))
    else:
        cs = [_c_value(j) for j in jobs]
    verdicts = np.array([c < 1 for c in cs])
    points = [AprioriMeasure(*(float(x) for x in p)) for p in pts]
    return SimplexGrid(resolution, points, np.array([float(c) for c in cs]), verdicts, B, beta,
                       exact_points=pts if hard else None)


def write_region_csv(grid: SimplexGrid, fh) -> None:
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(["alpha_minus", "alpha_zero", "alpha_plus", "c_value", "unique"])
    for a, c, u in zip(grid.points, grid.c_values, grid.verdicts):
        w.writerow([fmt(a.p_minus), fmt(a.p_zero), fmt(a.p_plus), fmt(c),
                    "true" if u else "false"])


def fmt(x: float) -> str:
    """Float with 17 significant digits."""
    x = float(x)
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return f"{x:.17g}"


def comparison_matrix(C_entry: float, box: Box, order_cap: int = 10_000) -> np.ndarray:
    """Neumann series ``sum_n C^n`` for the nearest-neighbour matrix on `box`.

    Truncated once the tail bound ``c^(n+1) / (1 - c)`` drops below 1e-12,
    with ``c = 2d * C_entry``.
    """
    c = 2 * box.d * C_entry
    if c >= 1:
        raise DivergenceError(f"Dobrushin constant {c} >= 1; series diverges")
    sites = list(box.sites())
    idx = {s: k for k, s in enumerate(sites)}
    n = len(sites)
    C = np.zeros((n, n))
    for s in sites:
        for nb in neighbors(s):
            if nb in idx:
                C[idx[s], idx[nb]] = C_entry
    D = np.eye(n)
    term = np.eye(n)
    for k in range(1, order_cap + 1):
        if c ** k / (1 - c) < 1e-12:
            break
        term = term @ C
        D += term
    return D
