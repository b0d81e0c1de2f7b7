"""Cluster representation of the time-evolved hard-core model.

A second-layer (time ``t``) spin ``s`` is read through the identification
``0 = (0, 0)``, ``+-1 = (1, +-1)``: ``|s|`` is the occupation, which the
dynamics never changes, and ``sign(s)`` is the evolved colour.

All cluster weights are accumulated in log-space. For a cluster ``C`` meeting
``Delta`` or its outer boundary the two colour branches are

    plus:  |C & Delta| log a_r + sum_{i in C & Delta} log p_t(+1, s_i)
    minus: sum_{i in C & Delta} log p_t(-1, s_i) - S_C,
           S_C = sum_{i in C \\ Delta} (log a_r + log q_t * s_i)

with ``a_r = alpha(+1) / alpha(-1)``.
"""
from __future__ import annotations

import csv
import itertools
import json
import math
from dataclasses import dataclass, field
from typing import Iterable, Optional, Sequence

import numpy as np
from scipy import ndimage

from .dobrushin import fmt
from .dynamics import q_t, t_G_arccoth, transition_matrix
from .exceptions import DegenerateConditioningError, WRLabError
from .lattice import Box, Site, neighbors, outer_boundary
from .model import AprioriMeasure, FiniteVolumeDistribution, SpinConfiguration


@dataclass
class TwoLayerConfig:
    """Occupation plus first-layer (time 0) and second-layer (time t) colours."""

    occupation: np.ndarray
    sigma_hat: np.ndarray
    sigma: Optional[np.ndarray] = None

    def __post_init__(self):
        occ = np.asarray(self.occupation).astype(bool)
        for name in ("sigma_hat", "sigma"):
            arr = getattr(self, name)
            if arr is None:
                continue
            arr = np.asarray(arr, dtype=np.int8)
            if np.any((arr != 0) != occ) or not np.isin(arr, (-1, 0, 1)).all():
                raise ValueError(f"{name} must be +-1 exactly on occupied sites")
            setattr(self, name, arr)
        self.occupation = occ

    @classmethod
    def from_spins(cls, evolved: np.ndarray, initial: Optional[np.ndarray] = None) -> "TwoLayerConfig":
        evolved = np.asarray(evolved, dtype=np.int8)
        return cls(evolved != 0, evolved, initial)

    def evolved_spins(self) -> np.ndarray:
        return self.sigma_hat.copy()


@dataclass
class ClusterDecomposition:
    clusters: list
    delta_contact: list
    window_escape: list
    labels: np.ndarray = field(repr=False, default=None)

    def delta_clusters(self) -> list:
        return [c for c, hit in zip(self.clusters, self.delta_contact) if hit]


@dataclass(frozen=True)
class DerivedConstants:
    alpha_r: float
    q_t: float

    @classmethod
    def of(cls, alpha: AprioriMeasure, t: float) -> "DerivedConstants":
        return cls(alpha.p_plus / alpha.p_minus, q_t(t))


def _structure(d: int) -> np.ndarray:
    return ndimage.generate_binary_structure(d, 1)


def _delta_halo(delta: Sequence[Site]) -> set:
    halo = set(delta)
    for s in delta:
        halo.update(neighbors(s))
    return halo


def cluster_decompose(occupation: np.ndarray, box: Box, delta: Sequence[Site] = (),
                      boundary_bonds_only: bool = False) -> ClusterDecomposition:
    """Maximal nearest-neighbour clusters of occupied sites.

    `occupation` covers ``box``. With ``boundary_bonds_only`` the outer layer
    of ``box`` plays the role of a frozen outer boundary: its sites are linked
    only to their neighbour inside, never to each other. ``delta_contact``
    marks clusters meeting ``delta`` or its outer boundary; ``window_escape``
    marks clusters reaching the outer layer of ``box``.
    """
    occ = np.asarray(occupation).astype(bool)
    if occ.shape != box.shape:
        raise ValueError(f"occupation shape {occ.shape} != box shape {box.shape}")
    d = box.d
    if boundary_bonds_only:
        inner = np.zeros_like(occ)
        core = tuple(slice(1, n - 1) for n in occ.shape)
        inner[core] = occ[core]
        labels, n = ndimage.label(inner, structure=_structure(d))
        # each face site of a box has exactly one neighbour inside
        for pos in zip(*np.nonzero(occ & ~inner)):
            nb = list(pos)
            for axis, (p, size) in enumerate(zip(pos, occ.shape)):
                if p == 0:
                    nb[axis] = 1
                elif p == size - 1:
                    nb[axis] = size - 2
            nb = tuple(nb)
            if sum(a != b for a, b in zip(nb, pos)) != 1:
                continue  # corner of the padded frame, not a boundary site
            if labels[nb]:
                labels[pos] = labels[nb]
            else:
                n += 1
                labels[pos] = n
    else:
        labels, n = ndimage.label(occ, structure=_structure(d))

    lower = np.array(box.lower)
    halo = _delta_halo(delta)
    clusters, contact, escape = [], [], []
    shape = np.array(occ.shape)
    for k in range(1, n + 1):
        pos = np.argwhere(labels == k)
        if pos.size == 0:
            continue
        sites = {tuple(int(x) for x in p + lower) for p in pos}
        clusters.append(sites)
        contact.append(bool(halo & sites))
        escape.append(bool(np.any(pos == 0) or np.any(pos == shape - 1)))
    return ClusterDecomposition(clusters, contact, escape, labels)


def _log_pt(t: float) -> np.ndarray:
    with np.errstate(divide="ignore"):
        return np.log(transition_matrix(t).matrix)


def _require_occupied_colours(alpha: AprioriMeasure):
    if alpha.p_plus <= 0 or alpha.p_minus <= 0:
        raise ValueError("the cluster representation needs alpha(1) > 0 and alpha(-1) > 0")


def _logsumexp(values: Iterable[float]) -> float:
    vals = [v for v in values if v != -math.inf]
    if not vals:
        return -math.inf
    top = max(vals)
    return top + math.log(sum(math.exp(v - top) for v in vals))


class _Weights:
    """Per-cluster branch weights for fixed alpha and t."""

    def __init__(self, alpha: AprioriMeasure, t: float):
        _require_occupied_colours(alpha)
        if t <= 0:
            raise ValueError("t must be > 0")
        self.log_ar = math.log(alpha.p_plus / alpha.p_minus)
        self.log_q = math.log(q_t(t))
        self.log_pt = _log_pt(t)
        self.log_a0 = math.log(alpha.p_zero) if alpha.p_zero > 0 else -math.inf
        self.log_am = math.log(alpha.p_minus)

    def branches(self, in_delta: Iterable[int], outside: Iterable[int]) -> tuple[float, float]:
        """(plus, minus) log weights from evolved spins inside and outside Delta."""
        in_delta = list(in_delta)
        plus = sum(self.log_ar + self.log_pt[2, s + 1] for s in in_delta)
        minus = sum(self.log_pt[0, s + 1] for s in in_delta)
        minus -= sum(self.log_ar + self.log_q * s for s in outside)
        return plus, minus


def _delta_states(n: int):
    return itertools.product((-1, 0, 1), repeat=n)


def _finish(delta: list, logw: list) -> FiniteVolumeDistribution:
    logw = np.array(logw)
    top = logw.max()
    if not np.isfinite(top):
        raise DegenerateConditioningError("every second-layer value on Delta has zero weight")
    probs = np.exp(logw - top)
    probs /= probs.sum()
    return FiniteVolumeDistribution(None, list(delta), probs)


def _check_delta(delta: Sequence[Site], box: Box):
    if not delta:
        raise ValueError("Delta must be non-empty")
    for s in delta:
        if s not in box:
            raise ValueError(f"Delta site {s} outside {box}")


def kernel_finite_volume(config: SpinConfiguration, delta: Sequence[Site],
                         alpha: AprioriMeasure, t: float) -> FiniteVolumeDistribution:
    """Law of the evolved spins on `delta` given the rest of the box.

    ``config.interior`` holds the evolved (time t) spins on the box, entries
    on `delta` being ignored; the boundary layer of `config` holds the
    initial (time 0) spins on the outer boundary. States are encoded as in
    :class:`FiniteVolumeDistribution` over the sites of `delta`.
    """
    box = config.box
    delta = list(delta)
    _check_delta(delta, box)
    w = _Weights(alpha, t)
    frame = config.frame
    base = config.grid.copy()
    dpos = [tuple(x - lo for x, lo in zip(s, frame.lower)) for s in delta]
    interior = np.zeros(frame.shape, dtype=bool)
    interior[tuple(slice(1, n + 1) for n in box.shape)] = True

    logw = []
    for values in _delta_states(len(delta)):
        grid = base.copy()
        for p, v in zip(dpos, values):
            grid[p] = v
        dec = cluster_decompose(grid != 0, frame, delta, boundary_bonds_only=True)
        total = (sum(w.log_a0 for v in values if v == 0)
                 + sum(w.log_am for v in values if v != 0))
        for sites, hit in zip(dec.clusters, dec.delta_contact):
            pos = [tuple(x - lo for x, lo in zip(s, frame.lower)) for s in sites]
            ext = {int(grid[p]) for p in pos if not interior[p]}
            if not hit:
                if ext == {-1, 1}:
                    raise DegenerateConditioningError(
                        "a cluster touches both boundary signs; the conditional is undefined")
                continue
            in_d = [int(grid[p]) for s, p in zip(sites, pos) if s in delta]
            outside = [int(grid[p]) for s, p in zip(sites, pos)
                       if interior[p] and s not in delta]
            plus, minus = w.branches(in_d, outside)
            total += _logsumexp([plus if -1 not in ext else -math.inf,
                                 minus if 1 not in ext else -math.inf])
        logw.append(total)
    return _finish(delta, logw)


def two_layer_conditional_bruteforce(config: SpinConfiguration, delta: Sequence[Site],
                                     alpha: AprioriMeasure, t: float) -> FiniteVolumeDistribution:
    """Same conditional as :func:`kernel_finite_volume` by summing over first layers.

    Sums ``I_hc * prod alpha(sigma_i) * prod p_t(sigma_i, eta_i)`` over all
    initial configurations on the box; sites outside `delta` whose evolved
    spin is 0 must start at 0, occupied ones at +-1.
    """
    box = config.box
    delta = list(delta)
    _check_delta(delta, box)
    sites = list(box.sites())
    idx = {s: k for k, s in enumerate(sites)}
    pt = transition_matrix(t).matrix
    a = alpha.as_array()
    eta = {s: config[s] for s in sites}
    choices = []
    for s in sites:
        if s in delta:
            choices.append((-1, 0, 1))
        else:
            choices.append((-1, 1) if eta[s] != 0 else (0,))
    ext = {s: [config[nb] for nb in neighbors(s) if nb not in box] for s in sites}
    pairs = [(idx[s], idx[nb]) for s in sites for nb in neighbors(s) if nb in idx and s < nb]
    other = [k for k, s in enumerate(sites) if s not in delta]
    dk = [idx[s] for s in delta]

    out = np.zeros(3 ** len(delta))
    for sigma in itertools.product(*choices):
        if any(sigma[i] * sigma[j] == -1 for i, j in pairs):
            continue
        if any(sigma[k] * v == -1 for k, s in enumerate(sites) for v in ext[s]):
            continue
        w = 1.0
        for k, s in enumerate(sites):
            w *= a[sigma[k] + 1]
        for k in other:
            w *= pt[sigma[k] + 1, eta[sites[k]] + 1]
        if w == 0:
            continue
        for code, values in enumerate(_delta_states(len(delta))):
            v = w
            for k, val in zip(dk, values):
                v *= pt[sigma[k] + 1, val + 1]
            out[code] += v
    total = out.sum()
    if total <= 0:
        raise DegenerateConditioningError("the boundary and second layer are incompatible")
    return FiniteVolumeDistribution(None, delta, out / total)


def _window_kernel(spins: np.ndarray, window: Box, delta: Sequence[Site], alpha: AprioriMeasure,
                   t: float, allow_escape: bool) -> FiniteVolumeDistribution:
    delta = list(delta)
    _check_delta(delta, window)
    spins = np.asarray(spins, dtype=np.int8)
    if spins.shape != window.shape:
        raise ValueError(f"window configuration shape {spins.shape} != {window.shape}")
    w = _Weights(alpha, t)
    dpos = [tuple(x - lo for x, lo in zip(s, window.lower)) for s in delta]
    for p in dpos:
        if any(x in (0, n - 1) for x, n in zip(p, window.shape)):
            raise ValueError("Delta must lie strictly inside the window")
    logw = []
    for values in _delta_states(len(delta)):
        grid = spins.copy()
        for p, v in zip(dpos, values):
            grid[p] = v
        dec = cluster_decompose(grid != 0, window, delta)
        total = (sum(w.log_a0 for v in values if v == 0)
                 + sum(w.log_am for v in values if v != 0))
        for sites, hit, esc in zip(dec.clusters, dec.delta_contact, dec.window_escape):
            if not hit:
                continue
            if esc and not allow_escape:
                raise WRLabError("a cluster meeting Delta reaches the window edge; enlarge the window")
            pos = [tuple(x - lo for x, lo in zip(s, window.lower)) for s in sites]
            in_d = [int(grid[p]) for s, p in zip(sites, pos) if s in delta]
            outside = [int(grid[p]) for s, p in zip(sites, pos) if s not in delta]
            plus, minus = w.branches(in_d, outside)
            total += plus if esc else _logsumexp([plus, minus])
        logw.append(total)
    return _finish(delta, logw)


def kernel_gamma_f(spins: np.ndarray, window: Box, delta: Sequence[Site],
                   alpha: AprioriMeasure, t: float) -> FiniteVolumeDistribution:
    """Kernel that sees only finite clusters.

    `spins` are the evolved spins on `window` (entries on `delta` ignored).
    Every cluster meeting `delta` must stay away from the window's outer
    layer; otherwise the kernel is not determined by the window.
    """
    return _window_kernel(spins, window, delta, alpha, t, allow_escape=False)


def kernel_gamma_inf(spins: np.ndarray, window: Box, delta: Sequence[Site],
                     alpha: AprioriMeasure, t: float) -> FiniteVolumeDistribution:
    """Kernel in which clusters reaching the window edge count as infinite.

    Those clusters keep only their plus branch.
    """
    return _window_kernel(spins, window, delta, alpha, t, allow_escape=True)


def prob_plus(dist: FiniteVolumeDistribution, site: Site) -> float:
    """Probability that the evolved spin at `site` is +1."""
    return float(dist.marginal(site)[2])


def alpha_for_ratio(alpha_r: float, p_zero: float = 1 / 3) -> AprioriMeasure:
    """A priori measure with ``alpha(1) / alpha(-1) = alpha_r`` and the given empty mass."""
    if alpha_r <= 0 or not 0 <= p_zero < 1:
        raise ValueError("need alpha_r > 0 and 0 <= p_zero < 1")
    occ = 1 - p_zero
    return AprioriMeasure(occ / (1 + alpha_r), p_zero, occ * alpha_r / (1 + alpha_r))


@dataclass(frozen=True)
class LineGeometry:
    """Straight occupied connector from next to the origin along axis 0.

    Sites ``1..L`` on the positive axis are occupied; ``1..r`` carry evolved
    spin +1, ``r+1..L`` carry the annulus decoration.
    """

    L: int
    r: int = 0
    d: int = 2
    connector: bool = True

    def window(self) -> Box:
        return Box((-1,) + (-1,) * (self.d - 1), (self.L + 1,) + (1,) * (self.d - 1))

    def spins(self, decoration: int) -> np.ndarray:
        win = self.window()
        grid = np.zeros(win.shape, dtype=np.int8)
        if self.connector:
            centre = tuple(0 - lo for lo in win.lower[1:])
            for x in range(1, self.L + 1):
                grid[(x - win.lower[0],) + centre] = 1 if x <= self.r else decoration
        return grid

    def describe(self) -> dict:
        return {"geometry": "line", "axis": 0, "L": self.L, "inner_radius": self.r,
                "d": self.d, "connector": self.connector}


@dataclass(frozen=True)
class BadnessResult:
    gap: float
    p_plus: float
    p_minus: float
    degenerate: bool


def badness_probe(alpha: AprioriMeasure, t: float, geometry: LineGeometry) -> BadnessResult:
    """Gap in ``P(evolved spin at 0 is +1)`` between all-plus and all-minus annulus decorations."""
    if geometry.r > geometry.L:
        raise ValueError("inner radius exceeds connector length")
    win = geometry.window()
    origin = (0,) * geometry.d
    p = [prob_plus(kernel_gamma_f(geometry.spins(dec), win, [origin], alpha, t), origin)
         for dec in (1, -1)]
    degenerate = not geometry.connector or geometry.r == geometry.L
    return BadnessResult(abs(p[0] - p[1]), p[0], p[1], degenerate)


def badness_line_closed_form(alpha: AprioriMeasure, t: float, L: int, decoration: int) -> float:
    """``P(evolved spin at 0 is +1)`` for the bare line connector, evaluated directly."""
    w = _Weights(alpha, t)
    S = L * (w.log_ar + w.log_q * decoration)
    e = math.exp(-S) if -S < 700 else math.inf
    pt = transition_matrix(t).matrix
    ar = alpha.p_plus / alpha.p_minus
    if math.isinf(e):
        zero, plus, minus = alpha.p_zero, alpha.p_minus * pt[0, 2], alpha.p_minus * pt[0, 0]
    else:
        zero = alpha.p_zero * (1 + e)
        plus = alpha.p_minus * (ar * pt[2, 2] + pt[0, 2] * e)
        minus = alpha.p_minus * (ar * pt[2, 0] + pt[0, 0] * e)
    return plus / (zero + plus + minus)


def locate_crossover(alpha: AprioriMeasure, L: int, threshold: float = 0.05,
                     t_lo: Optional[float] = None, t_hi: Optional[float] = None,
                     tol: float = 1e-6, d: int = 2) -> float:
    """Time at which the line-connector gap falls through `threshold`, by bisection."""
    geometry = LineGeometry(L, d=d)
    tg = t_G_arccoth(alpha.p_plus / alpha.p_minus)
    lo = t_lo if t_lo is not None else 0.2 * tg
    hi = t_hi if t_hi is not None else 3.0 * tg
    gap = lambda t: badness_probe(alpha, t, geometry).gap
    if not gap(lo) > threshold >= gap(hi):
        raise WRLabError("the gap does not cross the threshold inside the bracket")
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if gap(mid) > threshold:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def write_probe_csv(alpha: AprioriMeasure, ts: Iterable[float], Ls: Iterable[int], fh,
                    r: int = 0, d: int = 2) -> None:
    """Gap on a (t, L) grid, preceded by a JSON geometry header line."""
    Ls = list(Ls)
    header = {"geometry": "line", "axis": 0, "inner_radius": r, "d": d,
              "alpha": [alpha.p_minus, alpha.p_zero, alpha.p_plus]}
    fh.write("# " + json.dumps(header, sort_keys=True) + "\n")
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(["t", "L", "gap"])
    for t in ts:
        for L in Ls:
            res = badness_probe(alpha, t, LineGeometry(L, r, d))
            w.writerow([fmt(t), L, fmt(res.gap)])
