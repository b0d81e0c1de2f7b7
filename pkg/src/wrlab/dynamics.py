"""Independent spin-flip dynamics and the transition times it induces.

States are ordered ``(-1, 0, +1)`` in every 3x3 matrix.
"""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from typing import Iterable, Optional

import numpy as np

from .dobrushin import DobrushinReport, cij_softcore, fmt, g_function
from .lattice import Box
from .model import AprioriMeasure, SpinConfiguration


@dataclass(frozen=True)
class TransitionKernel:
    t: float
    matrix: np.ndarray

    def __call__(self, a: int, b: int) -> float:
        return float(self.matrix[a + 1, b + 1])


@dataclass(frozen=True)
class TransitionTimes:
    t_G: float
    t_0: Optional[float]
    gibbs_all_times: Optional[bool]


def flip_probability(t: float) -> float:
    """``p_t(1, -1) = (1 - exp(-2t)) / 2``."""
    return -0.5 * math.expm1(-2 * t)


def transition_matrix(t: float) -> TransitionKernel:
    if t < 0:
        raise ValueError("t must be >= 0")
    flip = flip_probability(t)
    stay = 1 - flip
    m = np.array([[stay, 0.0, flip],
                  [0.0, 1.0, 0.0],
                  [flip, 0.0, stay]])
    return TransitionKernel(t, m)


def evolve_config(config: SpinConfiguration, t: float, rng: np.random.Generator) -> SpinConfiguration:
    """Flip every occupied spin independently with probability ``p_t(1, -1)``.

    The frozen boundary layer evolves too; occupation never changes.
    """
    if t < 0:
        raise ValueError("t must be >= 0")
    out = config.copy()
    if t == 0:
        return out
    flips = rng.random(out.grid.shape) < flip_probability(t)
    out.grid[flips] *= -1
    return out


def t_G(alpha: AprioriMeasure) -> float:
    """Re-entrance time ``1/2 log((a1 + a-1) / (a1 - a-1))``; ``inf`` when symmetric."""
    big, small = max(alpha.p_plus, alpha.p_minus), min(alpha.p_plus, alpha.p_minus)
    if big == small:
        return math.inf
    return 0.5 * math.log((big + small) / (big - small))


def t_G_arccoth(alpha_r: float) -> float:
    """Same time via ``arccoth`` of the ratio ``alpha(1)/alpha(-1)``."""
    r = alpha_r if alpha_r >= 1 else 1 / alpha_r
    if r == 1:
        return math.inf
    if math.isinf(r):
        return 0.0
    return math.atanh(1 / r)


def gibbs_all_times(beta: float, d: int) -> bool:
    if d < 1:
        raise ValueError("d must be >= 1")
    return beta < math.log((2 * d + 1) / (2 * d - 1))


def _atanh_or_inf(x: float) -> float:
    return math.inf if x >= 1 else math.atanh(x)


def t0_softcore(alpha: AprioriMeasure, beta: float, d: int) -> Optional[float]:
    """Short-time Gibbs horizon from the alpha(0) = 0 threshold.

    ``None`` when g is undefined at ``(beta, 2d)``.
    """
    if alpha.p_plus <= 0 or alpha.p_minus <= 0:
        raise ValueError("t0 needs alpha(1) > 0 and alpha(-1) > 0")
    if gibbs_all_times(beta, d):
        return math.inf
    g = g_function(beta, 2 * d)
    if g is None:
        return None
    r = alpha.p_plus / alpha.p_minus
    return min(_atanh_or_inf(r * g / 2), _atanh_or_inf(g / (2 * r)))


def alpha_tilde(t: float, eta_value: int, alpha: AprioriMeasure) -> AprioriMeasure:
    """First-layer single-site measure given the evolved spin `eta_value`."""
    if t < 0:
        raise ValueError("t must be >= 0")
    p = transition_matrix(t)
    w = [p(w0, eta_value) * alpha[w0] for w0 in (-1, 0, 1)]
    total = sum(w)
    if total <= 0:
        raise ValueError(f"alpha has no mass compatible with evolved spin {eta_value}")
    return AprioriMeasure(*(x / total for x in w))


def q_t(t: float) -> float:
    """``p_t(1,1) / p_t(1,-1) = coth t``."""
    if t <= 0:
        return math.inf
    return 1 / math.tanh(t)


def h_t(t: float) -> float:
    """Effective Ising field ``1/2 log q_t = atanh(exp(-2t))``."""
    if t <= 0:
        return math.inf
    return math.atanh(math.exp(-2 * t))


def checkerboard(box: Box) -> SpinConfiguration:
    """+1 on sites with even coordinate sum, -1 elsewhere, boundary included."""
    cfg = SpinConfiguration(box, boundary_name="checkerboard")
    idx = np.indices(cfg.frame.shape)
    parity = sum(ix + lo for ix, lo in zip(idx, cfg.frame.lower)) % 2
    cfg.grid[...] = np.where(parity == 0, 1, -1).astype(np.int8)
    # padding corners are not boundary sites; keep them empty
    if box.d > 1:
        outside = np.zeros(cfg.frame.shape, dtype=int)
        for axis, n in enumerate(cfg.frame.shape):
            sl = [slice(None)] * box.d
            sl[axis] = 0
            outside[tuple(sl)] += 1
            sl[axis] = n - 1
            outside[tuple(sl)] += 1
        cfg.grid[outside >= 2] = 0
    return cfg


def first_layer_constrained_check(alpha: AprioriMeasure, beta: float, d: int, t: float) -> DobrushinReport:
    """Dobrushin check of the constrained first-layer model at time `t`.

    Evolved spin 0 pins the first layer to 0 and contributes nothing; the
    constant is the worse of the two occupied cases.
    """
    if t <= 0:
        raise ValueError("t must be > 0")
    B = 2 * d
    best_C, best_branches = -1.0, ()
    for eta in (1, -1):
        C, branches = cij_softcore(alpha_tilde(t, eta, alpha), beta, B)
        if C > best_C:
            best_C, best_branches = C, branches
    c = B * best_C
    return DobrushinReport(best_C, c, best_branches, c < 1)


def empirical_t1(alpha: AprioriMeasure, beta: float, d: int, t_grid: Iterable[float]) -> Optional[float]:
    """First grid time after which the constrained check passes on the rest of the grid.

    A numerical scan, not a proven bound.
    """
    ts = sorted(t_grid)
    ok = [first_layer_constrained_check(alpha, beta, d, t).unique for t in ts]
    for k in range(len(ts)):
        if all(ok[k:]):
            return ts[k]
    return None


def transition_times(alpha: AprioriMeasure, beta: Optional[float] = None, d: int = 2) -> TransitionTimes:
    tg = t_G(alpha)
    if beta is None:
        return TransitionTimes(tg, None, None)
    return TransitionTimes(tg, t0_softcore(alpha, beta, d), gibbs_all_times(beta, d))


def write_time_sweep_csv(alpha: AprioriMeasure, beta: float, d: int, ts: Iterable[float], fh) -> None:
    """Per-time quantities: q_t, h_t, alpha-tilde masses and the Dobrushin constant."""
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(["t", "quantity", "value"])
    for t in ts:
        rep = first_layer_constrained_check(alpha, beta, d, t)
        rows = [("q_t", q_t(t)), ("h_t", h_t(t)),
                ("alpha_tilde_plus_plus", alpha_tilde(t, 1, alpha).p_plus),
                ("alpha_tilde_minus_minus", alpha_tilde(t, -1, alpha).p_minus),
                ("dobrushin_c", rep.c_constant), ("unique", float(rep.unique))]
        for name, value in rows:
            w.writerow([fmt(t), name, fmt(value)])
