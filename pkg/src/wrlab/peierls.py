"""Peierls constant, the contour bound a(beta, lambda) and the phase-transition certificate."""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from typing import Iterable, Optional

from .dobrushin import fmt

DIVERGED = math.inf


@dataclass(frozen=True)
class PeierlsCertificate:
    rho: float
    a_value: float  # math.inf when the contour sum diverges
    certified: bool

    @property
    def diverged(self) -> bool:
        return math.isinf(self.a_value)

    @property
    def origin_lower_bound(self) -> float:
        """Lower bound on the plus-boundary probability of a plus spin at the origin."""
        return 1 - 2 * self.a_value if self.certified else 0.0


def peierls_constant(beta: float, lam: float, d: int) -> float:
    """``min(beta, log lam) / (2d + 1)``; hard-core is ``beta = inf``."""
    if not lam > 0:
        raise ValueError("lambda must be positive")
    return min(beta, math.log(lam)) / (2 * d + 1)


def a_from_x(x: float) -> float:
    """``x/(1-x)^2 + 1/(1-x) - 1``, or ``inf`` when ``x >= 1``."""
    if x >= 1:
        return DIVERGED
    return x / (1 - x) ** 2 + 1 / (1 - x) - 1


def upper_bound_a(beta: float, lam: float, d: int) -> float:
    rho = peierls_constant(beta, lam, d)
    return a_from_x(math.exp(-rho) * (2 * d) ** 2)


def certify_phase_transition(beta: float, lam: float, d: int) -> PeierlsCertificate:
    """Certificate for coexistence of the plus and minus phases at h = 0."""
    if d < 2:
        raise ValueError("the Peierls certificate needs d >= 2")
    rho = peierls_constant(beta, lam, d)
    a = upper_bound_a(beta, lam, d)
    return PeierlsCertificate(rho, a, a < 0.5)


def find_critical_lambda(beta: float, d: int, tol: float = 1e-6) -> Optional[float]:
    """Smallest lambda (to relative `tol`) with ``a(beta, lambda) < 1/2``.

    Returns ``None`` when no lambda can certify, i.e. when the bound at
    ``log lambda >= beta`` is still too weak.
    """
    if d < 2:
        raise ValueError("the Peierls certificate needs d >= 2")
    if upper_bound_a(beta, math.inf, d) >= 0.5:
        return None
    # bracket in log(lambda) then bisect
    lo, hi = 0.0, 1.0
    while upper_bound_a(beta, math.exp(hi), d) >= 0.5:
        lo, hi = hi, 2 * hi
    while math.exp(hi - lo) - 1 > tol:
        mid = 0.5 * (lo + hi)
        if upper_bound_a(beta, math.exp(mid), d) < 0.5:
            hi = mid
        else:
            lo = mid
    return math.exp(hi)


def write_peierls_csv(rows: Iterable[tuple[float, float]], d: int, fh) -> None:
    """One line per (beta, lambda) pair."""
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(["beta", "lambda", "rho", "a_value", "certified"])
    for beta, lam in rows:
        cert = certify_phase_transition(beta, lam, d)
        w.writerow([fmt(beta), fmt(lam), fmt(cert.rho), fmt(cert.a_value),
                    "true" if cert.certified else "false"])
