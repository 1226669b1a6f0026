"""Quantization-dimension solvers for weighted IFS.

For order ``r > 0`` the dimension candidate ``kappa_r`` is the unique
positive solution of

    sum_i (p_i * s_i**r) ** (kappa / (r + kappa)) = 1,

where ``s_i`` are the contraction ratios and ``p_i`` the weights.  The
substitution ``theta = kappa / (r + kappa)`` maps the problem onto
``theta in (0, 1)``, where ``g(theta) = sum_i (p_i s_i**r)**theta`` is
strictly decreasing from N down to ``sum_i p_i s_i**r < 1``; a plain
bisection is therefore exact-to-bracket and immune to bad starting points.
The reported dimension clamps at the ambient dimension:
``d_r = min(kappa_r, m)``.

The order-zero (geometric mean error) dimension has the closed form
``d0 = sum_i p_i log p_i / sum_i p_i log s_i`` and is served separately;
``solve_kappa`` refuses ``r <= 0`` rather than silently extrapolating.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .errors import UseD0Path
from .ifs import WIFS
from .util import parallel_map

__all__ = [
    "DimensionResult",
    "KappaCurve",
    "solve_kappa",
    "quantization_dimension",
    "d0_dimension",
    "kappa_curve",
    "similarity_dimension",
]

#: Bisection stops when the bracket is this narrow ...
BRACKET_TOL = 1e-15
#: ... or the equation residual is this small, whichever happens first.
RESIDUAL_TOL = 1e-12
MAX_ITER = 200

#: Slack used when flagging a curve as monotone.
MONOTONE_SLACK = 1e-10


@dataclass(frozen=True)
class DimensionResult:
    """Solution record for one order r.

    kappa_r    unclamped root of the implicit equation
    d_r        min(kappa_r, ambient dimension)
    theta      kappa_r / (r + kappa_r), the solved variable
    residual   |g(theta) - 1| at the returned theta
    iterations bisection steps taken
    """

    kappa_r: float
    d_r: float
    theta: float
    residual: float
    iterations: int


@dataclass(frozen=True)
class KappaCurve:
    """kappa_r along a grid of orders, with a monotonicity verdict."""

    rs: tuple[float, ...]
    results: tuple[DimensionResult, ...]
    monotone: bool

    def rows(self) -> list[tuple[float, float, float]]:
        """(r, kappa_r, d_r) triples, handy for tabulation."""
        return [(r, res.kappa_r, res.d_r) for r, res in zip(self.rs, self.results)]


def _bisect_decreasing(g: Callable[[float], float], lo: float, hi: float) -> tuple[float, float, int]:
    """Root of a strictly decreasing g with g(lo) > 0 > g(hi).

    Returns (midpoint, |g(midpoint)|, iterations).  Stops when the bracket
    shrinks below BRACKET_TOL, the residual drops below RESIDUAL_TOL, or
    MAX_ITER steps were taken.
    """
    mid = 0.5 * (lo + hi)
    val = g(mid)
    it = 0
    while it < MAX_ITER:
        it += 1
        if val > 0.0:
            lo = mid
        else:
            hi = mid
        mid = 0.5 * (lo + hi)
        val = g(mid)
        if abs(val) < RESIDUAL_TOL or (hi - lo) < BRACKET_TOL:
            break
    return mid, abs(val), it


def solve_kappa(wifs: WIFS, r: float) -> DimensionResult:
    """Solve the implicit equation for the order-r dimension candidate.

    Raises
    ------
    UseD0Path
        for ``r <= 0``; the order-zero dimension has its own closed form.
    """
    if r <= 0.0:
        raise UseD0Path(f"solve_kappa needs r > 0 (got {r}); use d0_dimension for order zero")
    m = wifs.dim
    if wifs.n_maps == 1:
        return DimensionResult(0.0, 0.0, 0.0, 0.0, 0)
    bases = wifs.probs * wifs.scales ** r

    def g(theta: float) -> float:
        return float(np.sum(bases ** theta)) - 1.0

    theta, residual, iterations = _bisect_decreasing(g, 0.0, 1.0)
    kappa = r * theta / (1.0 - theta)
    return DimensionResult(kappa, min(kappa, float(m)), theta, residual, iterations)


def quantization_dimension(wifs: WIFS, r: float) -> float:
    """The clamped dimension ``min(kappa_r, ambient dim)``."""
    return solve_kappa(wifs, r).d_r


def d0_dimension(wifs: WIFS) -> float:
    """Closed-form order-zero (geometric mean error) dimension.

    ``sum_i p_i log p_i / sum_i p_i log s_i``; a single-map system has
    dimension zero.
    """
    if wifs.n_maps == 1:
        return 0.0
    p = wifs.probs
    s = wifs.scales
    return float(np.sum(p * np.log(p)) / np.sum(p * np.log(s)))


def kappa_curve(wifs: WIFS, r_grid: Sequence[float]) -> KappaCurve:
    """Solve along a strictly increasing grid of positive orders.

    The ``monotone`` flag records whether kappa_r never decreases along the
    grid beyond a 1e-10 slack.  An empty grid yields an empty curve.
    """
    rs = tuple(float(r) for r in r_grid)
    if any(r <= 0.0 for r in rs):
        raise UseD0Path("kappa_curve needs strictly positive orders")
    if any(b <= a for a, b in zip(rs, rs[1:])):
        raise ValueError("r grid must be strictly increasing")
    results = tuple(parallel_map(lambda r: solve_kappa(wifs, r), rs))
    kappas = [res.kappa_r for res in results]
    monotone = all(b >= a - MONOTONE_SLACK for a, b in zip(kappas, kappas[1:]))
    return KappaCurve(rs, results, monotone)


def similarity_dimension(wifs: WIFS) -> float:
    """Root of ``sum_i s_i**D = 1``, solved by the same bisection kernel.

    This is the natural ceiling for kappa_r: as r grows, kappa_r increases
    toward it.
    """
    s = wifs.scales
    if wifs.n_maps == 1:
        return 0.0

    def g(d: float) -> float:
        return float(np.sum(s ** d)) - 1.0

    hi = 1.0
    while g(hi) > 0.0:
        hi *= 2.0
        if hi > 2.0 ** 60:
            raise RuntimeError("similarity dimension bracket failed to close")
    d, _, _ = _bisect_decreasing(g, 0.0, hi)
    return d
