"""Ready-made systems and randomised generators used across the test-bench.

The fixed instances are the classical calibration targets: the middle-third
Cantor system (dimension log 2 / log 3 under uniform weights), a uniform
two-map system whose invariant measure is Lebesgue on [0, 1], a three-map
quarter-scale family with one movable translation, and a four-map
fifth-scale system supported on [2, 3] with dimension log 4 / log 5.

The random generators produce (optionally well-separated) systems and
discrete measures for property tests; they take a Generator so callers
control reproducibility.
"""

from __future__ import annotations

import numpy as np

from .ifs import WIFS, similitude_1d
from .measures import DiscreteMeasure

__all__ = [
    "cantor",
    "uniform_halves",
    "quarter_maps",
    "four_fifths_shifted",
    "random_wifs",
    "random_ssc_wifs",
    "random_measure",
]


def cantor(scale: float = 1.0 / 3.0, probs=(0.5, 0.5)) -> WIFS:
    """Two maps ``x -> s x`` and ``x -> s x + (1 - s)`` on [0, 1]."""
    maps = (similitude_1d(scale, 0.0), similitude_1d(scale, 1.0 - scale))
    return WIFS(maps=maps, probs=tuple(float(p) for p in probs))


def uniform_halves() -> WIFS:
    """``{x/2, x/2 + 1/2}`` with equal weights: Lebesgue measure on [0, 1]."""
    return cantor(scale=0.5)


def quarter_maps(t: float = 0.2) -> WIFS:
    """Three quarter-scale maps ``{x/4, x/4 + t, x/4 + 3/4}`` on [0, 1].

    For t = 0.2 the level-2 words "11", "21", "31" have images
    [0, 1/16], [0.2, 0.2625], [0.75, 0.8125] - pairwise disjoint even
    though the level-1 images [0, 1/4] and [0.2, 0.45] overlap.
    """
    maps = (similitude_1d(0.25, 0.0), similitude_1d(0.25, t), similitude_1d(0.25, 0.75))
    return WIFS(maps=maps, probs=(1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0))


def four_fifths_shifted() -> WIFS:
    """Four fifth-scale maps with attractor in [2, 3], dimension log4/log5.

    The gaps between consecutive images all have width 1/15; the support
    stays well away from the origin, which makes the system handy for
    convolution and mixture experiments against [0, 1]-supported measures.
    """
    scale = 0.2
    maps = tuple(similitude_1d(scale, 1.6 + k * (0.8 / 3.0)) for k in range(4))
    return WIFS(maps=maps, probs=(0.25, 0.25, 0.25, 0.25))


def random_wifs(rng: np.random.Generator, n_min: int = 2, n_max: int = 6,
                scale_lo: float = 0.05, scale_hi: float = 0.8) -> WIFS:
    """A random one-dimensional system with zero translations.

    Scales are uniform in (scale_lo, scale_hi) and the weight vector is a
    normalised uniform draw.  Because every translation is zero the maps all
    share the fixed point 0; this is only meant for exercising the spectral
    side (dimension solvers), not separation.
    """
    n = int(rng.integers(n_min, n_max + 1))
    scales = rng.uniform(scale_lo, scale_hi, size=n)
    probs = rng.uniform(0.1, 1.0, size=n)
    probs = probs / probs.sum()
    maps = tuple(similitude_1d(float(s), 0.0) for s in scales)
    return WIFS(maps=maps, probs=tuple(float(p) for p in probs))


def random_ssc_wifs(rng: np.random.Generator, n_min: int = 2, n_max: int = 6,
                    min_gap: float = 1e-3) -> WIFS:
    """A random strictly separated system on [0, 1].

    Draws scales that sum to at most 0.9, then lays the image intervals
    left-to-right, splitting the leftover length into N+1 positive gaps so
    consecutive images are at least ``min_gap`` apart.
    """
    n = int(rng.integers(n_min, n_max + 1))
    scales = rng.uniform(0.05, 0.8, size=n)
    total = scales.sum()
    if total > 0.9:
        scales *= 0.9 / total
        total = scales.sum()
    slack = 1.0 - total
    if slack <= (n + 1) * min_gap:
        raise ValueError(f"min_gap={min_gap} leaves no room for {n} images")
    cuts = np.sort(rng.uniform(0.0, 1.0, size=n))
    gaps = np.diff(np.concatenate([[0.0], cuts, [1.0]]))
    gaps = min_gap + (slack - (n + 1) * min_gap) * gaps
    offsets = np.cumsum(gaps[:-1] + np.concatenate([[0.0], scales[:-1]]))
    probs = rng.uniform(0.1, 1.0, size=n)
    probs = probs / probs.sum()
    maps = tuple(similitude_1d(float(s), float(o)) for s, o in zip(scales, offsets))
    return WIFS(maps=maps, probs=tuple(float(p) for p in probs))


def random_measure(rng: np.random.Generator, max_atoms: int = 8, dim: int = 1,
                   span: float = 1.0) -> DiscreteMeasure:
    """A random discrete probability measure with at most ``max_atoms`` atoms."""
    k = int(rng.integers(1, max_atoms + 1))
    atoms = rng.uniform(-span, span, size=(k, dim))
    weights = rng.uniform(0.1, 1.0, size=k)
    weights = weights / weights.sum()
    return DiscreteMeasure(atoms=atoms, weights=weights)
