"""Deterministic quasi-random sample sets.

All verification batteries run on fixed point sets so that reports are
byte-reproducible.  We use an unscrambled Halton sequence (bases 2, 3,
5, ...) mapped affinely into the chart's domain box, shrunk toward the
box center so finite-difference stencils never leave the box.  The
descriptor string of every sample set is recorded in CSV output.
"""
from __future__ import annotations

import numpy as np

_PRIMES = (2, 3, 5, 7, 11, 13, 17, 19, 23, 29)

#: fraction of each half-width of the domain box that sampling may use.
INTERIOR_FRACTION = 0.9

#: default skip of initial Halton indices (the first few points cluster).
DEFAULT_SKIP = 20


def halton(index: int, base: int) -> float:
    """Radical-inverse of ``index`` in the given base, in (0, 1)."""
    f, r = 1.0, 0.0
    i = index
    while i > 0:
        f /= base
        r += f * (i % base)
        i //= base
    return r


def halton_points(count: int, dims: int, skip: int = DEFAULT_SKIP) -> np.ndarray:
    """``count`` points of the unscrambled Halton sequence in [0,1)^dims."""
    if dims > len(_PRIMES):
        raise ValueError(f"halton_points supports at most {len(_PRIMES)} dims")
    out = np.empty((count, dims))
    for k in range(count):
        for j in range(dims):
            out[k, j] = halton(skip + 1 + k, _PRIMES[j])
    return out


def box_points(box: np.ndarray, count: int, skip: int = DEFAULT_SKIP,
               interior: float = INTERIOR_FRACTION) -> np.ndarray:
    """Sample ``count`` quasi-random points from a (d, 2) domain box.

    Points are confined to the central ``interior`` fraction of the box
    so that FD stencils of moderate reach stay inside it.
    """
    box = np.asarray(box, float)
    d = box.shape[0]
    lo, hi = box[:, 0], box[:, 1]
    center = 0.5 * (lo + hi)
    half = 0.5 * (hi - lo) * interior
    unit = halton_points(count, d, skip)
    return center + (2.0 * unit - 1.0) * half


def fiber_points(codim: int, count: int, scale: float = 0.75,
                 skip: int = DEFAULT_SKIP + 64) -> np.ndarray:
    """Quasi-random fiber (normal) component vectors in [-scale, scale]^codim.

    A distinct Halton skip keeps fiber coordinates decorrelated from the
    base samples they get paired with.
    """
    unit = halton_points(count, codim, skip)
    return (2.0 * unit - 1.0) * scale


def sample_normal_points(sub, count: int = 32, t_scale: float = 0.75,
                         skip: int = DEFAULT_SKIP):
    """Paired (u, t) samples for a submanifold; returns (U, T, descriptor).

    U has shape (count, d), T has shape (count, codim).  The descriptor
    string identifies the sample set for reproducibility records.
    """
    U = box_points(sub.domain_box, count, skip)
    T = fiber_points(sub.codim, count, t_scale, skip + 64)
    desc = (f"halton(skip={skip},interior={INTERIOR_FRACTION},"
            f"t_scale={t_scale},n={count})")
    return U, T, desc
