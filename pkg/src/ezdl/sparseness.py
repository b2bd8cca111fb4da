"""Hoyer's sparseness measure and target-norm bookkeeping.

The measure maps a nonzero vector to ``(sqrt(n) - l1/l2) / (sqrt(n) - 1)``,
which is 1 for a vector with a single nonzero entry and 0 for a uniform one.
A target sparseness degree ``sigma_star`` together with a free scale ``l2``
determines the pair of norm targets ``(lambda1, lambda2)`` that the
projection operators enforce.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DimensionTooSmall, InfeasibleSupport, OutOfRange, ZeroVector

# sigma_star closer than this to 0 or 1 makes lambda1/lambda2 degenerate and
# the constraint set numerically ill-conditioned; reject instead of clamping.
SIGMA_MARGIN = 1e-9


@dataclass(frozen=True)
class SparsenessTarget:
    """Target sparseness degree with its derived norm pair.

    Attributes
    ----------
    n : int
        Vector dimension (>= 2).
    sigma_star : float
        Target sparseness in (0, 1).
    lambda1 : float
        Target L1 norm.
    lambda2 : float
        Target L2 norm; the free scale parameter.
    """

    n: int
    sigma_star: float
    lambda1: float
    lambda2: float


def hoyer_sigma(x) -> float:
    """Sparseness degree of ``x`` under Hoyer's normalized L1/L2 measure.

    Parameters
    ----------
    x : array_like
        Real vector with at least 2 entries, not all zero.

    Returns
    -------
    float in [0, 1]; 1 means a single nonzero entry, 0 means all equal.
    """
    x = np.asarray(x, dtype=np.float64)
    n = x.size
    if n < 2:
        raise DimensionTooSmall(f"need at least 2 entries, got {n}")
    scale = float(np.abs(x).max())
    if scale == 0.0:
        raise ZeroVector("cannot measure sparseness of the null vector")
    y = np.abs(x) / scale  # scale-invariant; keeps subnormals from underflowing
    l2 = math.sqrt(float(y @ y))
    l1 = float(y.sum())
    rt = math.sqrt(n)
    # rounding may land a hair outside the mathematical range [0, 1]
    return min(1.0, max(0.0, (rt - l1 / l2) / (rt - 1.0)))


def target_norms(sigma_star: float, n: int, lambda2: float) -> SparsenessTarget:
    """Derive the L1 target from a sparseness degree and an L2 scale.

    ``lambda1 = lambda2 * (sqrt(n) - sigma_star * (sqrt(n) - 1))``, so that a
    vector with norms (lambda1, lambda2) has sparseness exactly sigma_star.
    """
    if n < 2:
        raise DimensionTooSmall(f"need dimension >= 2, got {n}")
    if not (SIGMA_MARGIN < sigma_star < 1.0 - SIGMA_MARGIN):
        raise OutOfRange(
            f"sigma_star must lie in ({SIGMA_MARGIN}, {1 - SIGMA_MARGIN}), got {sigma_star}"
        )
    if not lambda2 > 0.0:
        raise OutOfRange(f"lambda2 must be positive, got {lambda2}")
    rt = math.sqrt(n)
    lambda1 = lambda2 * (rt - sigma_star * (rt - 1.0))
    return SparsenessTarget(n=int(n), sigma_star=float(sigma_star),
                            lambda1=float(lambda1), lambda2=float(lambda2))


def sigma_from_norms(lambda1: float, lambda2: float, n: int) -> float:
    """Invert :func:`target_norms`: sparseness degree of the norm pair."""
    rt = math.sqrt(n)
    return (rt - lambda1 / lambda2) / (rt - 1.0)


def construct_member(target: SparsenessTarget, d: int) -> np.ndarray:
    """Analytic point meeting the target norms on a ``d``-sized support.

    The first ``d - 1`` coordinates carry a small positive value, the d-th a
    large one, the rest are zero; the result has L1 norm lambda1, L2 norm
    lambda2 and therefore sparseness sigma_star exactly.

    Requires ``d * lambda2**2 > lambda1**2`` (a d-sized support can carry the
    norm pair), else raises :class:`InfeasibleSupport`.
    """
    n, l1, l2 = target.n, target.lambda1, target.lambda2
    if not 2 <= d <= n:
        raise OutOfRange(f"support size must lie in [2, {n}], got {d}")
    room = d * l2 * l2 - l1 * l1
    if room <= 0.0:
        raise InfeasibleSupport(
            f"support of size {d} cannot carry norms ({l1}, {l2})"
        )
    psi = (l1 - math.sqrt(room) / math.sqrt(d - 1.0)) / d
    omega = l1 - (d - 1.0) * psi
    out = np.zeros(n)
    out[: d - 1] = psi
    out[d - 1] = omega
    return out
