"""Euclidean projection onto level sets of Hoyer's sparseness measure.

The projection of a nonnegative vector onto the set with L1 norm lambda1 and
L2 norm lambda2 is a soft-shrinkage followed by a rescale: there is a unique
offset ``alpha_star`` with ``p = beta_star * max(x - alpha_star, 0)``.  The
offset is the zero of a strictly decreasing auxiliary function and is found
by safeguarded scalar root-finding over constant-space streaming evaluations,
then computed exactly once the bracketing interval between two adjacent input
entries is identified.

Besides the linear-time operator this module ships two independent reference
implementations used as oracles and benchmark baselines: a sort-based
candidate-support search and the alternating simplex/hypercircle scheme.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterator, NamedTuple

import numpy as np

from . import _kernels as k
from .errors import (
    DimensionMismatch,
    DimensionTooSmall,
    EmptySupport,
    MaxRoundsExceeded,
    NonUniqueProjection,
    NumericalInconsistency,
    OutOfRange,
    ZeroVector,
)
from .sparseness import SparsenessTarget, target_norms

SOLVERS = ("bisection", "newton", "newton_sq", "halley")
DEFAULT_SOLVER = "newton_sq"

_SOLVER_CODES = {
    "bisection": k.SOLVER_BISECTION,
    "newton": k.SOLVER_NEWTON,
    "newton_sq": k.SOLVER_NEWTON_SQ,
    "halley": k.SOLVER_HALLEY,
}


class AuxEvaluation(NamedTuple):
    """Auxiliary function state at one offset (one streaming pass)."""

    psi: float
    psi_d1: float
    psi_d2: float
    psi_sq: float
    psi_sq_d1: float
    finished: bool
    ell1: float
    ell2_sq: float
    d: int
    eval_count_hint: int = 1


@dataclass
class ProjectionOutcome:
    """Projection result plus the scalars the gradient product needs.

    ``p`` aliases the input buffer when the input was a writable C-contiguous
    float64 array.  ``ell1`` and ``ell2_sq`` are the L1 norm and squared L2
    norm of the *original* input sliced to the support of ``p``.
    """

    p: np.ndarray
    ell1: float
    ell2_sq: float
    d: int
    alpha_star: float
    beta_star: float
    solver_evals: int


def _solver_code(solver: str) -> int:
    try:
        return _SOLVER_CODES[solver]
    except KeyError:
        raise OutOfRange(f"unknown solver {solver!r}, expected one of {SOLVERS}") from None


def _as_nonneg_buffer(x, target: SparsenessTarget) -> np.ndarray:
    x = np.asarray(x)
    if x.ndim != 1:
        raise DimensionMismatch(f"expected a vector, got shape {x.shape}")
    if x.size != target.n:
        raise DimensionMismatch(f"vector has {x.size} entries, target expects {target.n}")
    if x.dtype != np.float64 or not x.flags.c_contiguous or not x.flags.writeable:
        x = np.ascontiguousarray(x, dtype=np.float64)
    if k._validity(x) != 0:
        raise ValueError("entries must be nonnegative and finite")
    return x


def aux_eval(x, target: SparsenessTarget, alpha: float) -> AuxEvaluation:
    """Evaluate the auxiliary function and its derivatives at ``alpha``.

    One pass over ``x`` accumulates the shrunk norms over the support
    ``I = {i : x_i > alpha}`` and locates the neighboring entries of
    ``alpha``; ``finished`` reports whether the sign change of the auxiliary
    function happens between those neighbors, i.e. whether the support is
    already the projection's support.
    """
    x = _as_nonneg_buffer(x, target)
    if alpha < 0.0:
        raise OutOfRange(f"offset must be nonnegative, got {alpha}")
    xmin, xmax = k._minmax(x)
    if xmax <= 0.0:
        raise ZeroVector("cannot evaluate on the null vector")
    if alpha >= xmax:
        raise EmptySupport(f"offset {alpha} >= max entry {xmax} leaves no support")
    lam1, lam2 = target.lambda1, target.lambda2
    s1, s2, df = k._scan_sums(x, alpha)
    xj, xk = k._scan_neighbors(x, alpha)
    psi, psi1, psi2, psi_sq, psi_sq1 = k._psi_terms(s1, s2, df, lam1, lam2)
    finished = k._sign_change(s1, s2, df, alpha, xj, xk, lam1, lam2)
    ell1 = s1 + df * alpha
    ell2_sq = s2 + 2.0 * alpha * s1 + df * alpha * alpha
    return AuxEvaluation(psi, psi1, psi2, psi_sq, psi_sq1, bool(finished),
                         float(ell1), float(ell2_sq), int(df))


def project_nonneg(x, target: SparsenessTarget,
                   solver: str = DEFAULT_SOLVER) -> ProjectionOutcome:
    """Project a nonnegative vector onto the target norm set, in place.

    Runs the selected solver safeguarded by bisection on the interval from 0
    to the second-largest distinct entry; iterates that fall outside the
    bracket fall back to its midpoint.  When the input is already at least as
    sparse as the target the root search is skipped entirely and every
    coordinate survives.

    The input buffer is overwritten with the projection (no allocation that
    scales with the problem size is made).  Raises
    :class:`NonUniqueProjection` when all entries are equal while sparseness
    must increase, since any coordinate permutation of the result would be as
    close.
    """
    x = _as_nonneg_buffer(x, target)
    status, alpha, beta, ell1, ell2_sq, d, evals = k._project(
        x, target.lambda1, target.lambda2, _solver_code(solver))
    if status == k.STATUS_ZERO_VECTOR:
        raise ZeroVector("cannot project the null vector")
    if status == k.STATUS_UNIFORM:
        raise NonUniqueProjection(
            "all entries are equal; every permutation of the result is optimal")
    if status == k.STATUS_NO_INTERVAL:
        # The bracket collapsed without a sign-change certificate: the zero
        # coincides with an input entry to machine precision.  The sorted
        # reference path settles such borderline ties (and raises when the
        # projection is genuinely ambiguous); it allocates, but only on this
        # measure-zero input class.
        return _outcome_from_oracle(x, target, int(evals))
    if status != k.STATUS_OK:
        raise NumericalInconsistency("projection state violated a tolerance")
    return ProjectionOutcome(p=x, ell1=float(ell1), ell2_sq=float(ell2_sq),
                             d=int(d), alpha_star=float(alpha),
                             beta_star=float(beta), solver_evals=int(evals))


def project_signed(x, sigma_star: float, lambda2: float | None = None,
                   solver: str = DEFAULT_SOLVER) -> np.ndarray:
    """Sparseness-enforcing projection for vectors of any sign.

    Signs are recorded (zeros count as positive), the magnitudes are
    projected in the nonnegative orthant, and the signs are restored; every
    output coordinate is either zero or carries its input sign.  With
    ``lambda2=None`` the input's L2 norm is preserved, otherwise the result
    is scaled to the given norm.
    """
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 1:
        raise DimensionMismatch(f"expected a vector, got shape {x.shape}")
    if x.size < 2:
        raise DimensionTooSmall(f"need at least 2 entries, got {x.size}")
    norm = math.sqrt(float(x @ x))
    if norm == 0.0:
        raise ZeroVector("cannot project the null vector")
    lam2 = norm if lambda2 is None else float(lambda2)
    target = target_norms(sigma_star, x.size, lam2)
    signs = np.where(x < 0.0, -1.0, 1.0)
    magnitudes = np.abs(x)
    outcome = project_nonneg(magnitudes, target, solver)
    return signs * outcome.p


def grad_apply(outcome: ProjectionOutcome, target: SparsenessTarget, y) -> np.ndarray:
    """Product of the projection's gradient with ``y``, via dot products.

    On the support the gradient is a scaled identity plus a rank-2
    correction, which is algebraically the orthogonal projector onto the
    tangent space of the constraint set scaled by ``beta_star``: with the
    centered projection ``c = p - (lambda1/d) e`` (whose squared norm is
    ``(d*lambda2^2 - lambda1^2)/d``) the rank-2 term reduces to the
    projectors onto e and c.  Computing it that way avoids the catastrophic
    cancellation the expanded dyadic form suffers when the surviving input
    entries nearly tie.  Off the support the product is zero.

    Requires the projection to be differentiable at the original input,
    i.e. no input entry coincides with the shrinkage offset.
    """
    from .errors import DegenerateGradient

    p = outcome.p
    y = np.asarray(y, dtype=np.float64)
    if y.shape != p.shape:
        raise DimensionMismatch(f"vector has shape {y.shape}, expected {p.shape}")
    d = outcome.d
    a = d * outcome.ell2_sq - outcome.ell1 * outcome.ell1
    if a <= 0.0:
        raise DegenerateGradient("sliced input is uniform (d*l2^2 - l1^2 <= 0)")
    lam1, lam2 = target.lambda1, target.lambda2
    b = d * lam2 * lam2 - lam1 * lam1
    if b <= 0.0:
        raise NumericalInconsistency("support cannot carry the target norms")
    mask = p > 0.0
    pt = p[mask]
    yt = y[mask]
    # beta_star equals sqrt(b/a): the input sliced to the support is the
    # affine image p/beta + alpha of the projection, so their spreads are
    # proportional with factor beta
    scale = outcome.beta_star
    c = pt - (lam1 / d)
    cc = float(c @ c)
    w = yt - float(yt.sum()) / d - (float(c @ yt) / cc) * c
    out = np.zeros_like(p)
    out[mask] = scale * w
    return out


def _offset_for_support(selected: np.ndarray, lam1: float, lam2: float) -> float:
    """Closed-form shrinkage offset for a known set of surviving entries.

    Sums are taken relative to the smallest selected entry so that near-tied
    values lose no precision.
    """
    d = selected.size
    base = float(selected.min())
    t = selected - base
    s1 = float(t.sum())
    s2 = float(t @ t)
    a = max(d * s2 - s1 * s1, 0.0)
    b = d * lam2 * lam2 - lam1 * lam1
    return base + (s1 - lam1 * math.sqrt(a / b)) / d


def _outcome_from_oracle(x: np.ndarray, target: SparsenessTarget,
                         evals: int) -> ProjectionOutcome:
    """Build a full outcome via the sorted reference, writing into ``x``."""
    p = oracle_project_sorted(x, target)
    mask = p > 0.0
    selected = x[mask]
    d = int(mask.sum())
    alpha = _offset_for_support(selected, target.lambda1, target.lambda2)
    q_norm = float(np.linalg.norm(np.maximum(x - alpha, 0.0)))
    ell1 = float(selected.sum())
    ell2_sq = float(selected @ selected)
    x[:] = p
    return ProjectionOutcome(p=x, ell1=ell1, ell2_sq=ell2_sq, d=d,
                             alpha_star=alpha, beta_star=target.lambda2 / q_norm,
                             solver_evals=evals)


# --- sort-based reference implementation -------------------------------------

def oracle_project_sorted(x, target: SparsenessTarget) -> np.ndarray:
    """Ground-truth projection via sorted candidate-support search.

    Sorts the entries descending and tests every support size d (largest
    first): the closed-form offset for the top-d support is accepted when the
    support can carry the norms, all selected entries lie strictly above the
    offset and all excluded entries at or below it.  O(n log n) time, O(n)
    space; independent of the streaming implementation.
    """
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 1 or x.size != target.n:
        raise DimensionMismatch(f"vector has shape {x.shape}, target expects ({target.n},)")
    if k._validity(x) != 0:
        raise ValueError("entries must be nonnegative and finite")
    if not x.any():
        raise ZeroVector("cannot project the null vector")
    n = x.size
    lam1, lam2 = target.lambda1, target.lambda2

    s = np.sort(x)[::-1]
    ds = np.arange(1, n + 1, dtype=np.float64)
    csum = np.cumsum(s)
    csq = np.cumsum(s * s)

    # input already at least as sparse as the target (up to rounding): all
    # coordinates survive; mirrors the streaming algorithm's trivial branch
    if csum[-1] / math.sqrt(csq[-1]) - lam1 / lam2 <= 1e-12 * (lam1 / lam2):
        alpha_star = _offset_for_support(s, lam1, lam2)
        if alpha_star > 0.0:
            alpha_star = 0.0  # rounding residue; zeros must stay zero
        q = x - alpha_star
        return (lam2 / float(np.linalg.norm(q))) * q

    b = ds * lam2 * lam2 - lam1 * lam1
    a = np.maximum(ds * csq - csum * csum, 0.0)
    with np.errstate(divide="ignore", invalid="ignore"):
        alpha = (csum - lam1 * np.sqrt(a / b)) / ds
    valid = (b > 0.0) & np.isfinite(alpha) & (s > alpha)
    # excluded entries (the largest is s[d]) must not exceed the offset
    valid[:-1] &= s[1:] <= alpha[:-1]
    valid[0] = False  # a single surviving entry cannot carry lambda1 > lambda2
    idx = np.nonzero(valid)[0]
    if idx.size == 0:
        raise NonUniqueProjection(
            "no support admits the closed-form offset; input has tied entries")
    d = int(idx[-1]) + 1

    # recompute the offset from shift-invariant sums: with the smallest
    # selected entry as base the subtractions are exact for near-tied values
    alpha_star = _offset_for_support(s[:d], lam1, lam2)
    q = np.maximum(x - alpha_star, 0.0)
    nq = float(np.linalg.norm(q))
    if nq <= 0.0:
        raise NumericalInconsistency("empty support after shrinkage")
    return (lam2 / nq) * q


# --- alternating simplex/hypercircle reference --------------------------------

def _simplex_project(v: np.ndarray, total: float) -> np.ndarray:
    """Euclidean projection onto {a >= 0, sum(a) = total} (sort-based)."""
    u = np.sort(v)[::-1]
    css = np.cumsum(u)
    ranks = np.arange(1, v.size + 1)
    rho = np.nonzero(u * ranks > css - total)[0][-1]
    theta = (css[rho] - total) / (rho + 1.0)
    if theta < 0.0:
        theta = 0.0
    return np.maximum(v - theta, 0.0)


def _alternating_iterates(x: np.ndarray, target: SparsenessTarget) -> Iterator[tuple[np.ndarray, int]]:
    """Yield the hypercircle iterates (point, support size) until feasible."""
    n = x.size
    lam1, lam2 = target.lambda1, target.lambda2
    r = x + (lam1 - float(x.sum())) / n
    support = np.ones(n, dtype=bool)
    while True:
        d = int(support.sum())
        rad_sq = lam2 * lam2 - lam1 * lam1 / d
        if rad_sq < 0.0:
            raise NumericalInconsistency(
                f"support of size {d} cannot carry the target norms")
        center = lam1 / d
        diff = r[support] - center
        dist_sq = float(diff @ diff)
        if dist_sq <= 0.0:
            raise NonUniqueProjection(
                "iterate coincides with the simplex barycenter")
        delta = math.sqrt(rad_sq / dist_sq)
        s = np.zeros(n)
        s[support] = delta * r[support] + (1.0 - delta) * center
        yield s, d
        if np.all(s[support] >= 0.0):
            return
        r = _simplex_project(s, lam1)
        support = r > 0.0


def alternating_project(x, target: SparsenessTarget,
                        max_rounds: int | None = None) -> np.ndarray:
    """Projection by alternating simplex and hypercircle projections.

    The finite predecessor scheme of the streaming algorithm: project onto
    the norm hyperplane, then alternate hypercircle and simplex projections;
    the support shrinks strictly each round until the iterate is feasible.
    Quasi-linear per round (each simplex projection sorts), used as oracle
    and benchmark baseline.
    """
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 1 or x.size != target.n:
        raise DimensionMismatch(f"vector has shape {x.shape}, target expects ({target.n},)")
    if k._validity(x) != 0:
        raise ValueError("entries must be nonnegative and finite")
    if not x.any():
        raise ZeroVector("cannot project the null vector")
    xmin, xmax = k._minmax(x)
    if xmax - xmin <= 1e-12 * xmax:
        raise NonUniqueProjection(
            "all entries are equal; every permutation of the result is optimal")
    if max_rounds is None:
        max_rounds = x.size
    result = None
    rounds = 0
    for s, _ in _alternating_iterates(x, target):
        result = s
        rounds += 1
        if rounds > max_rounds:
            raise MaxRoundsExceeded(f"support still unstable after {max_rounds} rounds")
    return result
