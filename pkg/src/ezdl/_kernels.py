"""Compiled single-pass kernels for the sparseness-enforcing projection.

Everything here streams over the input vector with a constant number of
scalar accumulators, so the projection runs in linear time and constant
additional space.  The scan accumulates the shrunk sums ``sum(x_i - alpha)``
and ``sum((x_i - alpha)^2)`` directly instead of expanding them from the raw
norms: the individual subtractions are exact for nearby operands, which keeps
the computed shrinkage offset accurate even when the surviving entries are
almost tied.

Loops are written in select form (no data-dependent branches) so LLVM can
vectorize them under fastmath.
"""

import numpy as np
from numba import njit

SOLVER_BISECTION = 0
SOLVER_NEWTON = 1
SOLVER_NEWTON_SQ = 2
SOLVER_HALLEY = 3

STATUS_OK = 0
STATUS_ZERO_VECTOR = 1
STATUS_UNIFORM = 2
STATUS_NO_INTERVAL = 3
STATUS_NUMERIC = 4

_EVAL_CAP = 500


@njit(cache=True)
def _validity(x):
    """Nonzero when any entry is negative, NaN or infinite.

    Deliberately compiled without fastmath so the NaN comparisons hold; the
    integer accumulator keeps the loop vectorizable anyway.
    """
    acc = 0
    for i in range(x.shape[0]):
        xi = x[i]
        acc |= 1 if not (xi >= 0.0) else 0
        acc |= 1 if xi == np.inf else 0
    return acc


@njit(cache=True, fastmath=True)
def _minmax(x):
    """Smallest and largest entry; callers must have validated finiteness."""
    lo = np.inf
    hi = -np.inf
    for i in range(x.shape[0]):
        xi = x[i]
        if xi < lo:
            lo = xi
        if xi > hi:
            hi = xi
    return lo, hi


@njit(cache=True, fastmath=True)
def _second_max(x, xmax):
    """Largest entry strictly below ``xmax`` (-inf when all entries equal)."""
    s = -np.inf
    for i in range(x.shape[0]):
        xi = x[i]
        c = xi if xi < xmax else -np.inf
        if c > s:
            s = c
    return s


@njit(cache=True, fastmath=True)
def _scan_sums(x, alpha):
    """Shrunk sums over the support ``I = {i : x_i > alpha}``.

    Returns ``(s1, s2, d)`` with ``s1 = sum(x_i - alpha)``,
    ``s2 = sum((x_i - alpha)^2)`` and ``d = |I|`` as a float.
    """
    s1 = 0.0
    s2 = 0.0
    d = 0.0
    for i in range(x.shape[0]):
        t = x[i] - alpha
        v = t if t > 0.0 else 0.0
        s1 += v
        s2 += v * v
        d += 1.0 if t > 0.0 else 0.0
    return s1, s2, d


@njit(cache=True, fastmath=True)
def _scan_shifted(x, alpha, base):
    """Sums of ``x_i - base`` and its square over ``{i : x_i > alpha}``.

    With ``base`` chosen among the surviving entries the subtractions are
    exact for near-tied values, so the downstream closed-form offset keeps
    full precision even when the support is almost uniform.
    """
    s1 = 0.0
    s2 = 0.0
    for i in range(x.shape[0]):
        keep = x[i] > alpha
        t = x[i] - base
        v = t if keep else 0.0
        s1 += v
        s2 += v * v
    return s1, s2


@njit(cache=True, fastmath=True)
def _scan_neighbors(x, alpha):
    """Left and right neighbors of ``alpha`` among the entries of ``x``.

    ``xj`` is the largest entry <= alpha (-inf when none), ``xk`` the
    smallest entry > alpha (+inf when none).
    """
    xj = -np.inf
    xk = np.inf
    for i in range(x.shape[0]):
        xi = x[i]
        lo = xi if xi > alpha else np.inf
        hi = xi if xi <= alpha else -np.inf
        if lo < xk:
            xk = lo
        if hi > xj:
            xj = hi
    return xj, xk


@njit(cache=True)
def _psi_terms(s1, s2, d, lam1, lam2):
    """Auxiliary value and derivatives from the shrunk sums.

    Returns (psi, psi', psi'', psi_sq, psi_sq') where psi_sq is the variant
    with both norm ratios squared.
    """
    l2 = np.sqrt(s2 if s2 > 0.0 else 0.0)
    ratio_sq = s1 * s1 / s2
    psi = s1 / l2 - lam1 / lam2
    psi1 = (ratio_sq - d) / l2
    psi2 = 3.0 * psi1 * s1 / s2
    psi_sq = ratio_sq - (lam1 * lam1) / (lam2 * lam2)
    psi_sq1 = 2.0 * s1 / l2 * psi1
    return psi, psi1, psi2, psi_sq, psi_sq1


@njit(cache=True)
def _sign_change(s1, s2, d, alpha, xj, xk, lam1, lam2):
    """Sign-change test for the bracket ``[xj, xk)`` around ``alpha``.

    Evaluates ``lam2*l1(xj) >= lam1*l2(xj)`` and ``lam2*l1(xk) < lam1*l2(xk)``
    from the shrunk sums; both sides are compared in squared form whenever the
    left side is nonnegative, otherwise directly (the sign decides).
    """
    # xj == -inf encodes "no entry <= alpha"; the offset 0 plays that role.
    tj = alpha - (xj if xj > -np.inf else 0.0)
    l1j = s1 + d * tj
    l2j_sq = s2 + 2.0 * tj * s1 + d * tj * tj
    if l2j_sq < 0.0:
        l2j_sq = 0.0
    if l1j >= 0.0:
        c1 = (lam2 * l1j) * (lam2 * l1j) >= (lam1 * lam1) * l2j_sq
    else:
        c1 = False

    tk = alpha - xk
    l1k = s1 + d * tk
    l2k_sq = s2 + 2.0 * tk * s1 + d * tk * tk
    if l2k_sq < 0.0:
        l2k_sq = 0.0
    if l1k >= 0.0:
        c2 = (lam2 * l1k) * (lam2 * l1k) < (lam1 * lam1) * l2k_sq
    else:
        c2 = True
    return c1 and c2


@njit(cache=True)
def _exact_alpha(ell1, ell2_sq_shift, d, lam1, lam2, base):
    """Exact shrinkage offset for a known support, from sums shifted by ``base``.

    ``ell1``/``ell2_sq_shift`` are sums of ``x_i - base`` and its square over
    the support.  Returns (alpha, status).
    """
    a = d * ell2_sq_shift - ell1 * ell1
    if a < -1e-9 * d * ell2_sq_shift:
        return 0.0, STATUS_NUMERIC
    if a < 0.0:
        a = 0.0
    b = d * lam2 * lam2 - lam1 * lam1
    if b <= 0.0:
        return 0.0, STATUS_NUMERIC
    return base + (ell1 - lam1 * np.sqrt(a / b)) / d, STATUS_OK


@njit(cache=True, fastmath=True)
def _shrink_scale(x, alpha, lam2):
    """Apply soft shrinkage by ``alpha`` in place, rescale to L2 norm lam2.

    Returns the applied scale factor (0.0 signals an empty support).
    """
    n = x.shape[0]
    rho = 0.0
    for i in range(n):
        t = x[i] - alpha
        v = t if t > 0.0 else 0.0
        x[i] = v
        rho += v * v
    if rho <= 0.0:
        return 0.0
    beta = lam2 / np.sqrt(rho)
    for i in range(n):
        x[i] *= beta
    return beta


@njit(cache=True)
def _project(x, lam1, lam2, solver):
    """In-place projection onto the set with norms (lam1, lam2).

    Returns ``(status, alpha, beta, ell1, ell2_sq, d, evals)`` where ell1,
    ell2_sq are the raw L1 norm / squared L2 norm of the input sliced to the
    final support and evals counts auxiliary-function evaluations (the
    feasibility check at offset 0 included).
    """
    n = x.shape[0]
    if _validity(x) != 0:
        return STATUS_NUMERIC, 0.0, 0.0, 0.0, 0.0, 0, 0
    xmin, xmax = _minmax(x)
    if xmax <= 0.0:
        return STATUS_ZERO_VECTOR, 0.0, 0.0, 0.0, 0.0, 0, 0

    s1, s2, df = _scan_sums(x, 0.0)
    evals = 1
    psi0 = s1 / np.sqrt(s2) - lam1 / lam2

    if psi0 <= 1e-12 * (lam1 / lam2):
        # Sparseness must decrease (or already matches, up to rounding):
        # every coordinate survives, the offset is nonpositive and the
        # support is all n indices.  Entries equal to zero only matter when
        # psi0 == 0, where they stay zero.
        alpha, st = _exact_alpha(s1, s2, n, lam1, lam2, 0.0)
        if st != STATUS_OK:
            return st, 0.0, 0.0, 0.0, 0.0, 0, evals
        d_out = n
        if alpha >= 0.0:
            alpha = 0.0
            d_out = int(df + 0.5)
        beta = _shrink_scale(x, alpha, lam2)
        if beta <= 0.0:
            return STATUS_NUMERIC, alpha, 0.0, s1, s2, d_out, evals
        # raw norms over the support: entries equal to zero contribute
        # nothing to either sum, so the offset-0 sums already serve
        return STATUS_OK, alpha, beta, s1, s2, d_out, evals

    if xmax - xmin <= 1e-12 * xmax:
        return STATUS_UNIFORM, 0.0, 0.0, 0.0, 0.0, 0, evals

    x2 = _second_max(x, xmax)
    lo = 0.0
    up = x2
    alpha = lo + 0.5 * (up - lo)
    s1, s2, df = _scan_sums(x, alpha)
    xj, xk = _scan_neighbors(x, alpha)
    evals += 1
    finished = _sign_change(s1, s2, df, alpha, xj, xk, lam1, lam2)

    while not finished:
        psi, psi1, psi2, psi_sq, psi_sq1 = _psi_terms(s1, s2, df, lam1, lam2)
        if psi > 0.0:
            lo = alpha
        else:
            up = alpha
        if evals >= _EVAL_CAP or up - lo <= 4.5e-16 * up:
            # interval collapsed without a sign change: the zero does not
            # exist (tied entries make the projection non-unique)
            return STATUS_NO_INTERVAL, 0.0, 0.0, 0.0, 0.0, 0, evals
        if solver == SOLVER_BISECTION:
            alpha = lo + 0.5 * (up - lo)
        else:
            if solver == SOLVER_NEWTON:
                alpha = alpha - psi / psi1
            elif solver == SOLVER_NEWTON_SQ:
                alpha = alpha - psi_sq / psi_sq1
            else:  # Halley with clamped correction factor
                h = 1.0 - psi * psi2 / (2.0 * psi1 * psi1)
                if not h >= 0.5:  # also catches nan
                    h = 0.5
                elif h > 1.5:
                    h = 1.5
                alpha = alpha - psi / (h * psi1)
            if not (lo <= alpha <= up):  # nan-safe bisection fallback
                alpha = lo + 0.5 * (up - lo)
        s1, s2, df = _scan_sums(x, alpha)
        xj, xk = _scan_neighbors(x, alpha)
        evals += 1
        finished = _sign_change(s1, s2, df, alpha, xj, xk, lam1, lam2)

    d = int(df + 0.5)
    # one extra pass with the smallest surviving entry as base keeps the
    # closed form precise when the surviving entries almost tie
    s1b, s2b = _scan_shifted(x, alpha, xk)
    alpha_star, st = _exact_alpha(s1b, s2b, d, lam1, lam2, xk)
    if st != STATUS_OK:
        return st, 0.0, 0.0, 0.0, 0.0, d, evals
    # raw sliced norms, recovered from the shrunk sums
    ell1 = s1b + df * xk
    ell2_sq = s2b + 2.0 * xk * s1b + df * xk * xk
    beta = _shrink_scale(x, alpha_star, lam2)
    if beta <= 0.0:
        return STATUS_NUMERIC, alpha_star, 0.0, 0.0, 0.0, d, evals
    return STATUS_OK, alpha_star, beta, ell1, ell2_sq, d, evals
