"""Compiled inner loops.

Everything here is called once or twice per simulated round, so these are
jitted with numba; the public wrappers live in ``omd`` and ``treeplex``.
Status codes: 0 converged, 1 iteration cap reached, 2 singular system.
"""

import math

import numpy as np
from numba import njit


@njit(cache=True)
def categorical(p, u):
    """Inverse-CDF draw from ``p`` using the uniform variate ``u``."""
    acc = 0.0
    n = p.shape[0]
    for i in range(n):
        acc += p[i]
        if u < acc:
            return i
    # u landed in the rounding slack above the cumulative sum
    for i in range(n - 1, -1, -1):
        if p[i] > 0.0:
            return i
    return n - 1


@njit(cache=True)
def _phi(c, lam):
    s = 0.0
    ds = 0.0
    for i in range(c.shape[0]):
        v = 1.0 / (c[i] + lam)
        s += v
        ds += v * v
    return s - 1.0, -ds


@njit(cache=True)
def simplex_multiplier(c, tol, max_iter):
    """Root of ``sum(1 / (c + lam)) = 1`` on ``(-min(c), inf)``.

    Safeguarded Newton: the function is decreasing and convex on the domain,
    every iterate tightens a bracket, and a Newton point outside the bracket
    is replaced by bisection. Returns ``(lam, phi, iterations, status)``.
    ``c`` must be strictly positive.
    """
    cmin = c.min()
    lo = -cmin + 1e-15 * abs(cmin)
    hi = 1.0
    while _phi(c, hi)[0] >= 0.0:
        hi *= 2.0
    lam = 0.0
    if lam <= lo or lam >= hi:
        lam = 0.5 * (lo + hi)
    phi, dphi = _phi(c, lam)
    it = 0
    while it < max_iter and abs(phi) > tol:
        if phi > 0.0:
            lo = lam
        else:
            hi = lam
        cand = lam - phi / dphi
        if not (lo < cand < hi):
            cand = 0.5 * (lo + hi)
        if cand == lam:
            break
        lam = cand
        phi, dphi = _phi(c, lam)
        it += 1
    status = 0 if abs(phi) <= tol else 1
    return lam, phi, it, status


@njit(cache=True)
def treeplex_newton(c, C, e, tol, max_iter):
    """Damped Newton on the concave dual of the treeplex Bregman projection.

    Maximises ``sum(log(c + C.T lam)) - e.lam``; its gradient is the
    constraint residual ``C mu - e`` with ``mu = 1 / (c + C.T lam)``. Uses
    the self-concordant step ``1 / (1 + decrement)`` until the decrement is
    below 1/4, then full steps, so iterates never leave the domain.
    Returns ``(mu, lam, residual, iterations, status)``.
    """
    m = C.shape[0]
    lam = np.zeros(m)
    mu = 1.0 / c
    res = 0.0
    for it in range(max_iter):
        z = c + C.T @ lam
        mu = 1.0 / z
        r = C @ mu - e
        res = np.max(np.abs(r))
        if res <= tol:
            return mu, lam, res, it, 0
        hess = (C * (mu * mu)) @ C.T
        try:
            d = np.linalg.solve(hess, r)
        except Exception:
            return mu, lam, res, it, 2
        dec2 = r @ d
        if not dec2 >= 0.0:
            return mu, lam, res, it, 2
        dec = math.sqrt(dec2)
        step = 1.0 if dec < 0.25 else 1.0 / (1.0 + dec)
        lam = lam + step * d
    z = c + C.T @ lam
    mu = 1.0 / z
    r = C @ mu - e
    res = np.max(np.abs(r))
    if res <= tol:
        return mu, lam, res, max_iter, 0
    return mu, lam, res, max_iter, 1


@njit(cache=True)
def logbarrier_update(policy, action, numerator, tau_t, eta_t, tol, max_iter):
    """Regularized IS estimate followed by the simplex mirror step, fused.

    Performs the same floating-point operations in the same order as the
    separate numpy path. Returns ``(new_policy, index, status, phi)``;
    status 3 flags a non-positive policy entry and 4 a non-positive step
    denominator, both at ``index``.
    """
    n = policy.shape[0]
    c = np.empty(n)
    for i in range(n):
        p = policy[i]
        if not p > 0.0:
            return c, i, 3, 0.0
        est = -tau_t / p
        if i == action:
            est += numerator / p
        c[i] = 1.0 / p + eta_t * est
        if not c[i] > 0.0:
            return c, i, 4, 0.0
    lam, phi, it, status = simplex_multiplier(c, tol, max_iter)
    if status != 0:
        return c, -1, status, phi
    out = np.empty(n)
    for i in range(n):
        out[i] = 1.0 / (c[i] + lam)
    return out, -1, 0, phi


@njit(cache=True, error_model="numpy")
def step_stats(old, new):
    """``(max ratio either way, min(new), |sum(new) - 1|)``."""
    r = 1.0
    lo = np.inf
    s = 0.0
    for i in range(old.shape[0]):
        a = new[i] / old[i]
        b = old[i] / new[i]
        if a > r:
            r = a
        if b > r:
            r = b
        if new[i] < lo:
            lo = new[i]
        s += new[i]
    return r, lo, abs(s - 1.0)
