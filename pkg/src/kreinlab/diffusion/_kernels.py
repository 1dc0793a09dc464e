"""Compiled simulation loops.

Every drift handled here has the shape

    b(x) = (delta - 1) / (2 x) + lin * x + g(x) / x,

where ``g(x) = x * extra(x)`` is read from a table uniform in ``log x``.
Each path reseeds numba's generator from its own entry of ``seeds`` so the
output does not depend on loop order.
"""

import math

import numpy as np
from numba import njit

CACHE = True


@njit(cache=CACHE)
def table_g(x, logx0, dlog, gvals):
    """Linear interpolation of ``g`` in ``log x``; linear in ``x`` outside the grid."""
    n = gvals.shape[0]
    if n == 0:
        return 0.0
    if x <= 0.0:
        return 0.0
    u = (math.log(x) - logx0) / dlog
    if u <= 0.0:
        x0 = math.exp(logx0)
        return gvals[0] * x / x0
    if u >= n - 1:
        x_hi = math.exp(logx0 + (n - 1) * dlog)
        x_lo = math.exp(logx0 + (n - 2) * dlog)
        slope = (gvals[n - 1] - gvals[n - 2]) / (x_hi - x_lo)
        return gvals[n - 1] + slope * (x - x_hi)
    i = int(u)
    w = u - i
    return (1.0 - w) * gvals[i] + w * gvals[i + 1]


@njit(cache=CACHE)
def hit_zero(
    x0, delta, lin, logx0, dlog, gvals, dt_cap, du_max, eps_hit, res_mu, res_tilt, horizon, heun, seeds,
    out_t, out_clock, out_censored,
):
    """First hitting time of 0 in logarithmic (Lamperti) coordinates.

    With ``xi = log X`` and clock ``du = dt / X^2`` the radial part of the
    drift becomes the constant ``(delta - 2)/2``, so the scheme

        xi' = xi + ((delta - 2)/2 + lin X^2 + g(X)) du + sqrt(du) Z

    is exact for a Bessel process. With ``heun`` the drift is averaged over
    the Euler predictor and the endpoint, which is weakly second order
    because the noise is additive. ``du = min(du_max, dt_cap / X^2)``; real
    time and the clock ``4 int X^2 dt`` are accumulated by the trapezoid rule.
    Once ``X <= eps_hit`` the remaining time is drawn from the Bessel law
    ``X^2 / (2 gamma_a)`` with ``a = 1 - delta/2``, mapped through
    ``log1p(2 res_mu s) / (2 res_mu)`` when ``res_mu > 0`` (exact for the
    radial OU process with rate ``res_mu``). Kinds pushed down by killing at
    rate ``res_tilt`` are the ``exp(-res_tilt T_0)``-tilt of that law, drawn
    by rejection. The clock residual is dropped.
    """
    n = seeds.shape[0]
    a_loc = 1.0 - 0.5 * delta
    drift0 = 0.5 * (delta - 2.0)
    for p in range(n):
        np.random.seed(seeds[p])
        xi = math.log(x0)
        x = x0
        t = 0.0
        clock = 0.0
        censored = False
        while True:
            x2 = x * x
            du = du_max
            if dt_cap * 1.0 < du * x2:
                du = dt_cap / x2
            g = lin * x2 + table_g(x, logx0, dlog, gvals)
            dw = math.sqrt(du) * np.random.standard_normal()
            xi_new = xi + (drift0 + g) * du + dw
            if heun:
                # trapezoidal drift; the noise is additive in log coordinates
                xp = math.exp(xi_new)
                gp = lin * xp * xp + table_g(xp, logx0, dlog, gvals)
                xi_new = xi + (drift0 + 0.5 * (g + gp)) * du + dw
            x_new = math.exp(xi_new)
            xn2 = x_new * x_new
            t += 0.5 * du * (x2 + xn2)
            clock += 2.0 * du * (x2 * x2 + xn2 * xn2)
            if t > horizon:
                censored = True
                break
            xi = xi_new
            x = x_new
            if x <= eps_hit:
                while True:
                    s = xn2 / (2.0 * np.random.gamma(a_loc, 1.0))
                    if res_mu > 0.0:
                        s = math.log1p(2.0 * res_mu * s) / (2.0 * res_mu)
                    if res_tilt <= 0.0 or np.random.random() < math.exp(-res_tilt * s):
                        break
                t += s
                censored = t > horizon
                break
        out_t[p] = t
        out_clock[p] = clock
        out_censored[p] = censored


@njit(cache=CACHE)
def _implicit_step(x, dt, delta, lin, logx0, dlog, gvals, noise):
    """Drift-implicit Euler step for the radial part, explicit for the rest.

    Solves ``x' = y + (delta - 1) dt / (2 x')`` with ``y`` the explicit part.
    Without a positive root the path is taken to have touched 0 and is
    regenerated from the law of the Bessel process started at 0 after
    ``dt``, i.e. ``sqrt(dt * chi2_delta)``.
    """
    rest = lin * x
    if x > 0.0:
        rest += table_g(x, logx0, dlog, gvals) / x
    y = x + rest * dt + noise * math.sqrt(dt) * np.random.standard_normal()
    disc = y * y + 2.0 * (delta - 1.0) * dt
    if disc >= 0.0:
        root = 0.5 * (y + math.sqrt(disc))
        if root > 0.0:
            return root, False
    if noise == 0.0:
        return 0.0, True
    return math.sqrt(dt * 2.0 * np.random.gamma(0.5 * delta, 1.0)), True


@njit(cache=CACHE)
def _adaptive_dt(x, kappa, dt_min, dt_max):
    dt = (x / kappa) ** 2
    if dt < dt_min:
        return dt_min
    if dt > dt_max:
        return dt_max
    return dt


@njit(cache=CACHE)
def reflect_paths(
    x0, delta, lin, logx0, dlog, gvals, grid, dt_min, dt_max, kappa, noise, seeds, out,
):
    """Reflecting paths recorded at the increasing ``grid`` (``grid[0] = 0``).

    Substeps adapt as ``clamp((x / kappa)^2, dt_min, dt_max)`` and are cut so
    that every recording time is hit exactly.
    """
    n = seeds.shape[0]
    m = grid.shape[0]
    for p in range(n):
        np.random.seed(seeds[p])
        x = x0
        out[p, 0] = x
        for j in range(1, m):
            span = grid[j] - grid[j - 1]
            remaining = span
            while remaining > 1e-12 * span:
                dt = _adaptive_dt(x, kappa, dt_min, dt_max)
                if dt > remaining:
                    dt = remaining
                x, _ = _implicit_step(x, dt, delta, lin, logx0, dlog, gvals, noise)
                remaining -= dt
            out[p, j] = x


@njit(cache=CACHE)
def hit_level_up(
    x0, level, delta, lin, logx0, dlog, gvals, dt_min, dt_max, kappa, horizon, seeds,
    out_t, out_censored,
):
    """First passage to ``level >= x0`` for the reflecting process.

    Crossings between grid points are detected with the Brownian-bridge
    probability ``exp(-2 (level - x)(level - x') / dt)``.
    """
    n = seeds.shape[0]
    for p in range(n):
        np.random.seed(seeds[p])
        x = x0
        t = 0.0
        censored = False
        while True:
            dt = _adaptive_dt(x, kappa, dt_min, dt_max)
            x_new, _ = _implicit_step(x, dt, delta, lin, logx0, dlog, gvals, 1.0)
            t += dt
            if x_new >= level:
                break
            prob = math.exp(-2.0 * (level - x) * (level - x_new) / dt)
            if np.random.random() < prob:
                break
            if t > horizon:
                censored = True
                break
            x = x_new
        out_t[p] = t
        out_censored[p] = censored


@njit(cache=CACHE)
def inverse_local_time(
    x0, delta, lin, logx0, dlog, gvals, eps, norm, ell, dt_min, dt_max, kappa, horizon, seeds,
    out_tau, out_censored,
):
    """Inverse occupation-time local time for several bandwidths at once.

    ``L^eps_t = norm[j] * int_0^t 1{X_s < eps[j]} ds`` (trapezoid in the
    indicator); ``out_tau[p, j]`` is the first ``t`` with ``L^eps_t > ell``.
    """
    n = seeds.shape[0]
    m = eps.shape[0]
    occ = np.zeros(m)
    done = np.zeros(m, dtype=np.bool_)
    for p in range(n):
        np.random.seed(seeds[p])
        x = x0
        t = 0.0
        for j in range(m):
            occ[j] = 0.0
            done[j] = False
            out_censored[p, j] = False
        remaining = m
        while remaining > 0:
            dt = _adaptive_dt(x, kappa, dt_min, dt_max)
            x_new, _ = _implicit_step(x, dt, delta, lin, logx0, dlog, gvals, 1.0)
            for j in range(m):
                if done[j]:
                    continue
                w = 0.0
                if x < eps[j]:
                    w += 0.5
                if x_new < eps[j]:
                    w += 0.5
                if w > 0.0:
                    need = ell / norm[j] - occ[j]
                    if w * dt >= need:
                        out_tau[p, j] = t + need / w
                        done[j] = True
                        remaining -= 1
                    else:
                        occ[j] += w * dt
            t += dt
            x = x_new
            if t > horizon:
                for j in range(m):
                    if not done[j]:
                        out_tau[p, j] = np.inf
                        out_censored[p, j] = True
                break
