"""Jitted per-replica samplers.

All kernels take a :class:`numpy.random.Generator` and a family encoded as
``(kind, p0, p1, p2)`` (see ``RhoFamily.kernel_args``).  ``tol`` is the
slack used in comparisons against 0 and against running maxima; it is 0 for
non-lattice laws and a small positive number for lattice laws whose partial
sums suffer rounding.

Status codes: 0 ok, 1 step cap exceeded, 2 rejection budget exceeded.
"""

import math

import numpy as np
from numba import njit

OK = 0
CAP = 1
BUDGET = 2


@njit(cache=True)
def log_step(rng, kind, p0, p1, p2):
    if kind == 0:
        return p0 if rng.random() < p2 else p1
    elif kind == 1:
        return p0 + p1 * rng.standard_normal()
    else:
        g1 = rng.standard_gamma(p0)
        g2 = rng.standard_gamma(p1)
        while g1 <= 0.0:
            g1 = rng.standard_gamma(p0)
        while g2 <= 0.0:
            g2 = rng.standard_gamma(p1)
        return math.log(g1) - math.log(g2)


@njit(cache=True)
def draw_b(rng, bkind, b0, b1):
    if bkind == 0:
        return b0
    elif bkind == 1:
        return rng.exponential(1.0 / b0)
    else:
        return b0 + (b1 - b0) * rng.random()


@njit(cache=True)
def _push(buf, n, v):
    if n == buf.shape[0]:
        nb = np.empty(2 * n)
        nb[:n] = buf
        buf = nb
    buf[n] = v
    return buf


# ---------------------------------------------------------------- plain walks

@njit(cache=True)
def walk(rng, kind, p0, p1, p2, n):
    out = np.empty(n + 1)
    out[0] = 0.0
    v = 0.0
    for k in range(1, n + 1):
        v += log_step(rng, kind, p0, p1, p2)
        out[k] = v
    return out


@njit(cache=True)
def excursion(rng, kind, p0, p1, p2, tol, cap):
    """First excursion above 0 under the given step law.

    Returns (T_neg, O1, H, T_H, KI, status).
    """
    v = 0.0
    h = 0.0
    th = 0
    ki = 1.0
    k = 0
    while True:
        k += 1
        v += log_step(rng, kind, p0, p1, p2)
        ki += math.exp(v)
        if v <= tol:
            return k, max(-v, 0.0), h, th, ki, OK
        if v > h + tol:
            h = v
            th = k
        if k >= cap:
            return k, 0.0, h, th, ki, CAP


@njit(cache=True)
def excursion_batch(rng, kind, p0, p1, p2, tol, cap, n):
    t_neg = np.empty(n, np.int64)
    o1 = np.empty(n)
    hh = np.empty(n)
    th = np.empty(n, np.int64)
    ki = np.empty(n)
    for i in range(n):
        t, o, h, t_h, s, st = excursion(rng, kind, p0, p1, p2, tol, cap)
        if st != OK:
            return t_neg[:i], o1[:i], hh[:i], th[:i], ki[:i], st
        t_neg[i] = t
        o1[i] = o
        hh[i] = h
        th[i] = t_h
        ki[i] = s
    return t_neg, o1, hh, th, ki, OK


# ------------------------------------------------------- conditioned walks

@njit(cache=True)
def conditioned_walk(rng, kind, p0, p1, p2, sign, strict, tol, stop, cap, max_attempts):
    """Rejection sampler for a walk with steps ``sign * log rho`` that must
    stay > 0 (strict) or >= 0 (non-strict) until it first exceeds ``stop``.

    Returns (path, attempts, status); ``path[0] == 0``.
    """
    buf = np.empty(256)
    attempts = 0
    while attempts < max_attempts:
        attempts += 1
        buf[0] = 0.0
        n = 1
        v = 0.0
        while True:
            v += sign * log_step(rng, kind, p0, p1, p2)
            buf = _push(buf, n, v)
            n += 1
            if strict:
                if v <= tol:
                    break
            elif v < -tol:
                break
            if v > stop:
                return buf[:n].copy(), attempts, OK
            if n > cap:
                return buf[:n].copy(), attempts, CAP
    return buf[:1].copy(), attempts, BUDGET


@njit(cache=True)
def trunc_neg_exp_sum(path, start, a_level):
    """sum of exp(-path[k]) for k >= start up to (excluding) the first k with
    path[k] > a_level.  Returns (sum, first exceedance index or len, residual
    multiplier sum_{j >= idx} exp(-(path[j] - path[idx])) over the rest)."""
    s = 0.0
    n = path.shape[0]
    idx = n
    for k in range(start, n):
        if path[k] > a_level:
            idx = k
            break
        s += math.exp(-path[k])
    resid = 0.0
    if idx < n:
        base = path[idx]
        for j in range(idx, n):
            resid += math.exp(-(path[j] - base))
    return s, idx, resid


@njit(cache=True)
def trunc_neg_exp_sum_b(rng, path, start, a_level, bkind, b0, b1):
    s = 0.0
    for k in range(start, path.shape[0]):
        if path[k] > a_level:
            break
        s += math.exp(-path[k]) * draw_b(rng, bkind, b0, b1)
    return s


@njit(cache=True)
def m_batch(rng, rk, r0, r1, r2, lk, l0, l1, l2, tol, stop, cap, max_attempts,
            a_level, bkind, b0, b1, n):
    """n replicas of (M, M^B) from independent right (tilted, > 0) and left
    (untilted, reversed, >= 0) branches.  Right is drawn before left; the
    B weights are drawn after both paths, right terms first."""
    m = np.empty(n)
    mb = np.empty(n)
    resid = np.empty(n)
    r_att = np.empty(n, np.int64)
    l_att = np.empty(n, np.int64)
    for i in range(n):
        right, ra, st = conditioned_walk(rng, rk, r0, r1, r2, 1.0, True, tol, stop, cap, max_attempts)
        if st != OK:
            return m[:i], mb[:i], resid[:i], r_att[:i], l_att[:i], st
        left, la, st = conditioned_walk(rng, lk, l0, l1, l2, -1.0, False, tol, stop, cap, max_attempts)
        if st != OK:
            return m[:i], mb[:i], resid[:i], r_att[:i], l_att[:i], st
        sr, ir, rr = trunc_neg_exp_sum(right, 0, a_level)
        sl, il, rl = trunc_neg_exp_sum(left, 1, a_level)
        m[i] = sr + sl
        if bkind == 0:
            mb[i] = b0 * m[i]
        else:
            mb[i] = (trunc_neg_exp_sum_b(rng, right, 0, a_level, bkind, b0, b1)
                     + trunc_neg_exp_sum_b(rng, left, 1, a_level, bkind, b0, b1))
        resid[i] = max(rr, rl)
        r_att[i] = ra
        l_att[i] = la
    return m, mb, resid, r_att, l_att, OK


# --------------------------------------------------------------- series R

@njit(cache=True)
def series_r(rng, kind, p0, p1, p2, bkind, b0, b1, s, log_bound, log_eps, log_rel, cap, want_path):
    """R^B = sum_k B_k exp(V_k) accumulated until the Markov bound
    P(remainder > rel_tol * acc) <= eps holds, using
    E[remainder^s | F_n] <= exp(s V_n) * E[B^s] / (1 - E[rho^s]).
    ``log_bound`` is log(E[B^s] / (1 - E[rho^s])).
    """
    buf = np.empty(64 if want_path else 1)
    buf[0] = 0.0
    v = 0.0
    acc = draw_b(rng, bkind, b0, b1)
    k = 0
    while True:
        k += 1
        v += log_step(rng, kind, p0, p1, p2)
        if want_path:
            buf = _push(buf, k, v)
        acc += draw_b(rng, bkind, b0, b1) * math.exp(v)
        if s * v + log_bound <= log_eps + s * (log_rel + math.log(acc)):
            return acc, buf[:k + 1].copy() if want_path else buf, OK
        if k >= cap:
            return acc, buf, CAP


@njit(cache=True)
def r_batch(rng, kind, p0, p1, p2, bkind, b0, b1, s, log_bound, log_eps, log_rel, cap, n):
    out = np.empty(n)
    for i in range(n):
        r, _, st = series_r(rng, kind, p0, p1, p2, bkind, b0, b1, s, log_bound, log_eps,
                            log_rel, cap, False)
        if st != OK:
            return out[:i], st
        out[i] = r
    return out, OK


# ------------------------------------------------- conditioned on {H = S}

@njit(cache=True)
def right_h_equals_s(rng, kind, p0, p1, p2, tol, kappa, log_bound_const, log_eps_cert,
                     horizon, h_min, cap, max_attempts, thresholds, counts):
    """Right branch under Q(. | H = S, H >= h_min).

    Excursions are drawn until one has H >= h_min and its continuation never
    exceeds H.  The continuation stops once H - V >= horizon and the
    Lundberg/Feller bound const * exp(-kappa (H - V)) on ever returning
    above H is below eps_cert.  ``counts[j]`` accumulates the number of
    excursions with H >= thresholds[j].

    Returns (path, H, T_H, excursions, n_reached, status) where n_reached
    counts excursions with H >= h_min (accepted or not).
    """
    buf = np.empty(256)
    excursions = 0
    reached = 0
    while excursions < max_attempts:
        excursions += 1
        buf[0] = 0.0
        n = 1
        v = 0.0
        h = 0.0
        th = 0
        while True:
            v += log_step(rng, kind, p0, p1, p2)
            buf = _push(buf, n, v)
            n += 1
            if v <= tol:
                break
            if v > h + tol:
                h = v
                th = n - 1
            if n > cap:
                return buf[:n].copy(), h, th, excursions, reached, CAP
        for j in range(thresholds.shape[0]):
            if h >= thresholds[j]:
                counts[j] += 1
        if h < h_min:
            continue
        reached += 1
        ok = True
        while True:
            gap = h - v
            if gap >= horizon and log_bound_const - kappa * gap < log_eps_cert:
                break
            v += log_step(rng, kind, p0, p1, p2)
            if v > h + tol:
                ok = False
                break
            buf = _push(buf, n, v)
            n += 1
            if n > cap:
                return buf[:n].copy(), h, th, excursions, reached, CAP
        if ok:
            return buf[:n].copy(), h, th, excursions, reached, OK
    return buf[:1].copy(), 0.0, 0, excursions, reached, BUDGET


@njit(cache=True)
def z_parts(left, right, h, th, a_level):
    """Truncated (M1, M2) around the maximum and R = sum exp(V_k) on the
    right branch.  ``left`` holds V_0 = 0, V_-1, V_-2, ...

    M1 runs from the last left index with V >= A (inclusive) to
    min(first right index with V >= A, T_H); M2 runs from the last index
    <= T_H with H - V >= A (or 0) to the first index >= T_H with H - V >= A.
    """
    m1 = 0.0
    for k in range(1, left.shape[0]):
        m1 += math.exp(-left[k])
        if left[k] >= a_level:
            break
    for k in range(0, th + 1):
        m1 += math.exp(-right[k])
        if right[k] >= a_level:
            break
    lo = 0
    for k in range(th, -1, -1):
        if h - right[k] >= a_level:
            lo = k
            break
    m2 = 0.0
    for k in range(lo, right.shape[0]):
        m2 += math.exp(right[k] - h)
        if k >= th and h - right[k] >= a_level:
            break
    r = 0.0
    for k in range(right.shape[0]):
        r += math.exp(right[k])
    return m1, m2, r


@njit(cache=True)
def cond_i_batch(rng, kind, p0, p1, p2, tol, kappa, log_bound_const, log_eps_cert,
                 horizon, h_min, left_stop, cap, max_attempts, a_level, thresholds, n):
    """n replicas under Q(. | I) (optionally also H >= h_min)."""
    hh = np.empty(n)
    th_out = np.empty(n, np.int64)
    m1 = np.empty(n)
    m2 = np.empty(n)
    rr = np.empty(n)
    counts = np.zeros(thresholds.shape[0], np.int64)
    excursions = 0
    reached = 0
    for i in range(n):
        right, h, th, ex, re, st = right_h_equals_s(
            rng, kind, p0, p1, p2, tol, kappa, log_bound_const, log_eps_cert,
            horizon, h_min, cap, max_attempts, thresholds, counts)
        excursions += ex
        reached += re
        if st != OK:
            return hh[:i], th_out[:i], m1[:i], m2[:i], rr[:i], counts, excursions, reached, st
        left, la, st = conditioned_walk(rng, kind, p0, p1, p2, -1.0, False, tol, left_stop,
                                        cap, max_attempts)
        if st != OK:
            return hh[:i], th_out[:i], m1[:i], m2[:i], rr[:i], counts, excursions, reached, st
        a, b, r = z_parts(left, right, h, th, a_level)
        hh[i] = h
        th_out[i] = th
        m1[i] = a
        m2[i] = b
        rr[i] = r
    return hh, th_out, m1, m2, rr, counts, excursions, reached, OK


# ------------------------------------------------------ mountain and maxima

@njit(cache=True)
def direct_max(rng, kind, p0, p1, p2, tol, kappa, log_eps, cap):
    """S = max_k V_k under Q, stopped once exp(-kappa (S - V)) < eps and
    at least one step after T_S is known.  Returns (S, T_S, first step
    after T_S, status)."""
    v = 0.0
    s = 0.0
    ts = 0
    post = 0.0
    k = 0
    while True:
        k += 1
        step = log_step(rng, kind, p0, p1, p2)
        v += step
        if v > s + tol:
            s = v
            ts = k
        elif k == ts + 1:
            post = step
        if k > ts and -kappa * (s - v) < log_eps:
            return s, ts, post, OK
        if k >= cap:
            return s, ts, post, CAP


@njit(cache=True)
def direct_max_batch(rng, kind, p0, p1, p2, tol, kappa, log_eps, cap, n):
    s = np.empty(n)
    ts = np.empty(n, np.int64)
    post = np.empty(n)
    for i in range(n):
        a, b, c, st = direct_max(rng, kind, p0, p1, p2, tol, kappa, log_eps, cap)
        if st != OK:
            return s[:i], ts[:i], post[:i], st
        s[i] = a
        ts[i] = b
        post[i] = c
    return s, ts, post, OK


@njit(cache=True)
def stay_nonpos_first_step(rng, kind, p0, p1, p2, tol, kappa, log_eps, cap, max_attempts):
    """First step of a Q-walk conditioned on V_k <= 0 for all k >= 1,
    accepted once exp(kappa V) < eps.  Returns (step, attempts, status)."""
    attempts = 0
    while attempts < max_attempts:
        attempts += 1
        v = 0.0
        first = 0.0
        k = 0
        while True:
            k += 1
            step = log_step(rng, kind, p0, p1, p2)
            if k == 1:
                first = step
            v += step
            if v > tol:
                break
            if kappa * v < log_eps:
                return first, attempts, OK
            if k >= cap:
                return first, attempts, CAP
    return 0.0, attempts, BUDGET


@njit(cache=True)
def nonpos_first_batch(rng, kind, p0, p1, p2, tol, kappa, log_eps, cap, max_attempts, n):
    out = np.empty(n)
    for i in range(n):
        a, _, st = stay_nonpos_first_step(rng, kind, p0, p1, p2, tol, kappa, log_eps, cap,
                                          max_attempts)
        if st != OK:
            return out[:i], st
        out[i] = a
    return out, OK


@njit(cache=True)
def mountain(rng, kind, p0, p1, p2, tol, kappa, stop_level, cap, want_path):
    """Draw Y under the tilted law until its maximum reaches stop_level,
    collecting the strict ladder epochs; pick Theta among them with
    probability proportional to exp(-kappa Y_e).

    Returns (Y_Theta, Theta, weight, max Y, path, epochs, status).
    """
    buf = np.empty(256 if want_path else 1)
    buf[0] = 0.0
    ep = np.empty(32, np.int64)
    hts = np.empty(32)
    ep[0] = 0
    hts[0] = 0.0
    ne = 1
    w = 1.0
    y = 0.0
    ymax = 0.0
    k = 0
    while ymax < stop_level:
        k += 1
        y += log_step(rng, kind, p0, p1, p2)
        if want_path:
            buf = _push(buf, k, y)
        if y > ymax + tol:
            ymax = y
            if ne == ep.shape[0]:
                ep2 = np.empty(2 * ne, np.int64)
                ep2[:ne] = ep
                ep = ep2
            ep[ne] = k
            hts = _push(hts, ne, y)
            ne += 1
            w += math.exp(-kappa * y)
        if k >= cap:
            break
    u = rng.random() * w
    c = 0.0
    pick = ne - 1
    for j in range(ne):
        c += math.exp(-kappa * hts[j])
        if u < c:
            pick = j
            break
    st = OK if ymax >= stop_level else CAP
    path = buf[:k + 1].copy() if want_path else buf
    return hts[pick], ep[pick], w, ymax, path, ep[:ne].copy(), st


@njit(cache=True)
def mountain_batch(rng, kind, p0, p1, p2, tol, kappa, stop_level, cap, n):
    s = np.empty(n)
    theta = np.empty(n, np.int64)
    w = np.empty(n)
    ymax = np.empty(n)
    for i in range(n):
        a, b, c, d, _, _, st = mountain(rng, kind, p0, p1, p2, tol, kappa, stop_level, cap, False)
        if st != OK:
            return s[:i], theta[:i], w[:i], ymax[:i], st
        s[i] = a
        theta[i] = b
        w[i] = c
        ymax[i] = d
    return s, theta, w, ymax, OK


@njit(cache=True)
def first_ladder_batch(rng, kind, p0, p1, p2, tol, kappa, cap, n):
    """exp(-kappa Y_{e_1}) for n independent walks under the tilted law."""
    out = np.empty(n)
    for i in range(n):
        y = 0.0
        k = 0
        while True:
            k += 1
            y += log_step(rng, kind, p0, p1, p2)
            if y > tol:
                break
            if k >= cap:
                return out[:i], CAP
        out[i] = math.exp(-kappa * y)
    return out, OK


@njit(cache=True)
def stay_positive_rate(rng, kind, p0, p1, p2, tol, horizon, n):
    """Fraction of n walks with V_k > 0 for all 1 <= k <= horizon."""
    good = 0
    for i in range(n):
        v = 0.0
        ok = True
        for k in range(horizon):
            v += log_step(rng, kind, p0, p1, p2)
            if v <= tol:
                ok = False
                break
        if ok:
            good += 1
    return good
