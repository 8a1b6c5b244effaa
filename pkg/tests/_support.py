"""Independent reference implementations and instance generators for tests.

Nothing here calls into the solvers; each function is a separate route to
the same answer so that agreement is meaningful.
"""

from __future__ import annotations

import math

import numpy as np

from droproj.core import DroInstance

DIVERGENCES = ("kl", "burg", "hellinger", "chi2", "mchi2")
NORMS = ("l1", "l2", "linf")

MASK64 = (1 << 64) - 1


def splitmix64_reference(seed: int, count: int) -> list:
    """Pure-integer splitmix64, written out from the constants."""
    s = seed & MASK64
    out = []
    for _ in range(count):
        s = (s + 0x9E3779B97F4A7C15) & MASK64
        z = s
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
        out.append(z ^ (z >> 31))
    return out


def random_q(rng, n):
    q = rng.uniform(0.05, 1.0, n)
    return q / q.sum()


def random_c(rng, n):
    return rng.uniform(0.0, 1.0, n)


def argmax_mass(q, c):
    c = np.asarray(c)
    return float(np.asarray(q)[c == c.max()].sum())


def trivial_threshold(kind, mass):
    """Radius at which the mass-on-argmax candidate becomes feasible."""
    if kind == "kl":
        return -math.log(mass)
    if kind == "hellinger":
        return 2.0 - 2.0 * math.sqrt(mass)
    if kind == "mchi2":
        return (1.0 - mass) / mass
    return math.inf


def random_dro(rng, n, kind, *, nontrivial=False):
    """Random instance; with ``nontrivial`` the radius is below the trivial threshold."""
    q, c = random_q(rng, n), random_c(rng, n)
    if kind in NORMS:
        eps = rng.uniform(0.01, 0.6)
    else:
        cap = min(trivial_threshold(kind, argmax_mass(q, c)), 1.9)
        if nontrivial:
            eps = rng.uniform(0.05, 0.95) * cap
        else:
            eps = rng.uniform(0.01, 1.2) * min(cap, 1.5)
    return DroInstance.build(q, c, eps, kind)


def random_box(rng, n, *, margin=0.0):
    """Random box-simplex data with sum(l) <= 1 - margin and sum(u) >= 1 + margin."""
    q = rng.normal(1.0 / n, 0.5, n)
    l = rng.uniform(0.0, 1.0, n)
    l *= rng.uniform(0.0, 1.0 - margin) / l.sum()
    width = rng.uniform(0.05, 1.0, n)
    u = l + width
    short = 1.0 + margin - u.sum()
    if short > 0:
        u += short / n + 1e-3
    return q, l, u


def classical_simplex_projection(y):
    """Euclidean projection onto the probability simplex by sorting.

    The standard threshold construction: sort descending, find the largest k
    with u_k - (sum_{j<=k} u_j - 1)/k > 0, shift by that threshold and clip.
    """
    y = np.asarray(y, dtype=np.float64)
    u = np.sort(y)[::-1]
    css = np.cumsum(u)
    k = np.arange(1, y.shape[0] + 1)
    rho = np.nonzero(u - (css - 1.0) / k > 0)[0][-1]
    theta = (css[rho] - 1.0) / (rho + 1)
    return np.maximum(y - theta, 0.0)


def literal_kink_walk(q, l, u):
    """Line-by-line loop version of the sorted kink walk for the box simplex.

    ``s`` holds the kinks q - l (a coordinate reaches its lower bound), ``r``
    the kinks q - u (a coordinate leaves its upper bound). The walk starts at
    r_1 with slope 1 and g = sum(u) - 1, always takes the smaller of the next
    r and s kinks (r first on ties), and interpolates once g turns negative.
    """
    q, l, u = (np.asarray(v, dtype=np.float64) for v in (q, l, u))
    n = q.shape[0]
    s = sorted(q - l)
    r = sorted(q - u) + [math.inf]
    g = float(np.sum(u)) - 1.0
    if g <= 0.0:
        lam = r[0]
        return lam, np.clip(q - lam, l, u)
    slope = 1
    lam = r[0]
    i, j = 0, 1
    while g > 0.0:
        lam_prev, g_prev = lam, g
        if r[j] <= s[i]:
            lam = r[j]
            g -= slope * (lam - lam_prev)
            slope += 1
            j += 1
        else:
            lam = s[i]
            g -= slope * (lam - lam_prev)
            slope -= 1
            i += 1
        if i >= n:
            break
    if g < 0.0:
        lam = lam_prev + g_prev * (lam - lam_prev) / (g_prev - g)
    return lam, np.clip(q - lam, l, u)


def l2_kkt_gap(q, c, p, eps):
    """Largest violation of the optimality conditions for the l2-ball problem.

    At the optimum there are lam and mu > 0 with c_i - lam = mu (p_i - q_i)
    wherever p_i > 0 and c_i - lam <= -mu q_i where p_i = 0, and the ball
    constraint is tight. lam and mu are recovered by least squares on the
    support.
    """
    q, c, p = (np.asarray(v, dtype=np.float64) for v in (q, c, p))
    supp = p > 1e-12
    a = np.column_stack((np.ones(int(supp.sum())), p[supp] - q[supp]))
    (lam, mu), *_ = np.linalg.lstsq(a, c[supp], rcond=None)
    stat = np.abs(c[supp] - lam - mu * (p[supp] - q[supp])).max()
    zero = np.maximum(c[~supp] - lam + mu * q[~supp], 0.0)
    comp = float(zero.max()) if zero.size else 0.0
    tight = abs(float(np.linalg.norm(p - q)) - eps)
    return max(float(stat), comp, tight, max(0.0, -mu))
