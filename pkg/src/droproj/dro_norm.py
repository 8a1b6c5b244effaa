"""Worst-case distributions over l1, l2 and l-infinity balls."""

from __future__ import annotations

import math

import numpy as np

from .core import Distance, DroInstance, SolverResult, Status, degenerate_result
from .rootfind import DEFAULT, RootConfig, ScalarFn, Shape, Sign, find_sign_point, newton_guarded


def _sweep(q: np.ndarray, c: np.ndarray, up: np.ndarray, down: np.ndarray, budget: float) -> np.ndarray:
    """Move mass from the cheapest to the most expensive coordinates.

    Coordinates are ordered by decreasing cost. The receiving pointer walks
    down from the top, filling each coordinate up to ``up[i]``; the giving
    pointer walks up from the bottom, draining each coordinate by at most
    ``down[j]``; the walk stops when the pointers meet or ``budget`` mass has
    moved. The transported amount for every meeting point is
    ``min(top rooms, bottom rooms, budget)``, so the sweep is evaluated with
    prefix sums instead of an explicit pointer loop.
    """
    n = q.shape[0]
    order = np.argsort(-c, kind="stable")
    room_up = up[order]
    room_dn = down[order]
    fill = np.concatenate(([0.0], np.cumsum(room_up)))             # top s coordinates
    drain = np.concatenate(([0.0], np.cumsum(room_dn[::-1])))      # bottom k coordinates
    moved = np.minimum(fill, drain[::-1])                          # split after s receivers
    s = int(np.argmax(moved))
    total = min(float(moved[s]), budget)

    inc = np.clip(total - fill[:-1], 0.0, room_up)
    inc[s:] = 0.0
    dec_rev = np.clip(total - drain[:-1], 0.0, room_dn[::-1])
    dec_rev[n - s:] = 0.0
    delta = inc - dec_rev[::-1]

    p = np.empty(n)
    p[order] = q[order] + delta
    return np.maximum(p, 0.0)


def solve_linf(inst: DroInstance) -> SolverResult:
    """Exact sweep for the l-infinity ball: each coordinate moves by at most eps."""
    if inst.c.constant:
        return degenerate_result(inst)
    q, eps = inst.q.weights, inst.epsilon
    p = _sweep(q, inst.c.costs, np.minimum(1.0 - q, eps), np.minimum(q, eps), np.inf)
    return _exact(inst, p)


def solve_l1(inst: DroInstance) -> SolverResult:
    """Exact sweep for the l1 ball: at most eps/2 of mass changes hands."""
    if inst.c.constant:
        return degenerate_result(inst)
    q = inst.q.weights
    p = _sweep(q, inst.c.costs, 1.0 - q, q, 0.5 * inst.epsilon)
    return _exact(inst, p)


def _exact(inst: DroInstance, p: np.ndarray) -> SolverResult:
    return SolverResult(p=p, status=Status.ROOT_FOUND, objective=float(inst.c.costs @ p),
                        trace={"method": "sweep"})


def l2_trivial(q, c, epsilon: float):
    """Candidate supported on the argmax set, or ``None`` if it leaves the ball.

    The candidate shifts every argmax coordinate of ``q`` by the same amount
    so that they sum to one, and zeroes the rest.
    """
    qw = q.weights
    sel = c.argmax_set
    p = np.zeros_like(qw)
    p[sel] = qw[sel] + (1.0 - qw[sel].sum()) / sel.shape[0]
    if np.linalg.norm(p - qw) <= epsilon:
        return p
    return None


def _lambda_and_active(mu: float, q: np.ndarray, c: np.ndarray, ranks=None):
    """Solve ``sum max(mu q_i + c_i - lam, 0) = mu`` by sorting ``mu q + c``.

    Returns ``lam`` and the number of coordinates with ``mu q_i + c_i > lam``.
    ``ranks`` may pass a precomputed ``arange(1, n + 1)``.
    """
    v = mu * q + c
    v.sort()
    v = v[::-1]
    if ranks is None:
        ranks = np.arange(1, v.shape[0] + 1)
    cand = (v.cumsum() - mu) / ranks
    # v_i > cand_i holds exactly on a prefix of the sorted values
    k = int(np.count_nonzero(v > cand))
    return float(cand[k - 1]), k


def lambda_of_mu(mu: float, inst: DroInstance) -> float:
    """The unique ``lam`` with ``sum min(lam - c_i, mu q_i) = 0``."""
    if not mu > 0:
        raise ValueError(f"mu must be positive, got {mu!r}")
    return _lambda_and_active(mu, inst.q.weights, inst.c.costs)[0]


class _L2Equation:
    """``h6(mu) = sum min(lam(mu) - c_i, mu q_i)^2 - eps^2 mu^2`` and its derivative.

    The inner solve for ``lam(mu)`` is cached so the derivative at the point
    just evaluated costs no extra sort.
    """

    def __init__(self, inst: DroInstance):
        self.q = inst.q.weights
        self.q2 = self.q * self.q
        self.c = inst.c.costs
        self.n = self.q.shape[0]
        self.ranks = np.arange(1, self.n + 1)
        self.eps2 = inst.epsilon ** 2
        self._mu = None

    def inner(self, mu):
        if mu != self._mu:
            lam, _ = _lambda_and_active(mu, self.q, self.c, self.ranks)
            self._mu, self._lam = mu, lam
        return self._lam

    def value(self, mu):
        lam = self.inner(mu)
        m = np.minimum(lam - self.c, mu * self.q)
        return float(m.dot(m)) - self.eps2 * mu * mu

    def derivative(self, mu):
        lam = self.inner(mu)
        inactive = lam - self.c >= mu * self.q
        n_active = self.n - int(np.count_nonzero(inactive))
        so = float(self.q.dot(inactive))
        return 2.0 * mu * (so * so / n_active + float(self.q2.dot(inactive)) - self.eps2)


def h6(mu: float, inst: DroInstance) -> float:
    if not mu > 0:
        raise ValueError(f"mu must be positive, got {mu!r}")
    return _L2Equation(inst).value(mu)


def h6_derivative(mu: float, inst: DroInstance) -> float:
    return _L2Equation(inst).derivative(mu)


def solver_equation(inst: DroInstance):
    return _L2Equation(inst).value


START_SAFETY = 1.1
# d log N / d log mu always lies in [-2, 0]; flatter slopes are treated as this
# one so a single extrapolation moves mu by at most (N / eps^2)^2
MIN_LOG_SLOPE = 0.5


def _l2_start(h: ScalarFn, eps: float, extrapolations: int = 3) -> float:
    """A point with ``h6 < 0`` whose distance to the root does not depend on n.

    The first probe is ``mu = 1``. Writing ``h6 = mu^2 (N(mu) - eps^2)`` with
    ``N(mu) = ||p(mu) - q||^2``, the value and derivative at a probe give the
    local slope of ``log N`` against ``log mu``; following that slope to
    ``N = eps^2`` and overshooting by ``START_SAFETY`` usually lands just past
    the root. If it does not, the extrapolation is repeated from the new
    point. Failing that, the smallest probe with ``h6 < 0`` is used, and if
    there is none ``mu`` is doubled until ``h6 < 0``.
    """
    mu = 1.0
    f = h(mu)
    negative = mu if f < 0.0 else math.inf
    for _ in range(extrapolations):
        norm2 = f / (mu * mu) + eps * eps
        if not norm2 > 0.0:
            break
        slope = mu * (h.derivative(mu) / (mu * mu) - 2.0 * f / mu ** 3) / norm2
        slope = min(slope, -MIN_LOG_SLOPE)
        step = math.log(eps * eps / norm2) / slope
        mu *= START_SAFETY * math.exp(min(max(step, -30.0), 30.0))
        if mu >= negative:
            break
        f = h(mu)
        if f < 0.0:
            return mu
    if negative < math.inf:
        return negative
    return find_sign_point(h, start=mu, want=Sign.NEGATIVE)


def solve_l2(inst: DroInstance, cfg: RootConfig = DEFAULT) -> SolverResult:
    """Worst case over the Euclidean ball.

    ``h6`` is concave and decreasing past its maximum, so Newton's method
    started at any ``mu`` with ``h6(mu) < 0`` decreases monotonically to the
    root. Since ``h6 = mu^2 (||p(mu) - q||^2 - eps^2)``, the value test is
    taken relative to ``eps^2 mu^2`` at the current point.
    """
    if inst.c.constant:
        return degenerate_result(inst)
    p_hat = l2_trivial(inst.q, inst.c, inst.epsilon)
    if p_hat is not None:
        return SolverResult(p=p_hat, status=Status.TRIVIAL, objective=float(inst.c.costs @ p_hat))
    eq = _L2Equation(inst)
    h = ScalarFn(eq.value, eq.derivative)
    eps2 = inst.epsilon ** 2
    x0 = _l2_start(h, inst.epsilon)
    mu = newton_guarded(h, x0, Shape.CONCAVE_DECREASING, cfg, bracket=(0.0, x0),
                        f_scale=lambda m: eps2 * m * m)
    q, c = inst.q.weights, inst.c.costs
    lam = eq.inner(mu)
    p = np.maximum(q - (lam - c) / mu, 0.0)
    trace = {"method": "newton", "variable": "mu", "start": x0, "solver_root": mu,
             "root": mu, "h_scale": eps2 * mu * mu}
    return SolverResult(p=p, status=Status.ROOT_FOUND, objective=float(c @ p),
                        lambda_=lam, mu=mu, h_evaluations=h.evaluations, trace=trace)


def solve_dro_norm(inst: DroInstance, cfg: RootConfig = DEFAULT) -> SolverResult:
    if inst.distance is Distance.L1:
        return solve_l1(inst)
    if inst.distance is Distance.LINF:
        return solve_linf(inst)
    if inst.distance is Distance.L2:
        return solve_l2(inst, cfg)
    raise ValueError(f"{inst.distance.value} is not a norm")
