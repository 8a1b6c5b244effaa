"""Worst-case distributions over φ-divergence balls.

Solves ``max c^T p`` over distributions ``p`` with ``sum q_i phi(p_i/q_i) <= eps``
for the five divergences of :mod:`droproj.divergence`. Either the mass-on-argmax
candidate is already feasible, or the optimum is recovered from the root of a
scalar function ``h``:

============ ======== ======================================= ================
kind         variable bracket                                 method
============ ======== ======================================= ================
KL           mu       0 < mu <= (cmax-cmin)/eps               bisection
Burg         lambda   cmax < lambda <= cmax + (cmax-cmin)/eps bisection
Hellinger    lambda   cmax < lambda <= cmax + (2-eps)(..)/eps bisection
chi2         lambda   cmax < lambda                           Newton (convex)
mod. chi2    lambda   -cmax < lambda                          Newton (concave)
============ ======== ======================================= ================

Internally the λ-based equations for Burg, Hellinger and chi2 are evaluated in
the shifted variable ``t = lambda - cmax`` so that ``lambda - c_i`` is exact for
the maximizing coordinates, which carry the pole.
"""

from __future__ import annotations

import math
from typing import Callable

import numpy as np

from .core import (
    CostVector,
    Distance,
    DomainViolation,
    DroInstance,
    Distribution,
    SolverResult,
    Status,
    degenerate_result,
)
from .divergence import divergence
from .rootfind import (
    DEFAULT,
    NoSignChange,
    RootConfig,
    ScalarFn,
    Shape,
    Sign,
    bisect,
    find_sign_point,
    newton_guarded,
)

# KL weights exp(z) vanish below this exponent; clipping keeps 0 * z finite
_EXP_FLOOR = -800.0


def trivial_candidate(q: Distribution, c: CostVector) -> np.ndarray:
    """Spread all mass over the argmax coordinates proportionally to ``q``."""
    qw = q.weights
    p = np.zeros_like(qw)
    sel = c.argmax_set
    p[sel] = qw[sel] / qw[sel].sum()
    return p


def trivial_check(kind, p_hat, q: Distribution, epsilon: float) -> bool:
    """Whether ``p_hat`` lies in the ball (boundary included)."""
    return bool(divergence(kind, p_hat, q) <= epsilon)


def trivial_distance(kind, mass: float) -> float:
    """Distance of the mass-on-argmax candidate from ``q`` in closed form.

    ``mass`` is the total weight ``q`` puts on the argmax set. Burg and chi2
    are infinite whenever the candidate has a zero coordinate, i.e. unless
    the argmax set is everything.
    """
    kind = Distance(kind)
    if kind is Distance.KL:
        return -math.log(mass)
    if kind is Distance.HELLINGER:
        return 2.0 - 2.0 * math.sqrt(mass)
    if kind is Distance.MOD_CHI2:
        return (1.0 - mass) / mass
    return 0.0 if mass >= 1.0 else math.inf


class _Model:
    """Arrays shared by all evaluations of one instance.

    The h functions run once per solver iteration. At n ~ 1e3 numpy call
    overhead rather than arithmetic dominates their cost, so they are
    written with as few array operations as possible.
    """

    def __init__(self, inst: DroInstance):
        self.q = inst.q.weights
        self.c = inst.c.costs
        self.cmax = inst.c.cmax
        self.cmin = inst.c.cmin
        self.eps = inst.epsilon
        self.gap = self.cmax - self.c  # >= 0, exactly 0 on the argmax set
        self.neg_gap = -self.gap
        self.q_neg_gap = self.q * self.neg_gap
        self._chi2 = self._mchi2 = None

    # KL, in mu. Sign-equivalent to the textbook h1: the positive factor
    # exp(cmax/mu) has been divided out (shifted log-sum-exp). With
    # z = (c - cmax)/mu and w = exp(z) this is sum q w z - s (log s + eps),
    # where s = sum q w >= q(argmax set) > 0.
    def h_kl(self, mu):
        inv = 1.0 / mu
        w = np.exp(self.neg_gap * inv)
        s = self.q.dot(w)
        return inv * self.q_neg_gap.dot(w) - s * (math.log(s) + self.eps)

    def h_burg(self, t):
        x = self.gap + t
        return self.q.dot(np.log(x)) + math.log(self.q.dot(1.0 / x)) - self.eps

    def _inverse_moments(self, t):
        r = 1.0 / (self.gap + t)
        return self.q.dot(r), self.q.dot(r * r)

    def h_hellinger(self, t):
        a, b = self._inverse_moments(t)
        return 2.0 * a - (2.0 - self.eps) * math.sqrt(b)

    def h_hellinger_normalized(self, t):
        # h3 / sqrt(sum q/(lambda-c)^2); equals eps - d3(p(t), q)
        a, b = self._inverse_moments(t)
        return 2.0 * a / math.sqrt(b) - (2.0 - self.eps)

    # Newton asks for the derivative at the point whose value it has just
    # computed, so the value kernels keep the pieces the derivative needs.
    def h_chi2(self, t):
        r = 1.0 / np.sqrt(self.gap + t)
        a, b = self.q.dot(1.0 / r), self.q.dot(r)
        self._chi2 = (t, r, a, b)
        return a * b - 1.0 - self.eps

    def dh_chi2(self, t):
        if self._chi2 is None or self._chi2[0] != t:
            self.h_chi2(t)
        _, r, a, b = self._chi2
        return 0.5 * b * b - 0.5 * a * self.q.dot(r * r * r)

    def h_mchi2(self, lam):
        m = np.maximum(self.c + lam, 0.0)
        s1 = self.q.dot(m)
        self._mchi2 = (lam, m, s1)
        return self.q.dot(m * m) - (1.0 + self.eps) * s1 * s1

    def dh_mchi2(self, lam):
        if self._mchi2 is None or self._mchi2[0] != lam:
            self.h_mchi2(lam)
        _, m, s1 = self._mchi2
        active = self.q.dot(m > 0.0)
        return 2.0 * s1 * (1.0 - (1.0 + self.eps) * active)

    def shifted(self, t):
        x = t + self.gap
        if np.any(x <= 0):
            raise DomainViolation("need lambda > cmax")
        return x


def _shift(kind: Distance, x: float, cmax: float) -> float:
    if kind in (Distance.BURG, Distance.HELLINGER, Distance.CHI2):
        t = x - cmax
        if not t > 0:
            raise DomainViolation(f"{kind.value} needs lambda > cmax = {cmax!r}, got {x!r}")
        return t
    if kind is Distance.KL and not x > 0:
        raise DomainViolation(f"KL needs mu > 0, got {x!r}")
    # the polynomial form is defined at the endpoint itself, where it vanishes
    if kind is Distance.MOD_CHI2 and not x >= -cmax:
        raise DomainViolation(f"mchi2 needs lambda >= -cmax = {-cmax!r}, got {x!r}")
    return x


def h_eval(kind, x: float, inst: DroInstance, *, scaled: bool = True) -> float:
    """Evaluate the scalar equation of ``kind`` at ``x`` (mu for KL, lambda otherwise).

    For KL the default is the overflow-safe form, which differs from the
    textbook function by the positive factor ``exp(cmax/mu)``; pass
    ``scaled=False`` to get the textbook value.
    """
    kind = Distance(kind)
    m = _Model(inst)
    v = _shift(kind, x, m.cmax)
    if kind is Distance.KL:
        h = m.h_kl(v)
        return h if scaled else h * math.exp(m.cmax / v)
    return {
        Distance.BURG: m.h_burg,
        Distance.HELLINGER: m.h_hellinger,
        Distance.CHI2: m.h_chi2,
        Distance.MOD_CHI2: m.h_mchi2,
    }[kind](v)


def h_derivative(kind, x: float, inst: DroInstance) -> float:
    """Analytic derivative of h for the Newton kinds (chi2, modified chi2)."""
    kind = Distance(kind)
    m = _Model(inst)
    v = _shift(kind, x, m.cmax)
    if kind is Distance.CHI2:
        return m.dh_chi2(v)
    if kind is Distance.MOD_CHI2:
        return m.dh_mchi2(v)
    raise ValueError(f"no Newton derivative for {kind.value}")


def _upper_offset(kind: Distance, inst: DroInstance) -> float:
    spread = inst.c.cmax - inst.c.cmin
    if kind is Distance.HELLINGER:
        return (2.0 - inst.epsilon) * spread / inst.epsilon
    return spread / inst.epsilon


def bracket(kind, inst: DroInstance) -> tuple:
    """Open-closed interval ``(lo, hi]`` containing the root.

    ``hi`` is ``inf`` for the Newton kinds.
    """
    kind = Distance(kind)
    cmax = inst.c.cmax
    if kind is Distance.KL:
        return 0.0, _upper_offset(kind, inst)
    if kind in (Distance.BURG, Distance.HELLINGER):
        return cmax, cmax + _upper_offset(kind, inst)
    if kind is Distance.CHI2:
        return cmax, math.inf
    if kind is Distance.MOD_CHI2:
        return -cmax, math.inf
    raise ValueError(f"{kind.value} is not a phi-divergence")


def _raw_weights(kind: Distance, v: float, m: _Model) -> np.ndarray:
    if kind is Distance.KL:
        with np.errstate(divide="ignore", over="ignore"):
            return m.q * np.exp(np.maximum(-m.gap / v, _EXP_FLOOR))
    if kind is Distance.MOD_CHI2:
        return m.q * np.maximum(m.c + v, 0.0)
    x = m.shifted(v)
    if kind is Distance.BURG:
        return m.q / x
    if kind is Distance.HELLINGER:
        return m.q / (x * x)
    return m.q / np.sqrt(x)


def weights(kind, root: float, inst: DroInstance) -> np.ndarray:
    """Normalized optimal distribution recovered from a root of h."""
    kind = Distance(kind)
    m = _Model(inst)
    w = _raw_weights(kind, _shift(kind, root, m.cmax), m)
    return w / w.sum()


def _multipliers(kind: Distance, v: float, m: _Model):
    """KKT multipliers (lambda, mu) of the sum and distance constraints."""
    if kind is Distance.KL:
        with np.errstate(divide="ignore", over="ignore"):
            s = m.q @ np.exp(np.maximum(-m.gap / v, _EXP_FLOOR))
        return m.cmax + v * math.log(s), v
    if kind is Distance.MOD_CHI2:
        return v, 0.5 * float(m.q @ np.maximum(m.c + v, 0.0))
    x = m.shifted(v)
    lam = m.cmax + v
    if kind is Distance.BURG:
        return lam, 1.0 / float(m.q @ (1.0 / x))
    if kind is Distance.HELLINGER:
        return lam, 1.0 / math.sqrt(float(m.q @ (1.0 / (x * x))))
    a = float(m.q @ np.sqrt(x))
    return lam, (a / (1.0 + m.eps)) ** 2


def solver_equation(kind, inst: DroInstance) -> Callable[[float], float]:
    """The function whose root the solver computes, in the solver's variable.

    That is ``mu`` for KL, ``lambda - cmax`` for Burg/Hellinger/chi2 and
    ``lambda`` for modified chi2.
    """
    kind = Distance(kind)
    m = _Model(inst)
    return {
        Distance.KL: m.h_kl,
        Distance.BURG: m.h_burg,
        Distance.HELLINGER: m.h_hellinger_normalized,
        Distance.CHI2: m.h_chi2,
        Distance.MOD_CHI2: m.h_mchi2,
    }[kind]


def _bisect_open(h: ScalarFn, hi: float, cfg: RootConfig) -> float:
    """Bisection on ``(0, hi]`` where h has a pole or limit at 0."""
    try:
        return bisect(h, 0.0, hi, cfg, open_lo=True)
    except NoSignChange:
        pass
    # the sign at 0+ is only reached closer to the pole than tol_x
    f_hi = h(hi)
    t = cfg.tol_x
    while t > 1e-300:
        t *= 1e-3
        if (h(t) > 0) != (f_hi > 0):
            return bisect(h, t, hi, cfg, open_lo=False)
    raise NoSignChange("no sign change found approaching the lower bracket end")


def solve_dro_phi(inst: DroInstance, cfg: RootConfig = DEFAULT) -> SolverResult:
    """Worst-case distribution for a φ-divergence ball.

    Returns the mass-on-argmax candidate when it is feasible and otherwise
    solves the kind's scalar equation (bisection for KL, Burg and Hellinger;
    guarded Newton for chi2 and modified chi2).
    """
    kind = inst.distance
    if not kind.is_divergence:
        raise ValueError(f"{kind.value} is not a phi-divergence")
    if inst.c.constant:
        return degenerate_result(inst)
    mass = float(inst.q.weights[inst.c.argmax_set].sum())
    if trivial_distance(kind, mass) <= inst.epsilon:
        p_hat = trivial_candidate(inst.q, inst.c)
        return SolverResult(p=p_hat, status=Status.TRIVIAL,
                            objective=float(inst.c.costs @ p_hat))

    m = _Model(inst)
    trace = {"variable": "mu" if kind is Distance.KL else "lambda"}
    if kind in (Distance.KL, Distance.BURG, Distance.HELLINGER):
        hi = _upper_offset(kind, inst)
        h = ScalarFn(solver_equation(kind, inst))
        v = _bisect_open(h, hi, cfg)
        trace.update(method="bisection", bracket=bracket(kind, inst), h_scale=1.0)
    elif kind is Distance.CHI2:
        h = ScalarFn(m.h_chi2, m.dh_chi2)
        x0 = find_sign_point(h, lower_barrier=0.0, want=Sign.POSITIVE)
        f0 = h(x0)
        v = newton_guarded(h, x0, Shape.CONVEX_DECREASING, cfg)
        trace.update(method="newton", start=m.cmax + x0, h_scale=max(1.0, abs(f0)))
    else:
        h = ScalarFn(m.h_mchi2, m.dh_mchi2)
        x0 = find_sign_point(h, start=max(1.0, 1.0 - m.cmin), want=Sign.NEGATIVE)
        f0 = h(x0)
        v = newton_guarded(h, x0, Shape.CONCAVE_DECREASING, cfg, bracket=(-m.cmax, x0))
        trace.update(method="newton", start=x0, h_scale=max(1.0, abs(f0)))

    w = _raw_weights(kind, v, m)
    p = w / w.sum()
    lam, mu = _multipliers(kind, v, m)
    trace["solver_root"] = v
    trace["root"] = mu if kind is Distance.KL else lam
    return SolverResult(p=p, status=Status.ROOT_FOUND, objective=float(m.c @ p),
                        lambda_=lam, mu=mu, h_evaluations=h.evaluations, trace=trace)
