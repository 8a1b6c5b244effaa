"""Scalar root finding: bracketed bisection, guarded Newton and sign probing.

Every kernel takes a :class:`ScalarFn`, which counts evaluations of ``h``
so that callers can report how many times the (O(n)) function was computed.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Callable, Optional

from .core import DroError


class RootFindingError(DroError):
    """The root finder could not produce a root."""


class NoSignChange(RootFindingError):
    pass


class MaxIterExceeded(RootFindingError):
    pass


class WrongStartSign(RootFindingError):
    pass


class ZeroDerivative(RootFindingError):
    pass


class MaxProbesExceeded(RootFindingError):
    pass


class Shape(enum.Enum):
    CONVEX_DECREASING = "convex-decreasing"
    CONCAVE_DECREASING = "concave-decreasing"


class Sign(enum.Enum):
    POSITIVE = 1
    NEGATIVE = -1


class ScalarFn:
    """Wrap ``func`` (and optionally its derivative) with an evaluation counter.

    Only calls of ``func`` are counted; derivative calls are free because the
    solvers compute them from quantities already formed for ``func``. The last
    point is memoized, so re-asking for it is not a new evaluation.
    """

    def __init__(self, func: Callable[[float], float], deriv: Optional[Callable[[float], float]] = None):
        self.func = func
        self.deriv = deriv
        self.evaluations = 0
        self._last = None

    def __call__(self, x: float) -> float:
        if self._last is not None and self._last[0] == x:
            return self._last[1]
        self.evaluations += 1
        v = float(self.func(x))
        self._last = (x, v)
        return v

    def derivative(self, x: float) -> float:
        if self.deriv is None:
            raise ValueError("no derivative supplied")
        return float(self.deriv(x))


@dataclass(frozen=True)
class RootConfig:
    tol_x: float = 1e-12
    tol_f: float = 1e-10
    max_iter: int = 200

    def __post_init__(self):
        if not (self.tol_x > 0 and self.tol_f > 0 and self.max_iter > 0):
            raise ValueError("tolerances and max_iter must be positive")


DEFAULT = RootConfig()


def _sign(v: float) -> int:
    return (v > 0) - (v < 0)


def bisect(h: ScalarFn, lo: float, hi: float, cfg: RootConfig = DEFAULT, *,
           open_lo: bool = True, trace: Optional[list] = None) -> float:
    """Bisection on ``(lo, hi]``.

    With ``open_lo`` the lower end is never evaluated itself; ``h`` is probed
    at ``lo + max(tol_x, tol_x*|lo|)`` instead, so that functions with a pole
    at ``lo`` can be bracketed.

    The loop stops once the bracket is narrower than ``tol_x * s`` where ``s``
    is ``1 + min(|lo|, |hi|)`` (or 1 if the bracket straddles zero). The
    number of evaluations therefore depends on the bracket only.

    If ``trace`` is a list, every bracket ``(a, b, sign h(a), sign h(b))`` is
    appended to it.
    """
    if not lo < hi:
        raise ValueError(f"need lo < hi, got {lo!r}, {hi!r}")
    a = lo + max(cfg.tol_x, cfg.tol_x * abs(lo)) if open_lo else lo
    b = hi
    fa, fb = h(a), h(b)
    if math.isnan(fa) or math.isnan(fb):
        raise NoSignChange(f"h is NaN at the bracket ends ({fa!r}, {fb!r})")
    if fa == 0.0:
        return a
    if fb == 0.0:
        return b
    sa, sb = _sign(fa), _sign(fb)
    if sa == sb:
        raise NoSignChange(f"h({a!r})={fa!r} and h({b!r})={fb!r} have the same sign")
    scale = 1.0 + (min(abs(a), abs(b)) if a * b > 0 else 0.0)
    width_tol = cfg.tol_x * scale
    it = 0
    while b - a > width_tol:
        if trace is not None:
            trace.append((a, b, sa, sb))
        it += 1
        if it > cfg.max_iter:
            raise MaxIterExceeded(f"bisection did not converge in {cfg.max_iter} steps")
        m = 0.5 * (a + b)
        if m <= a or m >= b:
            break
        fm = h(m)
        if fm == 0.0:
            return m
        if _sign(fm) == sa:
            a = m
        else:
            b = m
    if trace is not None:
        trace.append((a, b, sa, sb))
    return 0.5 * (a + b)


def newton_guarded(h: ScalarFn, x0: float, shape: Shape, cfg: RootConfig = DEFAULT, *,
                   bracket: Optional[tuple] = None, trace: Optional[list] = None,
                   f_scale: Optional[Callable[[float], float]] = None) -> float:
    """Newton's method started on the side where it converges monotonically.

    For a concave decreasing ``h`` the start must satisfy ``h(x0) < 0``; the
    iterates then decrease towards the root. For a convex decreasing ``h`` the
    start must satisfy ``h(x0) > 0`` and the iterates increase. At kinks any
    one-sided derivative works since it is a supergradient (subgradient).

    ``bracket`` is an optional finite interval known to contain the root; it is
    shrunk by the iterates and used for a bisection fallback if the derivative
    vanishes. Visited points are appended to ``trace`` when given.

    The value test is ``|h(x)| <= tol_f * scale`` where the scale is
    ``f_scale(x)`` at the current point if given, else ``max(1, |h(x0)|)``.
    """
    want = -1 if shape is Shape.CONCAVE_DECREASING else 1
    x = float(x0)
    f = h(x)
    if trace is not None:
        trace.append(x)
    if f == 0.0:
        return x
    if _sign(f) != want:
        raise WrongStartSign(f"h({x!r})={f!r}; {shape.value} Newton needs sign {want:+d}")
    tol = cfg.tol_f * max(1.0, abs(f))
    lo, hi = bracket if bracket is not None else (None, None)
    for _ in range(cfg.max_iter):
        if f_scale is not None:
            tol = cfg.tol_f * f_scale(x)
        if abs(f) <= tol:
            return x
        if shape is Shape.CONCAVE_DECREASING:
            hi = x
        else:
            lo = x
        d = h.derivative(x)
        if not abs(d) >= 1e-300 or not math.isfinite(d):
            if lo is not None and hi is not None:
                return bisect(h, lo, hi, cfg, open_lo=shape is Shape.CONCAVE_DECREASING)
            raise ZeroDerivative(f"h'({x!r})={d!r}")
        x_new = x - f / d
        f_new = h(x_new)
        if trace is not None:
            trace.append(x_new)
        if _sign(f_new) == -want:
            # crossed the root: only possible through rounding at convergence
            return x_new if abs(f_new) < abs(f) else x
        step = abs(x_new - x)
        x, f = x_new, f_new
        if f == 0.0 or step <= cfg.tol_x * (1.0 + abs(x)):
            return x
    raise MaxIterExceeded(f"Newton did not converge in {cfg.max_iter} steps")


def find_sign_point(h: ScalarFn, start: Optional[float] = None, lower_barrier: Optional[float] = None,
                    want: Sign = Sign.POSITIVE, max_probes: int = 200) -> float:
    """Locate a point where ``h`` has the sign ``want``.

    With ``lower_barrier`` the probes are ``barrier + 2**-k`` for k = 0, 1, ...
    (approaching a barrier where ``h`` blows up); otherwise they are
    ``start * 2**k``.
    """
    if lower_barrier is None and (start is None or start == 0):
        raise ValueError("need a non-zero start or a lower barrier")
    for k in range(max_probes):
        if lower_barrier is not None:
            x = lower_barrier + math.ldexp(1.0, -k)
        else:
            x = start * math.ldexp(1.0, k)
        if _sign(h(x)) == want.value:
            return x
    raise MaxProbesExceeded(f"no point with sign {want.name} after {max_probes} probes")
