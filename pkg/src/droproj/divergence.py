"""Generating functions and φ-divergences between discrete distributions.

Five divergences are supported, each written as ``sum_i q_i * phi(p_i / q_i)``:

========== ======================= ==========================
kind       phi(t)                  per-coordinate d(p, q)
========== ======================= ==========================
KL         t log t                 p log(p / q)
Burg       -log t                  q log(q / p)
Hellinger  (sqrt(t) - 1)^2         (sqrt(p) - sqrt(q))^2
chi2       (t - 1)^2 / t           (p - q)^2 / p
mod. chi2  (t - 1)^2               (p - q)^2 / q
========== ======================= ==========================

Infinite values are returned as ``inf``, never NaN; ``0 log 0`` is 0.
"""

from __future__ import annotations

import numpy as np

from .core import DimensionMismatch, Distance, Distribution, ValidationError


class NegativeArgument(ValidationError):
    pass


def _require_divergence(kind) -> Distance:
    kind = Distance(kind)
    if not kind.is_divergence:
        raise ValueError(f"{kind.value} is not a phi-divergence")
    return kind


def phi(kind, t):
    """Evaluate the generating function of ``kind`` at ``t >= 0``.

    Accepts scalars or arrays; returns the same shape.
    """
    kind = _require_divergence(kind)
    ta = np.asarray(t, dtype=np.float64)
    if np.any(ta < 0) or np.any(np.isnan(ta)):
        raise NegativeArgument("phi is defined for t >= 0 only")
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        if kind is Distance.KL:
            out = np.where(ta > 0, ta * np.log(np.where(ta > 0, ta, 1.0)), 0.0)
        elif kind is Distance.BURG:
            out = np.where(ta > 0, -np.log(np.where(ta > 0, ta, 1.0)), np.inf)
        elif kind is Distance.HELLINGER:
            out = (np.sqrt(ta) - 1.0) ** 2
        elif kind is Distance.CHI2:
            out = np.where(ta > 0, (ta - 1.0) ** 2 / np.where(ta > 0, ta, 1.0), np.inf)
        else:
            out = (ta - 1.0) ** 2
    return float(out) if out.ndim == 0 else out


def _as_pq(p, q):
    qa = q.weights if isinstance(q, Distribution) else np.asarray(q, dtype=np.float64)
    pa = np.asarray(p, dtype=np.float64)
    if pa.shape[-1] != qa.shape[-1]:
        raise DimensionMismatch(f"p has {pa.shape[-1]} entries but q has {qa.shape[-1]}")
    if np.any(pa < 0):
        raise NegativeArgument("p must be non-negative")
    return pa, qa


def divergence(kind, p, q):
    """``sum_i q_i phi(p_i / q_i)``.

    ``p`` may be a single vector or a 2-D batch with one candidate per row,
    in which case one value per row is returned.
    """
    kind = _require_divergence(kind)
    pa, qa = _as_pq(p, q)
    return _sum_last(qa * phi(kind, pa / qa))


def divergence_terms(kind, p, q):
    """Per-coordinate terms ``d(p_i, q_i)`` in their direct closed form."""
    kind = _require_divergence(kind)
    pa, qa = _as_pq(p, q)
    pa, qa = np.broadcast_arrays(pa, qa)
    with np.errstate(divide="ignore", invalid="ignore"):
        if kind is Distance.KL:
            safe = np.where(pa > 0, pa, 1.0)
            return np.where(pa > 0, pa * np.log(safe / qa), 0.0)
        if kind is Distance.BURG:
            return np.where(pa > 0, qa * np.log(qa / np.where(pa > 0, pa, 1.0)), np.inf)
        if kind is Distance.HELLINGER:
            return (np.sqrt(pa) - np.sqrt(qa)) ** 2
        if kind is Distance.CHI2:
            return np.where(pa > 0, (pa - qa) ** 2 / np.where(pa > 0, pa, 1.0), np.inf)
        return (pa - qa) ** 2 / qa


def divergence_direct(kind, p, q):
    """Same quantity as :func:`divergence`, summed from :func:`divergence_terms`."""
    return _sum_last(divergence_terms(kind, p, q))


def _sum_last(a):
    s = np.sum(a, axis=-1)
    return float(s) if np.ndim(s) == 0 else s
