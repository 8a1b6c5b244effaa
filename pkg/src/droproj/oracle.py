"""Brute-force ground truth for small instances.

The grid oracle enumerates every point of the simplex lattice
``{k * step : k integer, sum k = 1/step}`` and keeps the best feasible one.
It shares nothing with the solvers except the distance evaluation, and is
only meant for verification.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterator, Optional

import numpy as np

from .core import BoxSimplexInstance, DroError, DroInstance, SolverResult
from .solvers import distance, root_residual


class TooLarge(DroError, ValueError):
    pass


MAX_N = 4


@dataclass(frozen=True)
class GridConfig:
    step: float = 1e-3

    def __post_init__(self):
        if not self.step > 0:
            raise ValueError("step must be positive")

    @property
    def divisions(self) -> int:
        return int(round(1.0 / self.step))


def default_step(n: int) -> float:
    return 1e-5 if n == 2 else 1e-3


def _compositions3(total: int) -> np.ndarray:
    # all (a, b, total - a - b) with a, b >= 0, a + b <= total
    a = np.repeat(np.arange(total + 1), np.arange(total + 1, 0, -1))
    start = np.concatenate(([0], np.cumsum(np.arange(total + 1, 0, -1))[:-1]))
    b = np.arange(a.shape[0]) - np.repeat(start, np.arange(total + 1, 0, -1))
    return np.stack((a, b, total - a - b), axis=1)


def lattice(n: int, divisions: int) -> Iterator[np.ndarray]:
    """Yield blocks of integer compositions of ``divisions`` into ``n`` parts."""
    if n > MAX_N:
        raise TooLarge(f"grid enumeration supports n <= {MAX_N}, got {n}")
    if n == 2:
        k = np.arange(divisions + 1)
        yield np.stack((k, divisions - k), axis=1)
    elif n == 3:
        yield _compositions3(divisions)
    else:
        for first in range(divisions + 1):
            rest = _compositions3(divisions - first)
            yield np.column_stack((np.full(rest.shape[0], first), rest))


def grid_solve(inst: DroInstance, cfg: Optional[GridConfig] = None):
    """Best lattice point of the ball; ``(None, -inf)`` if none is feasible."""
    cfg = cfg or GridConfig(default_step(inst.n))
    q, c = inst.q.weights, inst.c.costs
    best_p, best = None, -np.inf
    for block in lattice(inst.n, cfg.divisions):
        p = block * cfg.step
        with np.errstate(divide="ignore", invalid="ignore"):
            ok = distance(inst.distance, p, q) <= inst.epsilon
        if not ok.any():
            continue
        obj = p[ok] @ c
        i = int(np.argmax(obj))
        if obj[i] > best:
            best, best_p = float(obj[i]), p[ok][i]
    return best_p, best


def grid_solve_box(inst: BoxSimplexInstance, cfg: Optional[GridConfig] = None):
    """Lattice point of the box-constrained simplex closest to ``q``."""
    cfg = cfg or GridConfig(default_step(inst.n))
    best_p, best = None, np.inf
    for block in lattice(inst.n, cfg.divisions):
        p = block * cfg.step
        ok = np.all((p >= inst.l) & (p <= inst.u), axis=1)
        if not ok.any():
            continue
        d = p[ok] - inst.q
        obj = 0.5 * np.einsum("ij,ij->i", d, d)
        i = int(np.argmin(obj))
        if obj[i] < best:
            best, best_p = float(obj[i]), p[ok][i]
    return best_p, best


@dataclass(frozen=True)
class ResidualReport:
    sum_violation: float
    nonneg_violation: float
    ball_violation: float
    root_residual: float
    objective_gap_vs_oracle: Optional[float] = None

    def fields(self) -> dict:
        out = {
            "sum_violation": self.sum_violation,
            "nonneg_violation": self.nonneg_violation,
            "ball_violation": self.ball_violation,
            "root_residual": self.root_residual,
        }
        if self.objective_gap_vs_oracle is not None:
            out["objective_gap_vs_oracle"] = self.objective_gap_vs_oracle
        return out

    def worst(self) -> float:
        return max(self.fields().values())


def residuals(inst, result: SolverResult, oracle_objective: Optional[float] = None) -> ResidualReport:
    """Feasibility, root and optimality residuals of a solver result.

    For the box-constrained projection ``nonneg_violation`` measures how far
    ``p`` leaves its bounds and there is no ball. The objective gap is
    positive only when the oracle beats the solver.
    """
    p = np.asarray(result.p, dtype=np.float64)
    sum_v = abs(float(p.sum()) - 1.0)
    if isinstance(inst, BoxSimplexInstance):
        bound_v = max(0.0, float(np.max(inst.l - p)), float(np.max(p - inst.u)))
        ball_v = 0.0
        gap = None if oracle_objective is None else max(0.0, result.objective - oracle_objective)
    else:
        bound_v = max(0.0, -float(p.min()))
        ball_v = max(0.0, distance(inst.distance, np.maximum(p, 0.0), inst.q) - inst.epsilon)
        gap = None if oracle_objective is None else max(0.0, oracle_objective - result.objective)
    return ResidualReport(sum_v, bound_v, ball_v, root_residual(inst, result), gap)
