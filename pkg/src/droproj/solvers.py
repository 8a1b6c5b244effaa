"""Method dispatch shared by the oracle, the benchmark and the CLI."""

from __future__ import annotations

import numpy as np

from . import box_simplex, dro_norm, dro_phi
from .core import BoxSimplexInstance, Distance, DroInstance, SolverResult, Status
from .divergence import divergence
from .rootfind import DEFAULT, RootConfig

METHODS = ("kl", "burg", "hellinger", "chi2", "mchi2", "l1", "l2", "linf", "simplex")


def solve(inst, cfg: RootConfig = DEFAULT) -> SolverResult:
    if isinstance(inst, BoxSimplexInstance):
        return box_simplex.solve_box_simplex(inst)
    if inst.distance.is_divergence:
        return dro_phi.solve_dro_phi(inst, cfg)
    return dro_norm.solve_dro_norm(inst, cfg)


def distance(kind, p, q):
    """Distance from ``p`` (one vector or a batch of rows) to ``q``."""
    kind = Distance(kind)
    qa = q.weights if hasattr(q, "weights") else np.asarray(q, dtype=np.float64)
    if kind.is_divergence:
        return divergence(kind, p, qa)
    d = np.asarray(p, dtype=np.float64) - qa
    if kind is Distance.L1:
        out = np.abs(d).sum(axis=-1)
    elif kind is Distance.L2:
        out = np.sqrt((d * d).sum(axis=-1))
    else:
        out = np.abs(d).max(axis=-1)
    return float(out) if np.ndim(out) == 0 else out


def root_residual(inst, result: SolverResult) -> float:
    """``|h(root)| / scale`` in the solver's own equation; 0 when no root was solved."""
    if result.status is not Status.ROOT_FOUND:
        return 0.0
    if isinstance(inst, BoxSimplexInstance):
        return abs(box_simplex.h7(result.lambda_, inst))
    tr = result.trace
    if "solver_root" not in tr:
        return 0.0
    if inst.distance is Distance.L2:
        h = dro_norm.solver_equation(inst)
    else:
        h = dro_phi.solver_equation(inst.distance, inst)
    return abs(h(tr["solver_root"])) / tr.get("h_scale", 1.0)


def build_instance(method: str, data: dict, epsilon=None):
    """Instance from a JSON-style mapping (``q``/``c`` or ``q``/``l``/``u``)."""
    if method == "simplex":
        return BoxSimplexInstance.build(data["q"], data["l"], data["u"])
    return DroInstance.build(data["q"], data["c"], epsilon, method)
