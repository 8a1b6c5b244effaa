"""Domain types, validation and cost statistics shared by every solver."""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

SUM_TOL = 1e-12


class DroError(Exception):
    """Base class for all errors raised by this package."""


class ValidationError(DroError, ValueError):
    """Input data violate a documented precondition."""


class NonPositiveWeight(ValidationError):
    pass


class NotNormalized(ValidationError):
    pass


class TooShort(ValidationError):
    pass


class DimensionMismatch(ValidationError):
    pass


class InfeasibleBounds(ValidationError):
    pass


class DomainViolation(ValidationError):
    pass


class Distance(str, enum.Enum):
    """Distance used to define the ambiguity ball around the nominal distribution."""

    KL = "kl"
    BURG = "burg"
    HELLINGER = "hellinger"
    CHI2 = "chi2"
    MOD_CHI2 = "mchi2"
    L1 = "l1"
    L2 = "l2"
    LINF = "linf"

    @property
    def is_divergence(self) -> bool:
        return self in _DIVERGENCES


_DIVERGENCES = frozenset(
    {Distance.KL, Distance.BURG, Distance.HELLINGER, Distance.CHI2, Distance.MOD_CHI2}
)


class Status(str, enum.Enum):
    TRIVIAL = "TrivialCase"
    ROOT_FOUND = "RootFound"
    DEGENERATE = "DegenerateObjective"


def _frozen(x) -> np.ndarray:
    a = np.array(x, dtype=np.float64)
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class Distribution:
    """Nominal probability vector with strictly positive entries."""

    weights: np.ndarray

    def __len__(self) -> int:
        return self.weights.shape[0]


@dataclass(frozen=True)
class CostVector:
    costs: np.ndarray
    cmax: float
    cmin: float
    argmax_set: np.ndarray
    constant: bool

    def __len__(self) -> int:
        return self.costs.shape[0]


def validate_distribution(w) -> Distribution:
    """Check that ``w`` is a strictly positive probability vector.

    Raises:
        TooShort: fewer than two entries.
        NonPositiveWeight: some entry is not strictly positive.
        NotNormalized: the entries do not sum to one within ``1e-12``.
    """
    a = np.asarray(w, dtype=np.float64)
    if a.ndim != 1 or a.shape[0] < 2:
        raise TooShort(f"distribution needs at least 2 entries, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise NonPositiveWeight("distribution contains non-finite entries")
    if np.any(a <= 0.0):
        i = int(np.flatnonzero(a <= 0.0)[0])
        raise NonPositiveWeight(f"weight {i} is {a[i]!r}, must be > 0")
    s = float(np.sum(a))
    if abs(s - 1.0) > SUM_TOL:
        raise NotNormalized(f"weights sum to {s!r}, expected 1")
    return Distribution(_frozen(a))


def cost_stats(c) -> CostVector:
    """Compute ``cmax``, ``cmin`` and the argmax index set of ``c``.

    Ties are detected with exact floating-point equality. A constant vector
    is flagged through ``constant`` rather than rejected.
    """
    a = np.asarray(c, dtype=np.float64)
    if a.ndim != 1 or a.shape[0] < 2:
        raise TooShort(f"cost vector needs at least 2 entries, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise ValidationError("cost vector contains non-finite entries")
    cmax = float(a.max())
    cmin = float(a.min())
    idx = np.flatnonzero(a == cmax)
    idx.setflags(write=False)
    return CostVector(_frozen(a), cmax, cmin, idx, cmax == cmin)


@dataclass(frozen=True)
class DroInstance:
    q: Distribution
    c: CostVector
    epsilon: float
    distance: Distance

    @property
    def n(self) -> int:
        return len(self.q)

    @classmethod
    def build(cls, q, c, epsilon, distance) -> "DroInstance":
        """Validate raw inputs and assemble an instance."""
        dist = Distance(distance)
        qd = q if isinstance(q, Distribution) else validate_distribution(q)
        cv = c if isinstance(c, CostVector) else cost_stats(c)
        if len(qd) != len(cv):
            raise DimensionMismatch(f"q has {len(qd)} entries but c has {len(cv)}")
        eps = float(epsilon)
        if not np.isfinite(eps) or eps <= 0.0:
            raise ValidationError(f"epsilon must be a positive finite number, got {epsilon!r}")
        if dist is Distance.HELLINGER and eps >= 2.0:
            raise ValidationError("Hellinger radius must be < 2")
        return cls(qd, cv, eps, dist)


@dataclass(frozen=True)
class BoxSimplexInstance:
    q: np.ndarray
    l: np.ndarray
    u: np.ndarray

    @property
    def n(self) -> int:
        return self.q.shape[0]

    @classmethod
    def build(cls, q, l, u) -> "BoxSimplexInstance":
        qa, la, ua = (np.asarray(v, dtype=np.float64) for v in (q, l, u))
        if qa.ndim != 1 or qa.shape[0] < 1:
            raise TooShort("q must be a non-empty vector")
        if la.shape != qa.shape or ua.shape != qa.shape:
            raise DimensionMismatch("q, l and u must have the same length")
        if not (np.all(np.isfinite(qa)) and np.all(np.isfinite(la)) and np.all(np.isfinite(ua))):
            raise ValidationError("q, l and u must be finite")
        if np.any(la > ua):
            raise InfeasibleBounds("some lower bound exceeds its upper bound")
        if float(np.sum(la)) > 1.0 or float(np.sum(ua)) < 1.0:
            raise InfeasibleBounds(
                f"need sum(l) <= 1 <= sum(u), got {np.sum(la)!r} and {np.sum(ua)!r}"
            )
        return cls(_frozen(qa), _frozen(la), _frozen(ua))


@dataclass
class SolverResult:
    """Output of every solver.

    ``trace`` holds solver-specific diagnostics such as the root variable,
    the bracket and the scale used for residual tests.
    """

    p: np.ndarray
    status: Status
    objective: float
    lambda_: Optional[float] = None
    mu: Optional[float] = None
    h_evaluations: int = 0
    trace: dict = field(default_factory=dict)

    def to_json(self) -> dict:
        return {
            "p": [float(v) for v in self.p],
            "lambda": None if self.lambda_ is None else float(self.lambda_),
            "mu": None if self.mu is None else float(self.mu),
            "status": self.status.value,
            "objective": float(self.objective),
            "h_evaluations": int(self.h_evaluations),
        }


def degenerate_result(inst: DroInstance) -> SolverResult:
    """Every feasible point is optimal for constant costs; q is at distance 0."""
    return SolverResult(
        p=np.array(inst.q.weights), status=Status.DEGENERATE, objective=inst.c.cmax
    )
