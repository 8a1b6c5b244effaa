"""Deterministic instances, timing harness and power-law complexity fits."""

from __future__ import annotations

import csv
import json
import logging
import math
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .core import BoxSimplexInstance, DroError, DroInstance
from .rootfind import DEFAULT, RootConfig
from .solvers import METHODS, solve

log = logging.getLogger(__name__)

GAMMA = 0x9E3779B97F4A7C15
MIX1 = 0xBF58476D1CE4E5B9
MIX2 = 0x94D049BB133111EB
MASK64 = (1 << 64) - 1

DEFAULT_EPSILON = 0.1
DEFAULT_TRIALS = 100
WARMUP = 3
CSV_HEADER = ("method", "n", "trials", "mean_time_s", "mean_h_evals", "seed", "epsilon")
BOX_FAMILY = "q = DRO nominal q; l = 0; u_i = (0.5 + 2 v_i)/n with v ~ U(0,1), rescaled to sum 1.5 if sum(u) < 1"


class DegenerateFit(DroError, ValueError):
    pass


def splitmix64(seed: int, count: int) -> np.ndarray:
    """First ``count`` outputs of the splitmix64 generator seeded with ``seed``."""
    k = np.arange(1, count + 1, dtype=np.uint64)
    s = np.uint64(seed & MASK64) + k * np.uint64(GAMMA)
    z = (s ^ (s >> np.uint64(30))) * np.uint64(MIX1)
    z = (z ^ (z >> np.uint64(27))) * np.uint64(MIX2)
    return z ^ (z >> np.uint64(31))


def uniforms(seed: int, count: int) -> np.ndarray:
    """Doubles in [0, 1) from the top 53 bits of each splitmix64 output."""
    return (splitmix64(seed, count) >> np.uint64(11)).astype(np.float64) * 2.0 ** -53


def generate_instance(n: int, seed: int):
    """Nominal distribution ``q`` and costs ``c`` in (0, 1), bit-reproducible."""
    if n < 2:
        raise ValueError("n must be at least 2")
    v = uniforms(seed, 2 * n)
    raw = v[:n]
    q = raw / math.fsum(raw)
    return q, v[n:].copy()


def generate_box_instance(n: int, seed: int):
    v = uniforms(seed, 3 * n)
    q = v[:n] / math.fsum(v[:n])
    u = (0.5 + 2.0 * v[2 * n:]) / n
    su = math.fsum(u)
    if su < 1.0:
        u *= 1.5 / su
    return q, np.zeros(n), u


def trial_seed(seed: int, trial: int) -> int:
    return (seed + trial) & MASK64


def make_instance(method: str, n: int, seed: int, epsilon: float):
    if method == "simplex":
        return BoxSimplexInstance.build(*generate_box_instance(n, seed))
    q, c = generate_instance(n, seed)
    return DroInstance.build(q, c, epsilon, method)


@dataclass
class BenchRecord:
    method: str
    n: int
    mean_time_s: float
    h_evaluations: float
    trials: int
    seed: int
    epsilon: float = DEFAULT_EPSILON
    failures: int = 0
    times: list = field(default_factory=list, repr=False)


class _Cell:
    """Timing state of one (method, n) pair, advanced one trial at a time."""

    def __init__(self, method, n, epsilon, seed, cfg):
        self.method, self.n, self.epsilon, self.seed, self.cfg = method, n, epsilon, seed, cfg
        self.first = make_instance(method, n, trial_seed(seed, 0), epsilon)
        self.times, self.evals, self.failures = [], [], 0

    def warm_up(self, count: int) -> None:
        for _ in range(count):
            solve(self.first, self.cfg)

    def trial(self, t: int) -> None:
        inst = self.first if t == 0 else make_instance(self.method, self.n, trial_seed(self.seed, t),
                                                       self.epsilon)
        try:
            # untimed pass: brings the instance and solver code back into cache
            # after instance generation, and supplies the evaluation count
            res = solve(inst, self.cfg)
        except DroError as exc:
            self.failures += 1
            log.warning("%s n=%d trial %d failed: %s", self.method, self.n, t, exc)
            return
        start = time.perf_counter()
        solve(inst, self.cfg)
        self.times.append(time.perf_counter() - start)
        self.evals.append(res.h_evaluations)

    def record(self, trials: int) -> BenchRecord:
        mean_t = float(np.mean(self.times)) if self.times else math.nan
        mean_e = float(np.mean(self.evals)) if self.evals else math.nan
        return BenchRecord(self.method, self.n, mean_t, mean_e, trials, self.seed, self.epsilon,
                           self.failures, self.times)


def run_cell(method: str, n: int, trials: int, epsilon: float, seed: int,
             cfg: RootConfig = DEFAULT, warmup: int = WARMUP) -> BenchRecord:
    """Time ``trials`` fresh solves of one (method, n) pair."""
    return _run_method(method, [n], trials, epsilon, seed, cfg, warmup)[0]


def _run_method(method, sizes, trials, epsilon, seed, cfg, warmup) -> list:
    if trials < 1:
        raise ValueError("trials must be >= 1")
    cells = [_Cell(method, n, epsilon, seed, cfg) for n in sizes]
    for cell in cells:
        cell.warm_up(warmup)
    # round robin over sizes, so slow drifts of the machine's speed affect
    # every size alike instead of tilting the fitted exponent
    for t in range(trials):
        for cell in cells:
            cell.trial(t)
    return [cell.record(trials) for cell in cells]


def run_bench(methods: Sequence[str], sizes: Sequence[int], trials: int = DEFAULT_TRIALS,
              epsilon: float = DEFAULT_EPSILON, seed: int = 0, cfg: RootConfig = DEFAULT,
              warmup: int = WARMUP) -> list:
    """Mean time and evaluation count of every (method, n) pair, in that order."""
    if list(sizes) != sorted(sizes):
        raise ValueError("sizes must be sorted ascending")
    unknown = set(methods) - set(METHODS)
    if unknown:
        raise ValueError(f"unknown methods: {sorted(unknown)}")
    out = []
    for method in methods:
        for rec in _run_method(method, sizes, trials, epsilon, seed, cfg, warmup):
            log.info("%s n=%d: %.3e s, %.2f evaluations", method, rec.n, rec.mean_time_s, rec.h_evaluations)
            out.append(rec)
    return out


@dataclass(frozen=True)
class PowerFit:
    """``t(n) = a * n**b`` fitted by least squares in log-log space."""

    a: float
    b: float

    def __call__(self, n):
        return self.a * np.asarray(n, dtype=np.float64) ** self.b


def fit_power_law(points: Iterable) -> PowerFit:
    """Fit ``t = a n^b`` to ``(n, t)`` pairs or :class:`BenchRecord` objects."""
    ns, ts = [], []
    for pt in points:
        n, t = (pt.n, pt.mean_time_s) if isinstance(pt, BenchRecord) else pt
        ns.append(float(n))
        ts.append(float(t))
    ns, ts = np.array(ns), np.array(ts)
    if np.unique(ns).size < 3:
        raise DegenerateFit(f"need at least 3 distinct sizes, got {np.unique(ns).size}")
    if np.any(ts <= 0) or np.any(~np.isfinite(ts)):
        raise DegenerateFit("times must be positive and finite")
    b, loga = np.polyfit(np.log(ns), np.log(ts), 1)
    return PowerFit(float(math.exp(loga)), float(b))


def fit_by_method(records: Iterable[BenchRecord]) -> dict:
    groups: dict = {}
    for r in records:
        groups.setdefault(r.method, []).append(r)
    return {m: fit_power_law(rs) for m, rs in groups.items()}


def write_csv(records: Sequence[BenchRecord], path) -> None:
    path = Path(path)
    with path.open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(CSV_HEADER)
        for r in records:
            w.writerow([r.method, r.n, r.trials, f"{r.mean_time_s:.9e}", repr(r.h_evaluations),
                        r.seed, repr(r.epsilon)])


def write_metadata(path, *, seed: int, epsilon: float, trials: int, cfg: RootConfig = DEFAULT) -> Path:
    meta_path = Path(str(path) + ".meta.json")
    meta = {
        "seed": seed,
        "epsilon": epsilon,
        "trials": trials,
        "warmup": WARMUP,
        "schedule": "per method, trial t is run for every size before trial t + 1",
        "generator": "splitmix64; q = first n uniforms normalized, c = next n uniforms",
        "trial_seed": "seed + trial (mod 2**64)",
        "simplex_instances": BOX_FAMILY,
        "tol_x": cfg.tol_x,
        "tol_f": cfg.tol_f,
        "max_iter": cfg.max_iter,
    }
    meta_path.write_text(json.dumps(meta, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    return meta_path


def read_csv(path) -> list:
    out = []
    with Path(path).open(newline="", encoding="utf-8") as fh:
        for row in csv.DictReader(fh):
            out.append(BenchRecord(
                method=row["method"], n=int(row["n"]), mean_time_s=float(row["mean_time_s"]),
                h_evaluations=float(row["mean_h_evals"]), trials=int(row["trials"]),
                seed=int(row["seed"]), epsilon=float(row["epsilon"]),
            ))
    return out
