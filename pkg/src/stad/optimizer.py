"""Search over the number of edges added to the MST."""

from __future__ import annotations

import logging
import math
from dataclasses import asdict, dataclass
from typing import Optional

import numpy as np

from .objective import CorrelationTrace, ObjectiveContext, evaluate

log = logging.getLogger(__name__)

DEFAULT_SEED = 20190801
BRUTE_FORCE_CAP = 5000


class DomainTooLargeError(ValueError):
    pass


@dataclass(frozen=True)
class AnnealSchedule:
    """Simulated-annealing settings.

    ``initial_temperature=None`` calibrates T0 from a warm-up probe so that
    the probe proposals would be accepted at ``warmup_acceptance`` on average.
    The proposal step is gaussian in edge-count space with standard deviation
    ``max(1, step_fraction * T / T0 * max_extra)``.
    """

    initial_temperature: Optional[float] = None
    cooling_ratio: float = 0.9
    steps_per_temperature: int = 10
    budget: int = 250
    seed: int = DEFAULT_SEED
    step_fraction: float = 0.1
    warmup: int = 20
    warmup_acceptance: float = 0.8

    def __post_init__(self):
        if self.budget < 10:
            raise ValueError(f"evaluation budget must be >= 10, got {self.budget}")
        if not 0 < self.cooling_ratio < 1:
            raise ValueError("cooling_ratio must lie in (0, 1)")
        if self.initial_temperature is not None and self.initial_temperature <= 0:
            raise ValueError("initial_temperature must be positive")
        if self.steps_per_temperature < 1:
            raise ValueError("steps_per_temperature must be >= 1")
        if not 0 < self.step_fraction <= 1:
            raise ValueError("step_fraction must lie in (0, 1]")
        if not 0 < self.warmup_acceptance < 1:
            raise ValueError("warmup_acceptance must lie in (0, 1)")

    def as_dict(self) -> dict:
        return asdict(self)


@dataclass(frozen=True)
class OptimizationResult:
    best_i: int
    best_r: float
    evaluations: int
    trace: CorrelationTrace
    seed: Optional[int]
    initial_temperature: Optional[float] = None


class _Memo:
    def __init__(self, ctx: ObjectiveContext):
        self.ctx = ctx
        self.scores: dict[int, float] = {}

    def __call__(self, i: int) -> float:
        r = self.scores.get(i)
        if r is None:
            r = self.scores[i] = evaluate(self.ctx, i)
        return r

    def __len__(self) -> int:
        return len(self.scores)


def _calibrate_temperature(values: list[float], target: float) -> float:
    """Smallest T at which moves between the probed states would be
    accepted at ``target`` on average (Metropolis rule, maximizing)."""
    v = np.asarray(values)
    deltas = (v[None, :] - v[:, None])[~np.eye(v.size, dtype=bool)]
    worse = deltas[deltas < 0]
    if worse.size == 0:
        return 1e-3

    def rate(t):
        return float(np.mean(np.where(deltas >= 0, 1.0, np.exp(np.minimum(deltas, 0) / t))))

    lo, hi = 1e-12, float(-worse.min())
    while rate(hi) < target:
        hi *= 2
    for _ in range(100):
        mid = math.sqrt(lo * hi)
        if rate(mid) >= target:
            hi = mid
        else:
            lo = mid
    return hi


def anneal(ctx: ObjectiveContext, schedule: AnnealSchedule = AnnealSchedule()) -> OptimizationResult:
    """Metropolis search over the edge count, starting at the bare MST.

    Evaluations are memoized, so the budget counts distinct edge counts.
    A temperature level that produces no new evaluation reheats the chain
    to T0 from the best state. The best state ever seen is returned.
    """
    rng = np.random.default_rng(schedule.seed)
    f = _Memo(ctx)
    top = ctx.max_extra

    def propose(i, sigma):
        return int(min(top, max(0, i + round(rng.normal(0.0, sigma)))))

    cur_i, cur_r = 0, f(0)
    sigma0 = max(1.0, schedule.step_fraction * top)

    t0 = schedule.initial_temperature
    if t0 is None:
        probes = [cur_r]
        for _ in range(schedule.warmup):
            if len(f) >= schedule.budget:
                break
            probes.append(f(propose(0, sigma0)))
        t0 = _calibrate_temperature(probes, schedule.warmup_acceptance)
    log.debug("anneal: T0=%.6g domain=%d budget=%d", t0, top + 1, schedule.budget)

    temp = t0
    steps = 0
    level_start = len(f)
    max_proposals = 20 * schedule.budget
    while len(f) < schedule.budget and len(f) < top + 1 and steps < max_proposals:
        sigma = max(1.0, schedule.step_fraction * (temp / t0) * top)
        cand = propose(cur_i, sigma)
        r = f(cand)
        if r >= cur_r or rng.random() < math.exp((r - cur_r) / temp):
            cur_i, cur_r = cand, r
        steps += 1
        if steps % schedule.steps_per_temperature == 0:
            if len(f) == level_start:
                # frozen: a whole level revisited known states, so spend the
                # remaining budget on a fresh chain from the best state
                best_i = max(f.scores, key=lambda k: (f.scores[k], -k))
                cur_i, cur_r, temp = best_i, f.scores[best_i], t0
                log.debug("anneal: reheat at %d evaluations", len(f))
            else:
                temp *= schedule.cooling_ratio
            level_start = len(f)

    if schedule.budget >= top + 1:
        for i in range(top + 1):
            f(i)

    trace = CorrelationTrace.from_dict(f.scores)
    return OptimizationResult(trace.best_i, trace.best_r, len(f), trace, schedule.seed, t0)


def brute_force_optimum(ctx: ObjectiveContext, cap: int = BRUTE_FORCE_CAP) -> OptimizationResult:
    if ctx.domain_size > cap:
        raise DomainTooLargeError(
            f"exhaustive search needs {ctx.domain_size} evaluations, above the cap of {cap}; "
            "raise the cap or use annealing"
        )
    scores = {i: evaluate(ctx, i) for i in range(ctx.domain_size)}
    trace = CorrelationTrace.from_dict(scores)
    return OptimizationResult(trace.best_i, trace.best_r, len(scores), trace, None)
