"""Dishonest Merlin strategies and Monte-Carlo soundness estimates.

Merlin is restricted to unentangled pulses of the agreed mean photon number
carrying a classical phase choice; the vacuum case is kept to exercise the
click floor Arthur's own light provides.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import Optional

import numpy as np

from . import _kernels
from .photonics import click_probabilities, sample_floor_clicks
from .protocol import ProtocolParams, analytic_bounds, arthur_assign, arthur_measure, arthur_verdict
from .satgen import BRUTE_FORCE_MAX_N, Formula, OracleRefusal, as_assignment, exhaustive_optimum


class PromiseViolation(ValueError):
    """The instance handed to a soundness run is satisfiable."""


class StrategyKind(str, Enum):
    EXHAUSTIVE = "best-assignment-exhaustive"
    LOCAL_SEARCH = "best-assignment-local-search"
    FIXED = "fixed-assignment"
    VACUUM = "vacuum-floor"


@dataclass(frozen=True, eq=False)
class AdversaryStrategy:
    kind: StrategyKind
    payload: Optional[np.ndarray] = None

    def __post_init__(self):
        object.__setattr__(self, "kind", StrategyKind(self.kind))
        if self.kind is StrategyKind.FIXED and self.payload is None:
            raise ValueError("fixed-assignment strategy needs a payload")
        if self.payload is not None:
            object.__setattr__(self, "payload", as_assignment(self.payload))


def best_assignment_exhaustive(f: Formula) -> np.ndarray:
    """Assignment satisfying the most clauses; ties go to the lowest binary value."""
    if f.n > BRUTE_FORCE_MAX_N:
        raise OracleRefusal(f"exhaustive search refused for n={f.n}")
    return as_assignment(exhaustive_optimum(f)[1])


WALK_NOISE = 0.4
WALK_FLIPS_PER_VAR = 1000
_WALK_CHUNK = 4096


def _walk(x0, clauses, m, max_flips, noise, rng):
    cur = x0
    best, best_sat = x0, -1
    done = 0
    while done < max_flips:
        steps = min(_WALK_CHUNK, max_flips - done)
        cur, b, sat = _kernels.walk_chunk(cur, clauses, rng.random(3 * steps), noise)
        if sat > best_sat:
            best, best_sat = b, sat
        if best_sat == m:
            break
        done += steps
    return best


def best_assignment_local_search(f: Formula, restarts: int, rng, start=None,
                                 max_flips: Optional[int] = None,
                                 noise: float = WALK_NOISE) -> np.ndarray:
    """Single-bit-flip local search with random restarts.

    Each climb repeatedly picks an unsatisfied clause and flips one of its
    variables: a random one with probability ``noise``, else the one that
    gains the most clauses. The best point seen is polished by steepest
    ascent. The first climb starts from ``start`` (random if absent), later
    ones from fresh random points. With ``restarts=0`` the start point comes
    back unchanged. The result is a heuristic, never a claim of optimality.
    """
    if restarts < 0:
        raise ValueError("restarts must be >= 0")
    if max_flips is None:
        max_flips = WALK_FLIPS_PER_VAR * f.n
    if start is None:
        start = rng.integers(0, 2, size=f.n, dtype=np.uint8)
    best = np.array(as_assignment(start, f.n))
    best_sat = f.satisfied_count(best)
    clauses = f.zero_based
    for i in range(restarts):
        if best_sat == f.m:
            break
        x0 = best if i == 0 else rng.integers(0, 2, size=f.n, dtype=np.uint8)
        x, sat = _kernels.hill_climb(_walk(x0, clauses, f.m, max_flips, noise, rng), clauses)
        if sat > best_sat:
            best, best_sat = x, sat
    return as_assignment(best)


def _ensure_unsatisfiable(f: Formula):
    if f.planted is not None:
        raise PromiseViolation("instance carries a satisfying planted assignment")
    if f.n <= BRUTE_FORCE_MAX_N:
        unsat, _ = exhaustive_optimum(f)
        if unsat == 0:
            raise PromiseViolation("instance is satisfiable")
    elif f.delta <= 0:
        raise PromiseViolation("no unsatisfiability promise (delta = 0)")


def strategy_proof(f: Formula, strategy: AdversaryStrategy, rng) -> Optional[np.ndarray]:
    """The phase choice Merlin commits to, or None for vacuum."""
    k = strategy.kind
    if k is StrategyKind.VACUUM:
        return None
    if k is StrategyKind.FIXED:
        return as_assignment(strategy.payload, f.n)
    if k is StrategyKind.EXHAUSTIVE:
        return best_assignment_exhaustive(f)
    return best_assignment_local_search(f, restarts=20, rng=rng, start=strategy.payload)


@dataclass(frozen=True)
class SoundnessResult:
    trials: int
    accepted: int
    frequency: float
    sigma: float
    soundness_ub: float
    threshold: float
    mean_clicks: float


def soundness_run(f: Formula, strategy: AdversaryStrategy, params: ProtocolParams,
                  trials: int, rng, threshold: Optional[float] = None) -> SoundnessResult:
    """Monte-Carlo acceptance rate of a cheating Merlin, next to the analytic bound.

    The analytic quantities use ``m = f.m`` and the formula's delta.
    """
    if trials < 1:
        raise ValueError("trials must be >= 1")
    _ensure_unsatisfiable(f)
    p = ProtocolParams(n=f.n, optical=params.optical, m=f.m, delta=f.delta or params.delta,
                       gamma=params.gamma, c_min=params.c_min, s_max=params.s_max)
    bounds = analytic_bounds(p)
    T = bounds.T if threshold is None else threshold
    proof = strategy_proof(f, strategy, rng)
    clicks = click_probabilities(params.optical)
    accepted = 0
    n_clicks = 0
    for _ in range(trials):
        if proof is None:
            trace = sample_floor_clicks(clicks, f.n, rng)
        else:
            trace = arthur_measure(proof, params.optical, rng)
        n_clicks += int(np.count_nonzero(trace))
        pa = arthur_assign(trace, rng)
        accepted += arthur_verdict(pa, f, T).accept
    freq = accepted / trials
    # binomial spread at the bound itself
    ub = bounds.soundness_ub
    sigma = math.sqrt(ub * (1 - ub) / trials)
    return SoundnessResult(trials=trials, accepted=accepted, frequency=freq, sigma=sigma,
                           soundness_ub=bounds.soundness_ub, threshold=T,
                           mean_clicks=n_clicks / trials)


def empirical_soundness(f: Formula, strategy: AdversaryStrategy, params: ProtocolParams,
                        trials: int, rng, threshold: Optional[float] = None) -> float:
    return soundness_run(f, strategy, params, trials, rng, threshold).frequency
