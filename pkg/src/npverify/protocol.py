"""Merlin/Arthur roles and the completeness/soundness analysis of the protocol."""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass
from typing import Optional

import numpy as np

from . import _kernels
from .photonics import (ClickOutcome, ClickProbabilities, OpticalParams, click_probabilities,
                        sample_clicks)
from .satgen import DEFAULT_DELTA, Formula, as_assignment

DEFAULT_GAMMA = 0.4
C_MIN = 0.9
S_MAX = 0.6
ADVANTAGE_MARGIN = 1000
MU_TOL = 1e-4

UNDEFINED, SINGLE, RANDOM_FROM_DOUBLE = 0, 1, 2


class NoAdvantageRegion(ValueError):
    """Expected YES count does not exceed expected NO count."""


@dataclass(frozen=True)
class ProtocolParams:
    n: int
    optical: OpticalParams
    m: Optional[int] = None  # defaults to n
    delta: float = DEFAULT_DELTA
    gamma: float = DEFAULT_GAMMA
    c_min: float = C_MIN
    s_max: float = S_MAX
    advantage_margin: int = ADVANTAGE_MARGIN

    def __post_init__(self):
        if self.m is None:
            object.__setattr__(self, "m", self.n)
        if self.n < 1 or self.m < 1:
            raise ValueError("n and m must be >= 1")
        if not 0.0 < self.delta <= 1.0:
            raise ValueError(f"delta must lie in (0, 1], got {self.delta}")
        if not 0.0 < self.gamma <= 1.0:
            raise ValueError(f"gamma must lie in (0, 1], got {self.gamma}")
        for name in ("c_min", "s_max"):
            if not 0.0 < getattr(self, name) < 1.0:
                raise ValueError(f"{name} must lie in (0, 1)")
        if self.advantage_margin < 0:
            raise ValueError("advantage_margin must be >= 0")

    @classmethod
    def build(cls, n, mu, nu=1.0, p_dark=0.0, **kw) -> "ProtocolParams":
        return cls(n=n, optical=OpticalParams(mu=mu, nu=nu, p_dark=p_dark), **kw)


@dataclass(frozen=True)
class AnalyticBounds:
    clicks: ClickProbabilities
    p_Y: float
    p_N: float
    T_C: float
    T_S: float
    T: float
    completeness_lb: float
    soundness_ub: float
    gap: float

    def to_dict(self) -> dict:
        d = asdict(self)
        d["clicks"] = self.clicks.as_dict()
        return d


@dataclass(frozen=True)
class PartialAssignment:
    values: np.ndarray  # int8: -1 undefined, else 0/1
    provenance: np.ndarray  # uint8: UNDEFINED / SINGLE / RANDOM_FROM_DOUBLE

    @property
    def n(self) -> int:
        return int(self.values.shape[0])

    @property
    def s_clk(self) -> int:
        return int(np.count_nonzero(self.provenance == SINGLE))

    @property
    def dc_clk(self) -> int:
        return int(np.count_nonzero(self.provenance == RANDOM_FROM_DOUBLE))

    @property
    def t_clk(self) -> int:
        return self.s_clk + self.dc_clk

    @property
    def missing_bits(self) -> int:
        return self.n - self.s_clk


@dataclass(frozen=True)
class Verdict:
    accept: bool
    satisfied: int
    unsatisfied: int
    unmeasured: int


# -- roles ---------------------------------------------------------------------

def merlin_encode(proof, n: Optional[int] = None) -> np.ndarray:
    """Phase bits of the pulse train: pulse k carries amplitude (-1)**x_k * alpha."""
    return np.array(as_assignment(proof, n), dtype=np.uint8)


def arthur_measure(phases, optical: OpticalParams, rng) -> np.ndarray:
    phases = np.asarray(phases, dtype=np.uint8)
    return sample_clicks(click_probabilities(optical), phases, rng)


def arthur_assign(trace, rng) -> PartialAssignment:
    trace = np.asarray(trace, dtype=np.uint8)
    coins = rng.random(trace.shape[0])
    values = _kernels.assign_values(trace, coins)
    prov = np.zeros(trace.shape[0], dtype=np.uint8)
    prov[(trace == ClickOutcome.D0) | (trace == ClickOutcome.D1)] = SINGLE
    prov[trace == ClickOutcome.BOTH] = RANDOM_FROM_DOUBLE
    return PartialAssignment(values=values, provenance=prov)


def arthur_verdict(pa: PartialAssignment, f: Formula, T: float) -> Verdict:
    """Clauses with all four values defined are measured; accept iff satisfied >= T."""
    if pa.n != f.n:
        raise ValueError(f"assignment covers {pa.n} variables, formula has {f.n}")
    sat, unsat, unmeasured = _kernels.tally_clauses(pa.values, f.zero_based)
    return Verdict(accept=sat >= T, satisfied=sat, unsatisfied=unsat, unmeasured=unmeasured)


# -- analytics -----------------------------------------------------------------

def p_yes(clicks: ClickProbabilities) -> float:
    """Probability that a clause satisfied by the proof is measured as satisfied.

    A double click gives a fair coin, so it counts half toward right and half
    toward wrong values. A 2-of-4 clause survives 0 or 4 flipped values, or 2
    flips that hit one true and one false variable (4 of the 6 pairs).
    """
    a = clicks.p_c + clicks.p_dc / 2
    b = clicks.p_w + clicks.p_dc / 2
    return a**4 + b**4 + 4 * a * a * b * b


def p_no_bound(clicks: ClickProbabilities, delta: float) -> float:
    """Upper bound on measuring a satisfied clause when a delta fraction is unsatisfiable."""
    if not 0.0 <= delta <= 1.0:
        raise ValueError(f"delta must lie in [0, 1], got {delta}")
    ph4 = clicks.p_h**4
    py = p_yes(clicks)
    return ph4 - delta * py - (1.0 - delta) * (ph4 - py)


def thresholds(p_Y: float, p_N: float, m: int) -> tuple[float, float, float]:
    if m < 1:
        raise ValueError("m must be >= 1")
    tc = m * p_Y
    ts = m * p_N
    return tc, ts, 0.5 * (tc + ts)


def chernoff_bounds(T_C: float, T_S: float) -> tuple[float, float]:
    """(completeness lower bound, soundness upper bound) for threshold (T_C + T_S)/2."""
    if not T_C > T_S:
        raise NoAdvantageRegion(f"T_C={T_C} does not exceed T_S={T_S}")
    if T_S <= 0:
        raise NoAdvantageRegion("T_S must be positive")
    d2 = (T_C - T_S) ** 2
    return -math.expm1(-d2 / (4.0 * T_C)), math.exp(-d2 / (4.0 * T_S))


def analytic_bounds(params: ProtocolParams) -> AnalyticBounds:
    """All derived quantities; without a YES/NO separation the bounds are the trivial 0 and 1."""
    clicks = click_probabilities(params.optical)
    py = p_yes(clicks)
    pn = p_no_bound(clicks, params.delta)
    tc, ts, t = thresholds(py, pn, params.m)
    try:
        c_lb, s_ub = chernoff_bounds(tc, ts)
    except NoAdvantageRegion:
        c_lb, s_ub = 0.0, 1.0
    return AnalyticBounds(clicks=clicks, p_Y=py, p_N=pn, T_C=tc, T_S=ts, T=t,
                          completeness_lb=c_lb, soundness_ub=s_ub, gap=c_lb - s_ub)


def ideal_completeness_bound(mu: float, n_clauses: int) -> float:
    if mu < 0:
        raise ValueError("mu must be >= 0")
    ph = -math.expm1(-2.0 * mu)
    return -math.expm1(n_clauses * math.log1p(-(ph**4))) if ph < 1 else 1.0


def ideal_soundness_bound(mu: float, delta: float, n_clauses: int) -> float:
    if mu < 0:
        raise ValueError("mu must be >= 0")
    if not 0.0 < delta <= 1.0:
        raise ValueError("delta must lie in (0, 1]")
    pd = -math.expm1(-mu)
    x = delta * pd**4
    return 0.0 if x >= 1 else math.exp(n_clauses * math.log1p(-x))


def meets_targets(params: ProtocolParams) -> bool:
    b = analytic_bounds(params)
    return b.T_C > b.T_S and b.completeness_lb > params.c_min and b.soundness_ub < params.s_max


def mu_window(n: int, nu: float, delta: float = DEFAULT_DELTA, m: Optional[int] = None,
              targets: tuple[float, float] = (C_MIN, S_MAX), p_dark: float = 0.0,
              mu_max: float = 10.0, grid: int = 2000, tol: float = MU_TOL):
    """Interval of mean photon numbers meeting the completeness/soundness targets.

    Returns ``(mu_lo, mu_hi)`` or ``None``. A coarse grid locates the feasible
    run with the largest gap and each edge is refined by bisection. An edge
    still feasible at ``mu_max`` is reported as ``mu_max``.
    """
    c_min, s_max = targets

    def ok(mu):
        p = ProtocolParams.build(n, mu, nu, p_dark, m=m, delta=delta, c_min=c_min, s_max=s_max)
        return meets_targets(p)

    def gap(mu):
        return analytic_bounds(ProtocolParams.build(n, mu, nu, p_dark, m=m, delta=delta)).gap

    mus = np.linspace(mu_max / grid, mu_max, grid)
    flags = np.array([ok(float(x)) for x in mus])
    if not flags.any():
        return None
    feas = np.flatnonzero(flags)
    best = feas[int(np.argmax([gap(float(mus[i])) for i in feas]))]
    lo = best
    while lo > 0 and flags[lo - 1]:
        lo -= 1
    hi = best
    while hi < grid - 1 and flags[hi + 1]:
        hi += 1

    def edge(good, bad):
        # shrink [good, bad] keeping ok(good) true; works for either orientation
        while abs(bad - good) > tol:
            mid = 0.5 * (good + bad)
            if ok(mid):
                good = mid
            else:
                bad = mid
        return good

    mu_lo = float(mus[lo]) if lo == 0 else edge(float(mus[lo]), float(mus[lo - 1]))
    mu_hi = float(mus[hi]) if hi == grid - 1 else edge(float(mus[hi]), float(mus[hi + 1]))
    return mu_lo, mu_hi


def classical_cost(n: int, s_clk: int, gamma: float = DEFAULT_GAMMA) -> tuple[int, float]:
    """(missing bits, log2 of classical operations) for the bits Arthur never learned."""
    if not 0 <= s_clk <= n:
        raise ValueError(f"need 0 <= s_clk <= n, got s_clk={s_clk}, n={n}")
    missing = n - s_clk
    return missing, gamma * missing


def expected_clicks(params: ProtocolParams) -> float:
    """Expected number of pulses with any click; bounds the information Arthur receives."""
    return params.n * click_probabilities(params.optical).p_h


def advantage_report(params: ProtocolParams, s_clk: Optional[float] = None) -> dict:
    """Check the completeness/soundness and missing-information conditions.

    ``s_clk`` defaults to the expected number of single clicks.
    """
    b = analytic_bounds(params)
    if s_clk is None:
        s_clk = params.n * (b.clicks.p_c + b.clicks.p_w)
    missing = params.n - s_clk
    return {
        "completeness_ok": b.T_C > b.T_S and b.completeness_lb > params.c_min,
        "soundness_ok": b.T_C > b.T_S and b.soundness_ub < params.s_max,
        "missing_bits": missing,
        "margin_ok": missing > params.advantage_margin,
        "log2_classical_ops": params.gamma * missing,
    }
