"""Click statistics for interfering two weak coherent pulses on a balanced beam splitter.

Only click probabilities are modeled. For a coherent input and threshold
detectors this is exact, so sampling outcomes directly loses nothing.
Detectors fire independently: optical fire OR dark count.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass
from enum import IntEnum
from typing import Optional

import numpy as np

from . import _kernels


class ClickOutcome(IntEnum):
    NONE = _kernels.NONE
    D0 = _kernels.D0
    D1 = _kernels.D1
    BOTH = _kernels.BOTH


_CODE = {ClickOutcome.NONE: "N", ClickOutcome.D0: "0", ClickOutcome.D1: "1", ClickOutcome.BOTH: "B"}
_DECODE = {v: k for k, v in _CODE.items()}


@dataclass(frozen=True)
class OpticalParams:
    mu: float
    nu: float = 1.0
    p_dark: float = 0.0

    def __post_init__(self):
        if not (self.mu >= 0 and math.isfinite(self.mu)):
            raise ValueError(f"mu must be finite and >= 0, got {self.mu}")
        if not 0.0 <= self.nu <= 1.0:
            raise ValueError(f"nu must lie in [0, 1], got {self.nu}")
        if not 0.0 <= self.p_dark < 1.0:
            raise ValueError(f"p_dark must lie in [0, 1), got {self.p_dark}")


@dataclass(frozen=True)
class ClickProbabilities:
    """Per-pulse outcome probabilities for an honest pulse.

    ``p_c``/``p_w`` are single clicks in the correct/wrong detector, ``p_dc``
    both detectors. ``p_d`` is the floor on the click probability that holds
    whatever Merlin sends.
    """

    p_c: float
    p_w: float
    p_dc: float
    p_none: float
    p_h: float
    p_d: float

    def floor(self) -> "ClickProbabilities":
        """Outcome law when Merlin's pulse is vacuum: Arthur's own light splits evenly."""
        q = 1.0 - math.sqrt(1.0 - self.p_d)
        return ClickProbabilities(p_c=q * (1 - q), p_w=q * (1 - q), p_dc=q * q,
                                  p_none=(1 - q) ** 2, p_h=self.p_d, p_d=self.p_d)

    def as_dict(self) -> dict:
        return {"p_c": self.p_c, "p_w": self.p_w, "p_dc": self.p_dc, "p_none": self.p_none,
                "p_h": self.p_h, "p_d": self.p_d}


def ideal_detect_prob(mu: float, x_k: int) -> tuple[float, float]:
    """(P[D0 clicks], P[D1 clicks]) for perfect visibility and phase bit x_k."""
    if mu < 0:
        raise ValueError("mu must be >= 0")
    hit = -math.expm1(-2.0 * mu)
    return (hit, 0.0) if x_k == 0 else (0.0, hit)


def click_probabilities(p: OpticalParams) -> ClickProbabilities:
    # -expm1 keeps 1 - e^{-x} accurate when x is tiny
    fire_c = -math.expm1(-2.0 * p.nu * p.mu)
    fire_w = -math.expm1(-2.0 * (1.0 - p.nu) * p.mu)
    if p.p_dark:
        fire_c = 1.0 - (1.0 - fire_c) * (1.0 - p.p_dark)
        fire_w = 1.0 - (1.0 - fire_w) * (1.0 - p.p_dark)
    p_c = fire_c * (1.0 - fire_w)
    p_w = (1.0 - fire_c) * fire_w
    p_dc = fire_c * fire_w
    p_none = (1.0 - fire_c) * (1.0 - fire_w)
    return ClickProbabilities(p_c=p_c, p_w=p_w, p_dc=p_dc, p_none=p_none,
                              p_h=p_c + p_w + p_dc, p_d=-math.expm1(-p.mu))


def sample_clicks(p: ClickProbabilities, bits, rng) -> np.ndarray:
    """Vectorized draw: one outcome per pulse, D_bit being the correct detector."""
    bits = np.asarray(bits, dtype=np.uint8)
    u = rng.random(bits.shape[0])
    return _kernels.classify_clicks(u, bits, p.p_c, p.p_w, p.p_dc)


def sample_floor_clicks(p: ClickProbabilities, n: int, rng) -> np.ndarray:
    """Outcomes when Merlin sends vacuum on every pulse."""
    fl = p.floor()
    u = rng.random(n)
    # the vacuum law is symmetric in D0/D1, so the bit labels are arbitrary
    return _kernels.classify_clicks(u, np.zeros(n, dtype=np.uint8), fl.p_c, fl.p_w, fl.p_dc)


def sample_click(p: ClickProbabilities, honest_bit: Optional[int], rng) -> ClickOutcome:
    """Single pulse. ``honest_bit=None`` models a vacuum pulse from Merlin."""
    if honest_bit is None:
        return ClickOutcome(int(sample_floor_clicks(p, 1, rng)[0]))
    return ClickOutcome(int(sample_clicks(p, [honest_bit], rng)[0]))


def outcome_counts(trace) -> dict[str, int]:
    t = np.asarray(trace, dtype=np.uint8)
    c = np.bincount(t, minlength=4)
    return {"none": int(c[0]), "d0": int(c[1]), "d1": int(c[2]), "both": int(c[3])}


def wrong_click_rate(p: OpticalParams) -> float:
    return click_probabilities(p).p_w


def _bisect(fn, lo, hi, tol, max_iter=200):
    """Root of fn on [lo, hi] assuming sign(fn(lo)) != sign(fn(hi))."""
    flo = fn(lo)
    for _ in range(max_iter):
        if hi - lo <= tol:
            break
        mid = 0.5 * (lo + hi)
        fm = fn(mid)
        if (fm > 0) == (flo > 0):
            lo, flo = mid, fm
        else:
            hi = mid
    return 0.5 * (lo + hi)


def calibrate_visibility(trace, mu: float, p_dark: float = 0.0) -> float:
    """Estimate visibility from a trace of an all-zeros proof.

    The D1-only rate estimates p_w, which falls monotonically in nu on
    [0.5, 1]; the estimate is clipped to that range.
    """
    t = np.asarray(trace, dtype=np.uint8)
    if t.size == 0:
        raise ValueError("empty trace")
    rate = float(np.count_nonzero(t == ClickOutcome.D1)) / t.size
    at_one = wrong_click_rate(OpticalParams(mu, 1.0, p_dark))
    at_half = wrong_click_rate(OpticalParams(mu, 0.5, p_dark))
    if rate <= at_one:
        return 1.0
    if rate >= at_half:
        return 0.5
    return _bisect(lambda nu: wrong_click_rate(OpticalParams(mu, nu, p_dark)) - rate,
                   0.5, 1.0, 1e-12)


def trace_to_csv(trace) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["pulse_index", "outcome"])
    for k, o in enumerate(np.asarray(trace, dtype=np.uint8)):
        w.writerow([k, _CODE[ClickOutcome(int(o))]])
    return buf.getvalue()


def trace_from_csv(text: str) -> np.ndarray:
    rows = list(csv.reader(io.StringIO(text)))
    if not rows or rows[0] != ["pulse_index", "outcome"]:
        raise ValueError("expected header 'pulse_index,outcome'")
    out = np.empty(len(rows) - 1, dtype=np.uint8)
    for k, row in enumerate(rows[1:]):
        if len(row) != 2 or row[0] != str(k) or row[1] not in _DECODE:
            raise ValueError(f"bad trace row {k + 2}: {row!r}")
        out[k] = _DECODE[row[1]]
    return out
