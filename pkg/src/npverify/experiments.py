"""Monte-Carlo runs, parameter sweeps and the replication of the experimental table."""

from __future__ import annotations

import csv
import hashlib
import io
import json
import math
from dataclasses import asdict, dataclass, fields, replace
from typing import Iterable, Optional, Sequence

import numpy as np

from .adversary import AdversaryStrategy, _ensure_unsatisfiable, strategy_proof
from .photonics import ClickProbabilities, OpticalParams, click_probabilities, sample_floor_clicks
from .protocol import (ProtocolParams, analytic_bounds, arthur_assign, arthur_measure,
                       arthur_verdict, classical_cost, merlin_encode, p_yes)
from .satgen import Formula

ASSIGNMENT = "assignment"
INSTANCE = "instance"

# n, nu, mu, single clicks, correct clicks, double clicks, missing bits, threshold, satisfied
TABLE1 = (
    (5000, 0.87, 1.29, 3657, 3505, 964, 1343, 2254, 2227),
    (6000, 0.93, 1.30, 4834, 4741, 719, 1166, 2717, 3231),
    (7000, 0.94, 1.34, 5670, 5582, 848, 1330, 3232, 3904),
    (8000, 0.92, 1.29, 6203, 6062, 1195, 1797, 3613, 4030),
    (9000, 0.92, 1.30, 6974, 6813, 1363, 2026, 4088, 4546),
    (10000, 0.95, 1.15, 8045, 7929, 947, 1955, 4111, 5082),
    (11000, 0.93, 1.30, 8675, 8524, 1515, 2325, 4996, 5789),
    (12000, 0.93, 1.30, 9632, 9466, 1476, 2368, 5437, 6471),
    (13000, 0.95, 1.30, 10636, 10496, 1405, 2364, 5902, 7320),
    (14000, 0.94, 1.29, 11135, 10950, 1807, 2865, 6801, 7437),
)
NOMINAL_NU = 0.93
NOMINAL_MU = 1.31
TABLE1_TOLERANCE = 0.10


@dataclass(frozen=True)
class RunReport:
    n: int
    m: int
    nu: float
    mu: float
    total_single_clicks: int
    correct_clicks: int
    double_clicks: int
    missing_bits: int
    threshold: float
    satisfied_clauses: int
    verdict: bool
    completeness_lb: float
    soundness_ub: float
    gap: float
    log2_classical_ops: float
    seed: int
    mode: str = ASSIGNMENT
    role: str = "honest"

    def __post_init__(self):
        if self.missing_bits != self.n - self.total_single_clicks:
            raise ValueError("missing_bits must equal n - total_single_clicks")
        if self.correct_clicks > self.total_single_clicks:
            raise ValueError("correct_clicks exceeds total_single_clicks")
        if self.satisfied_clauses > self.m:
            raise ValueError("satisfied_clauses exceeds m")

    def to_dict(self) -> dict:
        return asdict(self)

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)

    @classmethod
    def from_dict(cls, d: dict) -> "RunReport":
        names = {f.name for f in fields(cls)}
        return cls(**{k: v for k, v in d.items() if k in names})


def reports_to_json(reports: Iterable[RunReport]) -> str:
    return json.dumps([r.to_dict() for r in reports], sort_keys=True, indent=1) + "\n"


def reports_from_json(text: str) -> list[RunReport]:
    return [RunReport.from_dict(d) for d in json.loads(text)]


def derive_seed(master: int, axis_value, trial: int) -> int:
    """Per-trial seed from (master seed, grid value, trial index); independent of run order."""
    key = f"{int(master)}|{float(axis_value)!r}|{int(trial)}".encode()
    return int.from_bytes(hashlib.blake2b(key, digest_size=8).digest(), "little")


def measured_rates(n: int, single: int, correct: int, double: int) -> ClickProbabilities:
    """Empirical click law from counts: p_c = correct/n, p_w = (single-correct)/n, p_dc = double/n."""
    p_c = correct / n
    p_w = (single - correct) / n
    p_dc = double / n
    p_h = p_c + p_w + p_dc
    return ClickProbabilities(p_c=p_c, p_w=p_w, p_dc=p_dc, p_none=1.0 - p_h, p_h=p_h, p_d=float("nan"))


def satisfied_from_counts(n: int, single: int, correct: int, double: int, m: Optional[int] = None) -> float:
    """Expected satisfied measured clauses on a random YES instance, from click counts."""
    return (n if m is None else m) * p_yes(measured_rates(n, single, correct, double))


def _trace_counts(trace, proof):
    single = (trace == 1) | (trace == 2)
    # outcome code 1 is D0, 2 is D1: correct iff code - 1 == proof bit
    correct = single & ((trace.astype(np.int16) - 1) == proof)
    return int(single.sum()), int(correct.sum()), int((trace == 3).sum())


def run_trial(params: ProtocolParams, mode: str = ASSIGNMENT, seed: int = 0,
              formula: Optional[Formula] = None) -> RunReport:
    """One honest protocol run.

    ``assignment`` mode encodes a uniformly random proof and estimates the
    satisfied-clause count from the measured rates. ``instance`` mode encodes
    the formula's planted assignment and counts clauses directly.
    """
    if mode == INSTANCE:
        if formula is None:
            raise ValueError("instance mode needs a formula")
        if formula.planted is None:
            raise ValueError("instance mode needs a planted assignment")
        if formula.n != params.n:
            raise ValueError(f"formula has n={formula.n}, params have n={params.n}")
        params = replace(params, m=formula.m)
    elif mode == ASSIGNMENT:
        if formula is not None:
            raise ValueError("assignment mode takes no formula")
    else:
        raise ValueError(f"unknown mode {mode!r}")

    rng = np.random.default_rng(seed)
    bounds = analytic_bounds(params)
    if mode == INSTANCE:
        proof = merlin_encode(formula.planted, params.n)
    else:
        proof = rng.integers(0, 2, size=params.n, dtype=np.uint8)
    trace = arthur_measure(proof, params.optical, rng)
    single, correct, double = _trace_counts(trace, proof)
    if mode == INSTANCE:
        pa = arthur_assign(trace, rng)
        v = arthur_verdict(pa, formula, bounds.T)
        satisfied, accept = v.satisfied, v.accept
    else:
        satisfied = int(round(satisfied_from_counts(params.n, single, correct, double, params.m)))
        accept = satisfied >= bounds.T
    missing, log2_ops = classical_cost(params.n, single, params.gamma)
    return RunReport(n=params.n, m=params.m, nu=params.optical.nu, mu=params.optical.mu,
                     total_single_clicks=single, correct_clicks=correct, double_clicks=double,
                     missing_bits=missing, threshold=bounds.T, satisfied_clauses=satisfied,
                     verdict=bool(accept), completeness_lb=bounds.completeness_lb,
                     soundness_ub=bounds.soundness_ub, gap=bounds.gap,
                     log2_classical_ops=log2_ops, seed=int(seed), mode=mode)


def adversary_trial(f: Formula, strategy: AdversaryStrategy, params: ProtocolParams,
                    seed: int = 0) -> RunReport:
    """One cheating-Merlin run on an unsatisfiable instance, reported with role ``adversary``.

    Correct clicks are counted against the phase choice Merlin sent.
    """
    _ensure_unsatisfiable(f)
    params = ProtocolParams(n=f.n, optical=params.optical, m=f.m, delta=f.delta or params.delta,
                            gamma=params.gamma)
    rng = np.random.default_rng(seed)
    bounds = analytic_bounds(params)
    proof = strategy_proof(f, strategy, rng)
    if proof is None:
        trace = sample_floor_clicks(click_probabilities(params.optical), f.n, rng)
        ref = np.zeros(f.n, dtype=np.uint8)
    else:
        trace = arthur_measure(proof, params.optical, rng)
        ref = np.asarray(proof)
    single, correct, double = _trace_counts(trace, ref)
    v = arthur_verdict(arthur_assign(trace, rng), f, bounds.T)
    missing, log2_ops = classical_cost(f.n, single, params.gamma)
    return RunReport(n=f.n, m=f.m, nu=params.optical.nu, mu=params.optical.mu,
                     total_single_clicks=single, correct_clicks=correct, double_clicks=double,
                     missing_bits=missing, threshold=bounds.T, satisfied_clauses=v.satisfied,
                     verdict=v.accept, completeness_lb=bounds.completeness_lb,
                     soundness_ub=bounds.soundness_ub, gap=bounds.gap,
                     log2_classical_ops=log2_ops, seed=int(seed), mode=INSTANCE, role="adversary")


# -- sweeps --------------------------------------------------------------------

@dataclass(frozen=True)
class SweepSpec:
    axis: str  # "mu" or "n"
    grid: Sequence[float]
    fixed: ProtocolParams
    trials: int = 100
    seed: int = 0
    mode: str = ASSIGNMENT

    def __post_init__(self):
        if self.axis not in ("mu", "n"):
            raise ValueError("axis must be 'mu' or 'n'")
        g = np.asarray(self.grid, dtype=float)
        if g.size == 0 or (np.diff(g) <= 0).any():
            raise ValueError("grid must be nonempty and strictly increasing")
        if self.axis == "n" and (g != np.round(g)).any():
            raise ValueError("n grid must be integers")
        if self.trials < 0:
            raise ValueError("trials must be >= 0")
        object.__setattr__(self, "grid", tuple(float(x) for x in g))

    def params_at(self, value: float) -> ProtocolParams:
        p = self.fixed
        if self.axis == "mu":
            return replace(p, optical=replace(p.optical, mu=float(value)))
        n = int(value)
        ratio = p.m / p.n
        return replace(p, n=n, m=max(1, int(round(ratio * n))))


@dataclass(frozen=True)
class SweepRow:
    axis: str
    value: float
    n: int
    m: int
    mu: float
    nu: float
    delta: float
    p_Y: float
    p_N: float
    threshold: float
    completeness_lb: float
    soundness_ub: float
    gap: float
    trials: int
    mean_single_clicks: float
    mean_correct_clicks: float
    mean_double_clicks: float
    mean_total_clicks: float
    mean_correct_bits: float
    mean_satisfied: float
    acceptance_rate: float
    err_single_clicks: float
    err_total_clicks: float
    err_correct_bits: float
    expected_single_clicks: float
    expected_double_clicks: float


def error_bar(clicks: float) -> float:
    """Two Poisson standard deviations of a click count."""
    return 2.0 * math.sqrt(max(clicks, 0.0))


def _sweep_point(spec: SweepSpec, value: float, formula_for=None) -> SweepRow:
    p = spec.params_at(value)
    b = analytic_bounds(p)
    reports = []
    for t in range(spec.trials):
        s = derive_seed(spec.seed, value, t)
        f = formula_for(p, s) if formula_for else None
        reports.append(run_trial(p, spec.mode, s, f))
    if reports:
        single = float(np.mean([r.total_single_clicks for r in reports]))
        correct = float(np.mean([r.correct_clicks for r in reports]))
        double = float(np.mean([r.double_clicks for r in reports]))
        sat = float(np.mean([r.satisfied_clauses for r in reports]))
        acc = float(np.mean([r.verdict for r in reports]))
        m = reports[0].m
    else:
        single = correct = double = sat = acc = float("nan")
        m = p.m
    total = single + double
    correct_bits = correct + double / 2
    return SweepRow(axis=spec.axis, value=float(value), n=p.n, m=m, mu=p.optical.mu,
                    nu=p.optical.nu, delta=p.delta, p_Y=b.p_Y, p_N=b.p_N, threshold=b.T,
                    completeness_lb=b.completeness_lb, soundness_ub=b.soundness_ub, gap=b.gap,
                    trials=spec.trials, mean_single_clicks=single, mean_correct_clicks=correct,
                    mean_double_clicks=double, mean_total_clicks=total,
                    mean_correct_bits=correct_bits, mean_satisfied=sat, acceptance_rate=acc,
                    err_single_clicks=error_bar(single), err_total_clicks=error_bar(total),
                    err_correct_bits=error_bar(correct_bits),
                    expected_single_clicks=p.n * (b.clicks.p_c + b.clicks.p_w),
                    expected_double_clicks=p.n * b.clicks.p_dc)


def sweep(spec: SweepSpec, formula_for=None) -> list[SweepRow]:
    """One row per grid value; trial seeds depend only on (seed, value, trial).

    ``formula_for(params, seed)`` supplies instances in instance mode.
    """
    if spec.mode == INSTANCE and formula_for is None:
        from .satgen import gen_balanced_planted

        def formula_for(p, s):
            return gen_balanced_planted(p.n, 4 * p.m // p.n, seed=s, delta=p.delta)
    return [_sweep_point(spec, v, formula_for) for v in spec.grid]


def rows_to_csv(rows: Sequence) -> str:
    buf = io.StringIO()
    if not rows:
        return ""
    names = [f.name for f in fields(rows[0])]
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(names)
    for r in rows:
        w.writerow([repr(float(v)) if isinstance(v, float) else v for v in (getattr(r, k) for k in names)])
    return buf.getvalue()


def sweep_rows_from_csv(text: str) -> list[SweepRow]:
    types = {f.name: f.type for f in fields(SweepRow)}
    out = []
    for d in csv.DictReader(io.StringIO(text)):
        kw = {}
        for k, v in d.items():
            t = types[k]
            kw[k] = v if t == "str" else (int(v) if t == "int" else float(v))
        out.append(SweepRow(**kw))
    return out


def crossing_mu(rows: Sequence[SweepRow]) -> Optional[float]:
    """First grid value where the NO-instance satisfied fraction reaches the YES fraction."""
    for r in rows:
        if r.p_N >= r.p_Y:
            return r.value
    return None


# -- experimental table --------------------------------------------------------

@dataclass(frozen=True)
class Table1Row:
    n: int
    nu: float
    mu: float
    reported_single: int
    reported_correct: int
    reported_double: int
    reported_missing: int
    reported_threshold: int
    reported_satisfied: int
    analytic_single: float
    analytic_double: float
    sim_mean_single: float
    sim_mean_double: float
    sim_sigma_single: float
    sim_sigma_double: float
    sim_within_3sigma: bool
    single_rel_err: float
    single_within_tol: bool
    recomputed_satisfied: float
    satisfied_diff: float
    missing_identity: bool
    threshold_row: float
    threshold_nominal: float


def simulate_counts(n: int, optical: OpticalParams, trials: int, seed: int) -> tuple[np.ndarray, np.ndarray]:
    """Single- and double-click counts per trial for honest random proofs."""
    singles = np.empty(trials, dtype=np.int64)
    doubles = np.empty(trials, dtype=np.int64)
    for t in range(trials):
        rng = np.random.default_rng(derive_seed(seed, n, t))
        proof = rng.integers(0, 2, size=n, dtype=np.uint8)
        trace = arthur_measure(proof, optical, rng)
        c = np.bincount(trace, minlength=4)
        singles[t] = c[1] + c[2]
        doubles[t] = c[3]
    return singles, doubles


def table1_replication(rows=TABLE1, trials: int = 1000, seed: int = 0,
                       delta: float = 0.15, tolerance: float = TABLE1_TOLERANCE) -> list[Table1Row]:
    """Simulate each experimental row at its own (nu, mu) and compare with the reported counts."""
    if not rows:
        raise ValueError("rows must be nonempty")
    out = []
    for n, nu, mu, single, correct, double, missing, thr, sat in rows:
        opt = OpticalParams(mu=mu, nu=nu)
        cp = click_probabilities(opt)
        p_s = cp.p_c + cp.p_w
        a_single = n * p_s
        a_double = n * cp.p_dc
        if trials > 0:
            s, d = simulate_counts(n, opt, trials, seed)
            ms, md = float(s.mean()), float(d.mean())
        else:
            ms = md = float("nan")
        sig_s = math.sqrt(n * p_s * (1 - p_s) / max(trials, 1))
        sig_d = math.sqrt(n * cp.p_dc * (1 - cp.p_dc) / max(trials, 1))
        within = bool(abs(ms - a_single) <= 3 * sig_s and abs(md - a_double) <= 3 * sig_d)
        rel = abs(a_single - single) / single
        rec = satisfied_from_counts(n, single, correct, double)
        out.append(Table1Row(
            n=n, nu=nu, mu=mu, reported_single=single, reported_correct=correct, reported_double=double,
            reported_missing=missing, reported_threshold=thr, reported_satisfied=sat,
            analytic_single=a_single, analytic_double=a_double, sim_mean_single=ms,
            sim_mean_double=md, sim_sigma_single=sig_s, sim_sigma_double=sig_d,
            sim_within_3sigma=within, single_rel_err=rel, single_within_tol=rel <= tolerance,
            recomputed_satisfied=rec, satisfied_diff=rec - sat,
            missing_identity=(n - single == missing),
            threshold_row=analytic_bounds(ProtocolParams.build(n, mu, nu, delta=delta)).T,
            threshold_nominal=analytic_bounds(
                ProtocolParams.build(n, NOMINAL_MU, NOMINAL_NU, delta=delta)).T,
        ))
    return out
