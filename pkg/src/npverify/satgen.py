"""Balanced 2-out-of-4 SAT instances with planted solutions.

A clause is four distinct variables and is satisfied iff exactly two of them
are true. Variables are 1-based in the public API and in files; arrays are
0-based internally.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from . import _kernels

BRUTE_FORCE_MAX_N = 26
DEFAULT_DELTA = 0.15
DEFAULT_DEGREE = 4


class GenerationError(ValueError):
    pass


class ParseError(ValueError):
    def __init__(self, lineno: int, msg: str):
        super().__init__(f"line {lineno}: {msg}")
        self.lineno = lineno


class OracleRefusal(ValueError):
    """Exhaustive search refused because n is too large."""


def _frozen(a, dtype):
    out = np.array(a, dtype=dtype)
    out.setflags(write=False)
    return out


def as_assignment(bits, n: Optional[int] = None) -> np.ndarray:
    """Coerce ``bits`` to a read-only uint8 vector of 0/1 values."""
    a = np.asarray(bits)
    if a.ndim != 1:
        raise ValueError("assignment must be one-dimensional")
    if a.size and not np.isin(a, (0, 1)).all():
        raise ValueError("assignment entries must be 0/1")
    if n is not None and a.shape[0] != n:
        raise ValueError(f"assignment has length {a.shape[0]}, expected {n}")
    return _frozen(a, np.uint8)


def check_clause(a, c: Sequence[int]) -> bool:
    """True iff exactly two of the four (1-based) variables in ``c`` are true."""
    if len(c) != 4:
        raise ValueError("clause must have exactly 4 indices")
    n = len(a)
    total = 0
    for i in c:
        if not 1 <= i <= n:
            raise IndexError(f"variable {i} outside [1, {n}]")
        total += int(a[i - 1])
    return total == 2


@dataclass(frozen=True, eq=False)
class Formula:
    n: int
    clauses: np.ndarray  # (M, 4) int64, 1-based
    degree: int
    delta: float = DEFAULT_DELTA
    planted: Optional[np.ndarray] = None

    def __post_init__(self):
        cl = np.asarray(self.clauses, dtype=np.int64)
        if cl.ndim != 2 or cl.shape[1] != 4:
            raise ValueError("clauses must be an (M, 4) array")
        if cl.size and (cl.min() < 1 or cl.max() > self.n):
            raise ValueError(f"clause index outside [1, {self.n}]")
        srt = np.sort(cl, axis=1)
        if (srt[:, 1:] == srt[:, :-1]).any():
            raise ValueError("clause indices must be distinct")
        if not 0.0 <= self.delta <= 1.0:
            raise ValueError("delta must lie in [0, 1]")
        object.__setattr__(self, "clauses", _frozen(cl, np.int64))
        if self.planted is not None:
            object.__setattr__(self, "planted", as_assignment(self.planted, self.n))
            if self.satisfied_count(self.planted) != self.m:
                raise ValueError("planted assignment does not satisfy every clause")

    @property
    def m(self) -> int:
        return int(self.clauses.shape[0])

    @property
    def zero_based(self) -> np.ndarray:
        return self.clauses - 1

    def occurrences(self) -> np.ndarray:
        return np.bincount(self.clauses.ravel() - 1, minlength=self.n)

    def is_balanced(self) -> bool:
        return bool((self.occurrences() == self.degree).all()) and 4 * self.m == self.n * self.degree

    def satisfied_count(self, bits) -> int:
        return _kernels.count_satisfied(as_assignment(bits, self.n), self.zero_based)

    def __eq__(self, other):
        if not isinstance(other, Formula):
            return NotImplemented
        if (self.n, self.degree, self.delta) != (other.n, other.degree, other.delta):
            return False
        if not np.array_equal(self.clauses, other.clauses):
            return False
        if (self.planted is None) != (other.planted is None):
            return False
        return self.planted is None or np.array_equal(self.planted, other.planted)

    __hash__ = None


def _pair_slots(members: np.ndarray, r: int, rng) -> np.ndarray:
    seq = np.concatenate([rng.permutation(members) for _ in range(r)])
    return seq.reshape(-1, 2)


def _repair_pairs(pairs: np.ndarray, rng, budget: int) -> int:
    """Swap entries between pairs until no pair repeats a variable. Returns swaps used."""
    used = 0
    bad = np.flatnonzero(pairs[:, 0] == pairs[:, 1])
    while bad.size:
        for i in bad:
            if pairs[i, 0] != pairs[i, 1]:
                continue
            if used >= budget:
                raise GenerationError("swap-repair budget exhausted")
            used += 1
            j = int(rng.integers(len(pairs)))
            s = int(rng.integers(2))
            x, y = pairs[i, 1], pairs[j, s]
            # pair j keeps its other entry; both pairs must stay distinct
            if j == i or y == x or pairs[j, 1 - s] == x:
                continue
            pairs[i, 1], pairs[j, s] = y, x
        bad = np.flatnonzero(pairs[:, 0] == pairs[:, 1])
    return used


def gen_balanced_planted(n: int, r: int = DEFAULT_DEGREE, seed=None,
                         delta: float = DEFAULT_DELTA) -> Formula:
    """Random balanced formula whose planted assignment satisfies every clause.

    Each clause takes two variables that are true and two that are false under
    the planted assignment. Balance then forces exactly n/2 true variables, so
    the planted string is uniform over the weight-n/2 strings.
    """
    if n < 8:
        raise GenerationError("need n >= 8")
    if r < 1:
        raise GenerationError("need degree r >= 1")
    if (n * r) % 4:
        raise GenerationError(f"n*r = {n * r} is not divisible by 4")
    if n % 2:
        raise GenerationError("a balanced planted instance needs an even n")
    rng = np.random.default_rng(seed)
    m = n * r // 4
    planted = np.zeros(n, dtype=np.uint8)
    planted[rng.permutation(n)[: n // 2]] = 1
    trues = np.flatnonzero(planted == 1)
    falses = np.flatnonzero(planted == 0)
    budget = 100 * m
    tp = _pair_slots(trues, r, rng)
    budget -= _repair_pairs(tp, rng, budget)
    fp = _pair_slots(falses, r, rng)
    _repair_pairs(fp, rng, budget)
    clauses = np.sort(np.concatenate([tp, fp], axis=1), axis=1) + 1
    clauses = clauses[rng.permutation(m)]
    return Formula(n=n, clauses=clauses, degree=r, delta=delta, planted=planted)


def _code_to_bits(code: int, n: int) -> np.ndarray:
    return ((code >> np.arange(n)) & 1).astype(np.uint8)


def exhaustive_optimum(f: Formula) -> tuple[int, np.ndarray]:
    """Fewest unsatisfied clauses over all assignments, with the lowest-valued optimizer.

    An assignment's value is sum(x_i * 2**(i-1)).
    """
    if f.n > BRUTE_FORCE_MAX_N:
        raise OracleRefusal(f"exhaustive scan refused for n={f.n} > {BRUTE_FORCE_MAX_N}")
    if f.m == 0:
        return 0, np.zeros(f.n, dtype=np.uint8)
    unsat, code = _kernels.exhaustive_min_unsat(f.zero_based, f.n)
    return unsat, _code_to_bits(code, f.n)


def brute_force_delta(f: Formula) -> float:
    """Minimum over all assignments of the unsatisfied-clause fraction."""
    if f.m == 0:
        if f.n > BRUTE_FORCE_MAX_N:
            raise OracleRefusal(f"exhaustive scan refused for n={f.n} > {BRUTE_FORCE_MAX_N}")
        return 0.0
    unsat, _ = exhaustive_optimum(f)
    return unsat / f.m


def perturb(f: Formula, swaps: int, seed=None) -> Formula:
    """Swap variables between random clause pairs; occurrence counts are unchanged.

    The result carries no planted assignment.
    """
    rng = np.random.default_rng(seed)
    cl = np.array(f.clauses)
    done = 0
    tries = 0
    while done < swaps:
        tries += 1
        if tries > 100 * max(swaps, 1) + 1000:
            raise GenerationError("could not perform requested swaps")
        i, j = rng.integers(f.m, size=2)
        s, t = rng.integers(4, size=2)
        x, y = cl[i, s], cl[j, t]
        if i == j or x == y or y in cl[i] or x in cl[j]:
            continue
        cl[i, s], cl[j, t] = y, x
        done += 1
    return Formula(n=f.n, clauses=np.sort(cl, axis=1), degree=f.degree, delta=f.delta)


def gen_no_instance(n: int, r: int = DEFAULT_DEGREE, min_delta: float = 1e-9,
                    seed=None, swaps: Optional[int] = None, attempts: int = 200) -> Formula:
    """Small unsatisfiable balanced instance whose delta is certified by exhaustive scan.

    Perturbs a planted instance until the certified gap reaches ``min_delta``;
    the returned Formula carries the certified delta.
    """
    rng = np.random.default_rng(seed)
    base_swaps = swaps if swaps is not None else n * r // 4
    for _ in range(attempts):
        base = gen_balanced_planted(n, r, seed=rng)
        g = perturb(base, base_swaps, seed=rng)
        d = brute_force_delta(g)
        if d >= min_delta and d > 0:
            return Formula(n=g.n, clauses=g.clauses, degree=g.degree, delta=d)
    raise GenerationError(f"no instance with delta >= {min_delta} in {attempts} attempts")


# -- text format --------------------------------------------------------------

def serialize(f: Formula) -> str:
    lines = [f"p 2in4 {f.n} {f.m} {f.degree} {int(round(f.delta * 1000))}"]
    if f.planted is not None:
        lines.append("a " + "".join("1" if b else "0" for b in f.planted))
    lines.extend("c " + " ".join(str(int(i)) for i in row) for row in f.clauses)
    return "\n".join(lines) + "\n"


def _ints(tokens, lineno):
    try:
        return [int(t) for t in tokens]
    except ValueError:
        raise ParseError(lineno, "expected integers") from None


def parse(text: str) -> Formula:
    header = None
    planted = None
    clauses: list[list[int]] = []
    for lineno, raw in enumerate(text.split("\n"), start=1):
        line = raw.strip()
        if not line:
            continue
        tok = line.split()
        if header is None:
            if tok[0] != "p" or len(tok) != 6 or tok[1] != "2in4":
                raise ParseError(lineno, "expected header 'p 2in4 <N> <M> <r> <delta-milli>'")
            n, m, r, dm = _ints(tok[2:], lineno)
            if n < 1 or m < 0 or r < 1 or not 0 <= dm <= 1000:
                raise ParseError(lineno, "header values out of range")
            header = (n, m, r, dm)
            header_line = lineno
            continue
        if tok[0] == "a":
            if planted is not None or clauses:
                raise ParseError(lineno, "planted line must come once, before clauses")
            if len(tok) != 2 or len(tok[1]) != header[0] or set(tok[1]) - {"0", "1"}:
                raise ParseError(lineno, f"planted line must be a {header[0]}-bit string")
            planted = np.frombuffer(tok[1].encode(), dtype=np.uint8) - ord("0")
        elif tok[0] == "c":
            idx = _ints(tok[1:], lineno)
            if len(idx) != 4:
                raise ParseError(lineno, f"clause needs 4 indices, got {len(idx)}")
            if len(set(idx)) != 4:
                raise ParseError(lineno, "duplicate index in clause")
            if min(idx) < 1 or max(idx) > header[0]:
                raise ParseError(lineno, f"index outside [1, {header[0]}]")
            clauses.append(idx)
        else:
            raise ParseError(lineno, f"unknown line type {tok[0]!r}")
    if header is None:
        raise ParseError(1, "missing header")
    n, m, r, dm = header
    if len(clauses) != m:
        raise ParseError(header_line, f"header declares {m} clauses, found {len(clauses)}")
    return Formula(n=n, clauses=np.array(clauses, dtype=np.int64).reshape(-1, 4),
                   degree=r, delta=dm / 1000, planted=planted)


def read_formula(path) -> Formula:
    with open(path, encoding="utf-8") as fh:
        return parse(fh.read())


def write_formula(f: Formula, path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(serialize(f))
