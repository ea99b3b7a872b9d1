"""Pure-numpy kernels.

Every function here has a twin in ``numba_impl`` with the same signature and
bit-identical results; the package picks one at import time.
"""

import numpy as np

NONE, D0, D1, BOTH = 0, 1, 2, 3

_CHUNK = 1 << 18


def classify_clicks(u, bits, p_c, p_w, p_dc):
    """Map uniforms to click outcomes for pulses whose correct detector is D_bit."""
    u = np.asarray(u, dtype=np.float64)
    bits = np.asarray(bits, dtype=np.uint8)
    correct = np.where(bits == 0, D0, D1).astype(np.uint8)
    wrong = np.where(bits == 0, D1, D0).astype(np.uint8)
    out = np.full(u.shape, NONE, dtype=np.uint8)
    c1 = p_c
    c2 = p_c + p_w
    c3 = p_c + p_w + p_dc
    m = u < c1
    out[m] = correct[m]
    m = (u >= c1) & (u < c2)
    out[m] = wrong[m]
    out[(u >= c2) & (u < c3)] = BOTH
    return out


def assign_values(outcomes, coins):
    outcomes = np.asarray(outcomes, dtype=np.uint8)
    values = np.full(outcomes.shape, -1, dtype=np.int8)
    values[outcomes == D0] = 0
    values[outcomes == D1] = 1
    both = outcomes == BOTH
    values[both] = (np.asarray(coins)[both] >= 0.5).astype(np.int8)
    return values


def tally_clauses(values, clauses):
    """Return (satisfied, unsatisfied, unmeasured) over measured clauses."""
    v = np.asarray(values, dtype=np.int8)[clauses]
    measured = (v >= 0).all(axis=1)
    ones = (v == 1).sum(axis=1)
    sat = int(np.count_nonzero(measured & (ones == 2)))
    n_measured = int(np.count_nonzero(measured))
    return sat, n_measured - sat, len(clauses) - n_measured


def count_satisfied(bits, clauses):
    b = np.asarray(bits, dtype=np.int64)[clauses]
    return int(np.count_nonzero(b.sum(axis=1) == 2))


def exhaustive_min_unsat(clauses, n):
    """Scan all 2**n assignments; return (min unsatisfied, lowest code attaining it).

    Bit i of the code is the value of variable i (zero-based).
    """
    best = len(clauses) + 1
    best_code = 0
    total = 1 << n
    for start in range(0, total, _CHUNK):
        x = np.arange(start, min(start + _CHUNK, total), dtype=np.int64)
        unsat = np.zeros(x.shape, dtype=np.int32)
        for a, b, c, d in clauses:
            s = ((x >> a) & 1) + ((x >> b) & 1) + ((x >> c) & 1) + ((x >> d) & 1)
            unsat += s != 2
        i = int(np.argmin(unsat))
        if unsat[i] < best:
            best = int(unsat[i])
            best_code = int(x[i])
    return best, best_code


def hill_climb(bits, clauses):
    """Steepest-ascent single-bit flips; ties go to the lowest variable index."""
    bits = np.array(bits, dtype=np.uint8)
    n = bits.shape[0]
    flat = clauses.ravel()
    while True:
        cnt = bits[clauses].sum(axis=1).astype(np.int64)
        sat_now = cnt == 2
        step = np.where(bits[flat] == 0, 1, -1)
        after = np.repeat(cnt, 4) + step
        delta = (after == 2).astype(np.int64) - np.repeat(sat_now, 4).astype(np.int64)
        gain = np.bincount(flat, weights=delta, minlength=n).astype(np.int64)
        v = int(np.argmax(gain))
        if gain[v] <= 0:
            return bits, int(np.count_nonzero(sat_now))
        bits[v] ^= 1


def walk_chunk(bits, clauses, u, noise):
    """Noisy greedy single-bit flips on unsatisfied clauses, len(u) // 3 steps.

    Inherently sequential, so this twin is a plain Python loop. Returns
    (current bits, best bits seen, best satisfied count).
    """
    bits = np.array(bits, dtype=np.uint8)
    n = bits.shape[0]
    cl = clauses.tolist()
    m = len(cl)
    inc = [[] for _ in range(n)]
    for j, row in enumerate(cl):
        for x in row:
            inc[x].append(j)
    b = bits.tolist()
    cnt = [b[r[0]] + b[r[1]] + b[r[2]] + b[r[3]] for r in cl]
    ulist = [j for j in range(m) if cnt[j] != 2]
    pos = [-1] * m
    for i, j in enumerate(ulist):
        pos[j] = i
    best, best_sat = list(b), m - len(ulist)
    uu = np.asarray(u, dtype=np.float64).tolist()
    for s in range(len(uu) // 3):
        k = len(ulist)
        if k == 0:
            break
        c = ulist[min(int(uu[3 * s] * k), k - 1)]
        if uu[3 * s + 1] < noise:
            v = cl[c][min(int(uu[3 * s + 2] * 4), 3)]
        else:
            v, best_gain = -1, None
            for x in cl[c]:
                step = 1 if b[x] == 0 else -1
                g = sum((cnt[j] + step == 2) - (cnt[j] == 2) for j in inc[x])
                if best_gain is None or g > best_gain:
                    v, best_gain = x, g
        step = 1 if b[v] == 0 else -1
        b[v] = 1 - b[v]
        for j in inc[v]:
            was = cnt[j] == 2
            cnt[j] += step
            now = cnt[j] == 2
            if was and not now:
                pos[j] = len(ulist)
                ulist.append(j)
            elif now and not was:
                last = ulist.pop()
                if last != j:
                    ulist[pos[j]] = last
                    pos[last] = pos[j]
                pos[j] = -1
        if m - len(ulist) > best_sat:
            best_sat, best = m - len(ulist), list(b)
    return np.array(b, dtype=np.uint8), np.array(best, dtype=np.uint8), best_sat
